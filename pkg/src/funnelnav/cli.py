"""Command-line entry point.

Subcommands::

    funnelnav teach        --config S.yaml --out DIR        # build a visual path
    funnelnav repeat       --config S.yaml --out DIR        # run one controller
    funnelnav compare      --config S.yaml --out DIR        # both controllers, same seeds
    funnelnav oracle-check --config S.yaml --out DIR        # controller vs brute-force lane
    funnelnav metrics      --config S.yaml --out DIR        # recompute metrics from traces

Exit codes: 0 success, 2 config error, 3 degenerate domain input, 4 internal
invariant breach.  Outputs are byte-reproducible for a fixed config and seed;
wall-clock metadata lives only in meta.json.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, FunnelNavError, InvalidPathError, TeachDegenerateError
from .evaluate import (
    GridSpec,
    MetricsReport,
    Scenario,
    accuracy,
    controller_inside_grid,
    funnel_oracle,
    grid_poses,
    load_scenario,
    repeatability,
    run_scenario,
)
from .features import save_visual_path
from .teach import record

__all__ = ["main"]


def _prepare_out(out: str, force: bool) -> Path:
    p = Path(out)
    if p.exists() and any(p.iterdir()) and not force:
        raise ConfigError(f"output directory {out} is not empty (use --force to overwrite)")
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_meta(out: Path, args, scenario_name: str) -> None:
    meta = {
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "config": str(args.config),
        "scenario": scenario_name,
        "seed_override": args.seed,
        "controller_override": args.controller,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")


def _apply_overrides(scn: Scenario, args) -> Scenario:
    if args.seed is not None:
        scn = replace(scn, seed=args.seed)
    if args.controller is not None:
        scn = replace(scn, navigator=replace(scn.navigator, controller=args.controller))
    return scn


def _teach_path(scn: Scenario):
    return record(scn.world, scn.camera, scn.script, scn.min_teach_features)


def cmd_teach(scn: Scenario, out: Path) -> int:
    path = _teach_path(scn)
    save_visual_path(path, out / "visual_path.json")
    lines = [f"{'index':>5}  {'features':>8}  {'x':>8}  {'y':>8}  {'theta':>8}"]
    for kf in path.keyframes:
        p = kf.pose_truth
        lines.append(
            f"{kf.index:>5}  {len(kf.observations):>8}  {p.x:>8.3f}  {p.y:>8.3f}  {p.theta:>8.3f}"
        )
    (out / "keyframes.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    print(f"wrote {out / 'visual_path.json'} ({len(path.keyframes)} keyframes)")
    return 0


def _write_report(rep: MetricsReport, out: Path, teach_path) -> None:
    sub = out / rep.controller
    sub.mkdir(exist_ok=True)
    for i, tr in enumerate(rep.traces):
        tr.write(sub / f"run_{i:03d}.jsonl")
    (sub / "metrics.json").write_text(
        json.dumps(rep.to_dict(), indent=1, sort_keys=True) + "\n"
    )
    rows = ["kind,run,step,x,y"]
    for k, kf in enumerate(teach_path.keyframes):
        rows.append(f"teach,-1,{k},{kf.pose_truth.x!r},{kf.pose_truth.y!r}")
    for i, tr in enumerate(rep.traces):
        for r in tr.records:
            rows.append(f"repeat,{i},{r.tick},{r.x!r},{r.y!r}")
    (sub / "trajectories.csv").write_text("\n".join(rows) + "\n")


def _report_row(rep: MetricsReport) -> str:
    done = rep.outcomes.get("done", 0)
    return (
        f"{rep.controller:>10}  acc {rep.accuracy:7.3f} m  rep {rep.repeatability:7.3f} m"
        f"  done {done}/{len(rep.traces)}"
    )


def cmd_repeat(scn: Scenario, out: Path) -> int:
    path = _teach_path(scn)
    save_visual_path(path, out / "visual_path.json")
    rep = run_scenario(scn, path=path)
    _write_report(rep, out, path)
    print(_report_row(rep))
    return 0


def cmd_compare(scn: Scenario, out: Path) -> int:
    path = _teach_path(scn)
    save_visual_path(path, out / "visual_path.json")
    print(f"scenario: {scn.name} ({scn.runs} runs per controller, seed {scn.seed})")
    print(f"{'controller':>10}  {'accuracy / repeatability':^34}  outcome")
    for controller in ("standard", "sloped"):
        rep = run_scenario(scn, controller=controller, path=path)
        _write_report(rep, out, path)
        print(_report_row(rep))
    return 0


def _oracle_grid(scn: Scenario, d: dict | None) -> tuple[int, GridSpec]:
    o = d or {}
    g = o.get("grid", {})
    xmin, ymin, xmax, ymax = scn.world.bounds
    spec = GridSpec(
        x0=float(g.get("x0", xmin)),
        x1=float(g.get("x1", xmax)),
        nx=int(g.get("nx", 200)),
        y0=float(g.get("y0", ymin)),
        y1=float(g.get("y1", ymax)),
        ny=int(g.get("ny", 200)),
    )
    return int(o.get("keyframe", -1)), spec


def cmd_oracle_check(scn: Scenario, out: Path, oracle_cfg: dict | None) -> int:
    if not scn.world.landmarks:
        raise TeachDegenerateError("world has no landmarks to build a funnel lane from")
    kf_index, grid = _oracle_grid(scn, oracle_cfg)
    path = _teach_path(scn)
    kf = path.keyframes[kf_index]
    oracle = funnel_oracle(kf, scn.world, scn.camera, grid)
    claimed = controller_inside_grid(kf, scn.world, scn.camera, grid)
    poses = grid_poses(grid, kf.pose_truth.theta)
    n = len(oracle)
    disagree = [i for i in range(n) if oracle[i] != claimed[i]]
    agreement = 1.0 - len(disagree) / n
    rows = ["x,y,oracle,controller"]
    for i in disagree:
        rows.append(f"{poses[i].x!r},{poses[i].y!r},{int(oracle[i])},{int(claimed[i])}")
    (out / "disagreements.csv").write_text("\n".join(rows) + "\n")
    summary = {
        "keyframe": kf.index,
        "grid": [grid.nx, grid.ny],
        "agreement": agreement,
        "n_disagreements": len(disagree),
        "n_inside_oracle": sum(oracle),
    }
    (out / "agreement.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    print(f"agreement: {100.0 * agreement:.3f}% ({len(disagree)} / {n} disagreements)")
    return 0


def cmd_metrics(scn: Scenario, out: Path) -> int:
    """Recompute endpoint metrics from previously written run traces."""
    path = _teach_path(scn)
    goal = (path.keyframes[-1].pose_truth.x, path.keyframes[-1].pose_truth.y)
    found = False
    for sub in sorted(out.iterdir()):
        if not sub.is_dir():
            continue
        runs = sorted(sub.glob("run_*.jsonl"))
        if not runs:
            continue
        found = True
        points, outcomes = [], {}
        for f in runs:
            last = json.loads(f.read_text().strip().splitlines()[-1])
            points.append((last["final_x"], last["final_y"]))
            outcomes[last["outcome"]] = outcomes.get(last["outcome"], 0) + 1
        print(
            f"{sub.name:>10}  acc {accuracy(points, goal):7.3f} m"
            f"  rep {repeatability(points):7.3f} m  outcomes {dict(sorted(outcomes.items()))}"
        )
    if not found:
        raise ConfigError(f"no run traces found under {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="funnelnav", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("teach", "repeat", "compare", "oracle-check", "metrics"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario YAML file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--controller", choices=("standard", "sloped"), default=None)
        p.add_argument("--force", action="store_true", help="allow writing into a non-empty directory")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        scn = load_scenario(args.config)
        scn = _apply_overrides(scn, args)
        if args.command == "metrics":
            out = Path(args.out)
            if not out.is_dir():
                raise ConfigError(f"output directory {args.out} does not exist")
        else:
            out = _prepare_out(args.out, args.force)
            _write_meta(out, args, scn.name)
        if args.command == "teach":
            return cmd_teach(scn, out)
        if args.command == "repeat":
            return cmd_repeat(scn, out)
        if args.command == "compare":
            return cmd_compare(scn, out)
        if args.command == "oracle-check":
            import yaml

            with open(args.config) as fh:
                raw = yaml.safe_load(fh)
            return cmd_oracle_check(scn, out, raw.get("oracle"))
        return cmd_metrics(scn, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (TeachDegenerateError, InvalidPathError) as e:
        print(f"degenerate input: {e}", file=sys.stderr)
        return 3
    except FunnelNavError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

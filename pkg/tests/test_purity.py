"""Controllers must act on image measurements only, never on world state."""

import inspect

import funnelnav.control_sloped as sloped
import funnelnav.control_standard as standard


def test_controllers_never_touch_ground_truth():
    for module in (standard, sloped):
        src = inspect.getsource(module)
        for forbidden in ("pose_truth", "visible_set", "World", "Landmark", "project"):
            assert forbidden not in src, f"{module.__name__} references {forbidden}"


def test_controllers_import_only_image_side_types():
    for module in (standard, sloped):
        src = inspect.getsource(module)
        geometry_imports = [
            line
            for line in src.splitlines()
            if line.startswith("from .geometry import")
        ]
        assert geometry_imports == ["from .geometry import MotionCommand"]

"""Limit-cycle certification for piecewise-affine (Glass) gene network models."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AssumptionViolation,
    AutoregulationError,
    GlassError,
    ModelError,
    OnThresholdError,
)
from .graph import (  # noqa: E402
    Cycle,
    TransitionGraph,
    build_graph,
    classify_wall,
    cycle_from_domains,
    cycle_properties,
    export_dot,
    find_deterministic_cycles,
)
from .model import Network, domain_of, focal_point, load_network, parse_network, validate  # noqa: E402
from .return_map import certify, fixed_point, poincare_map, zone_signs  # noqa: E402
from .simulate import detect_limit_cycle, oracle_integrate, run, sample  # noqa: E402
from .tolerances import DEFAULT, Tolerances  # noqa: E402

FIXTURES = ("two_negative_loops", "complex_graph", "multiple_thresholds", "negative_loop_2d")


def fixture_path(name: str) -> Path:
    """Path of a bundled model file, by stem (e.g. ``"two_negative_loops"``)."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    return Path(str(resources.files(__name__) / "fixtures" / f"{name}.json"))


def load_fixture(name: str) -> Network:
    return load_network(fixture_path(name))


__all__ = [
    "AssumptionViolation", "AutoregulationError", "Cycle", "DEFAULT", "FIXTURES", "GlassError",
    "ModelError", "Network", "OnThresholdError", "Tolerances", "TransitionGraph", "build_graph",
    "certify", "classify_wall", "cycle_from_domains", "cycle_properties", "detect_limit_cycle",
    "domain_of", "export_dot", "find_deterministic_cycles", "fixed_point", "fixture_path",
    "focal_point", "load_fixture", "load_network", "oracle_integrate", "parse_network",
    "poincare_map", "run", "sample", "validate", "zone_signs", "__version__",
]

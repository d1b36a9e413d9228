"""Numerical tolerances shared across modules."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

ENV_VAR = "GLASSCERT_TOLERANCE"


@dataclass(frozen=True)
class Tolerances:
    genericity: float = 1e-9      # relative distance of a focal coordinate to a threshold
    threshold: float = 1e-12      # absolute, for domain_of
    tie: float = 1e-12            # relative, between competing exit times
    denominator: float = 1e-12    # relative to the threshold scale, for |phi_s - x_s|
    alignment: float = 1e-12      # relative, focal coordinate equality
    spectral_margin: float = 1e-9
    fixed_point: float = 1e-12
    max_iterations: int = 100_000
    wall_slack: float = 1e-9      # bound checks on images of wall points
    singular_approach: float = 1e-5  # max-norm distance that counts as reaching a codim-2 set

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT = Tolerances()


def from_env(base: Tolerances = DEFAULT, value: str | None = None) -> Tolerances:
    """Apply overrides from ``GLASSCERT_TOLERANCE``.

    The variable holds either a bare number, which sets the fixed-point
    tolerance, or comma separated ``name=value`` pairs using the field names
    of :class:`Tolerances`.
    """
    if value is None:
        value = os.environ.get(ENV_VAR, "")
    value = value.strip()
    if not value:
        return base
    fields = {f.name: f.type for f in dataclasses.fields(Tolerances)}
    changes: dict[str, float | int] = {}
    for item in value.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            changes["fixed_point"] = float(item)
            continue
        key, raw = (s.strip() for s in item.split("=", 1))
        if key not in fields:
            raise ValueError(f"unknown tolerance {key!r} in {ENV_VAR}")
        changes[key] = int(float(raw)) if key == "max_iterations" else float(raw)
    return base.replace(**changes)

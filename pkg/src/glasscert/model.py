"""Piecewise-affine (Glass) gene network models.

A network is ``dx/dt = kappa(x) - Gamma x`` where each production rate
``kappa_i`` is a nonnegative combination of products of step functions and
``Gamma`` is diagonal. Regular domains are addressed by 0-based integer
tuples: coordinate ``a_i`` means ``x_i`` lies between the ``a_i``-th and
``(a_i + 1)``-th entries of ``[0, theta_i^1, ..., theta_i^{q_i-1}, upper]``.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import AutoregulationError, ModelError, OnThresholdError
from .tolerances import DEFAULT, Tolerances

DomainIndex = tuple[int, ...]


@dataclass(frozen=True)
class StepLiteral:
    """``s^+(x_var, theta_var^rank)`` or its complement ``s^-``."""

    variable: int
    threshold_rank: int  # 1-based, interior thresholds only
    sign: int            # +1 activation, -1 inhibition

    def value(self, a: DomainIndex) -> int:
        # s^+ is on iff x_var is above theta^rank, i.e. rank <= a_var
        on = self.threshold_rank <= a[self.variable]
        return int(on) if self.sign > 0 else int(not on)


@dataclass(frozen=True)
class ProductionTerm:
    rate: float
    literals: tuple[StepLiteral, ...] = ()

    def value(self, a: DomainIndex) -> float:
        for lit in self.literals:
            if not lit.value(a):
                return 0.0
        return self.rate


@dataclass(frozen=True)
class VariableSpec:
    name: str
    thresholds: tuple[float, ...]
    upper_bound: float
    gamma: float
    production: tuple[ProductionTerm, ...] = ()

    @property
    def q(self) -> int:
        """Number of regular segments along this axis."""
        return len(self.thresholds) + 1

    @property
    def levels(self) -> tuple[float, ...]:
        """``(0, theta^1, ..., theta^{q-1}, upper_bound)``."""
        return (0.0, *self.thresholds, self.upper_bound)


@dataclass(frozen=True)
class Network:
    variables: tuple[VariableSpec, ...]
    allow_autoregulation: bool = False

    def __post_init__(self):
        _check_network(self)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(v.q for v in self.variables)

    @cached_property
    def gamma(self) -> np.ndarray:
        g = np.array([v.gamma for v in self.variables], dtype=float)
        g.setflags(write=False)
        return g

    @cached_property
    def upper_bounds(self) -> np.ndarray:
        u = np.array([v.upper_bound for v in self.variables], dtype=float)
        u.setflags(write=False)
        return u

    def domains(self) -> Iterator[DomainIndex]:
        """All regular domains in lexicographic order."""
        return itertools.product(*(range(q) for q in self.shape))

    def is_valid_domain(self, a: Sequence[int]) -> bool:
        return len(a) == self.n and all(0 <= ai < q for ai, q in zip(a, self.shape))

    @cached_property
    def _focal_cache(self) -> dict:
        return {}

    def focal(self, a: DomainIndex) -> np.ndarray:
        """Cached read-only focal point of domain ``a``."""
        a = tuple(a)
        cache = self._focal_cache
        phi = cache.get(a)
        if phi is None:
            phi = np.asarray(kappa(self, a)) / self.gamma
            phi.setflags(write=False)
            cache[a] = phi
        return phi

    def lower(self, a: DomainIndex, i: int) -> float:
        return self.variables[i].levels[a[i]]

    def upper(self, a: DomainIndex, i: int) -> float:
        return self.variables[i].levels[a[i] + 1]

    def to_dict(self) -> dict:
        out = {"variables": [_variable_to_dict(v, self) for v in self.variables]}
        if self.allow_autoregulation:
            out["allow_autoregulation"] = True
        return out

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def label(a: Sequence[int]) -> str:
    """Digit-string label of a domain, e.g. ``(0, 1, 1) -> "011"``."""
    if all(0 <= ai < 10 for ai in a):
        return "".join(str(ai) for ai in a)
    return ".".join(str(ai) for ai in a)


def parse_label(text: str, n: int) -> DomainIndex:
    text = text.strip()
    parts = text.split(".") if "." in text else list(text)
    if len(parts) != n or not all(p.isdigit() for p in parts):
        raise ModelError(f"bad domain label {text!r} for a {n}-variable network")
    return tuple(int(p) for p in parts)


def _check_network(net: Network) -> None:
    if not net.variables:
        raise ModelError("network has no variables")
    names = [v.name for v in net.variables]
    dupes = sorted({x for x in names if names.count(x) > 1})
    if dupes:
        raise ModelError(f"duplicate variable names: {', '.join(dupes)}")
    for i, v in enumerate(net.variables):
        if not v.gamma > 0:
            raise ModelError(f"variable '{v.name}': gamma must be positive")
        lv = v.levels
        if any(b <= a for a, b in zip(lv, lv[1:])):
            raise ModelError(f"variable '{v.name}': non-increasing thresholds {list(lv[1:])}")
        for term in v.production:
            if not term.rate >= 0:
                raise ModelError(f"variable '{v.name}': negative production rate {term.rate}")
            seen = set()
            for lit in term.literals:
                if not 0 <= lit.variable < net.n:
                    raise ModelError(f"variable '{v.name}': literal on unknown variable {lit.variable}")
                q = net.variables[lit.variable].q
                if not 1 <= lit.threshold_rank <= q - 1:
                    raise ModelError(
                        f"variable '{v.name}': rank {lit.threshold_rank} out of range for "
                        f"'{net.variables[lit.variable].name}' (1..{q - 1})"
                    )
                if lit.sign not in (1, -1):
                    raise ModelError(f"variable '{v.name}': literal sign must be +1 or -1")
                key = (lit.variable, lit.threshold_rank)
                if key in seen:
                    raise ModelError(f"variable '{v.name}': repeated literal in one production term")
                seen.add(key)
                if lit.variable == i and not net.allow_autoregulation:
                    raise AutoregulationError(v.name)


def _variable_to_dict(v: VariableSpec, net: Network) -> dict:
    return {
        "name": v.name,
        "thresholds": list(v.thresholds),
        "upper_bound": v.upper_bound,
        "gamma": v.gamma,
        "production": [
            {
                "rate": t.rate,
                "when": [
                    {"var": net.variables[lit.variable].name,
                     "sign": "+" if lit.sign > 0 else "-",
                     "rank": lit.threshold_rank}
                    for lit in t.literals
                ],
            }
            for t in v.production
        ],
    }


def _number(obj, what: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ModelError(f"{what} must be a number, got {obj!r}")
    return float(obj)


def network_from_dict(data: dict) -> Network:
    if not isinstance(data, dict) or not isinstance(data.get("variables"), list):
        raise ModelError("model must be an object with a 'variables' list")
    raw_vars = data["variables"]
    index = {}
    for i, rv in enumerate(raw_vars):
        if not isinstance(rv, dict) or not isinstance(rv.get("name"), str) or not rv["name"]:
            raise ModelError(f"variable #{i}: missing 'name'")
        if rv["name"] in index:
            raise ModelError(f"duplicate variable names: {rv['name']}")
        index[rv["name"]] = i

    variables = []
    for rv in raw_vars:
        name = rv["name"]
        for key in ("thresholds", "upper_bound", "gamma"):
            if key not in rv:
                raise ModelError(f"variable '{name}': missing '{key}'")
        if not isinstance(rv["thresholds"], list):
            raise ModelError(f"variable '{name}': 'thresholds' must be a list")
        thresholds = tuple(_number(t, f"variable '{name}' threshold") for t in rv["thresholds"])
        terms = []
        for rt in rv.get("production", []):
            if not isinstance(rt, dict) or "rate" not in rt:
                raise ModelError(f"variable '{name}': production term needs a 'rate'")
            lits = []
            for rl in rt.get("when", []):
                if not isinstance(rl, dict) or rl.get("var") not in index:
                    raise ModelError(f"variable '{name}': literal refers to unknown variable {rl!r}")
                if rl.get("sign") not in ("+", "-"):
                    raise ModelError(f"variable '{name}': literal sign must be '+' or '-'")
                rank = rl.get("rank", 1)
                if isinstance(rank, bool) or not isinstance(rank, int):
                    raise ModelError(f"variable '{name}': literal rank must be an integer")
                lits.append(StepLiteral(index[rl["var"]], rank, 1 if rl["sign"] == "+" else -1))
            terms.append(ProductionTerm(_number(rt["rate"], f"variable '{name}' rate"), tuple(lits)))
        variables.append(
            VariableSpec(
                name=name,
                thresholds=thresholds,
                upper_bound=_number(rv["upper_bound"], f"variable '{name}' upper_bound"),
                gamma=_number(rv["gamma"], f"variable '{name}' gamma"),
                production=tuple(terms),
            )
        )
    return Network(tuple(variables), allow_autoregulation=bool(data.get("allow_autoregulation", False)))


def parse_network(text: str) -> Network:
    """Parse and validate a JSON model file."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file is not valid JSON: {exc}") from None
    return network_from_dict(data)


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def kappa(net: Network, a: Sequence[int]) -> list[float]:
    """Production rates in regular domain ``a``."""
    a = tuple(a)
    if not net.is_valid_domain(a):
        raise ModelError(f"invalid domain {a} for shape {net.shape}")
    return [float(sum(t.value(a) for t in v.production)) for v in net.variables]


def focal_point(net: Network, a: Sequence[int]) -> np.ndarray:
    return np.array(net.focal(tuple(a)))


@dataclass
class DomainFinding:
    domain: DomainIndex
    focal: list[float]
    generic: list[bool]
    in_box: list[bool]

    @property
    def ok(self) -> bool:
        return all(self.generic) and all(self.in_box)


@dataclass
class ValidationReport:
    domains: list[DomainFinding] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(d.ok for d in self.domains)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "messages": list(self.messages),
            "domains": [
                {
                    "domain": label(d.domain),
                    "focal_point": list(d.focal),
                    "generic": list(d.generic),
                    "in_box": list(d.in_box),
                }
                for d in self.domains
            ],
        }

    def to_text(self) -> str:
        lines = [f"{'ok' if self.ok else 'NOT OK'}: {len(self.domains)} regular domains checked"]
        lines.extend(f"  {m}" for m in self.messages)
        return "\n".join(lines)


def validate(net: Network, tol: Tolerances = DEFAULT) -> ValidationReport:
    """Check that no focal point sits on a threshold and that the box is invariant."""
    report = ValidationReport()
    for a in net.domains():
        phi = net.focal(a)
        generic, in_box = [], []
        for i, v in enumerate(net.variables):
            bad = [t for t in v.thresholds if abs(phi[i] - t) <= tol.genericity * abs(t)]
            generic.append(not bad)
            if bad:
                report.messages.append(
                    f"domain {label(a)}: focal point on threshold ({v.name} = {phi[i]!r})"
                )
            inside = 0.0 <= phi[i] <= v.upper_bound
            in_box.append(inside)
            if not inside:
                report.messages.append(
                    f"domain {label(a)}: focal coordinate {v.name} = {phi[i]!r} exceeds upper bound {v.upper_bound!r}"
                )
        report.domains.append(DomainFinding(a, [float(p) for p in phi], generic, in_box))
    return report


def domain_of(net: Network, x: Sequence[float], tol: Tolerances = DEFAULT) -> DomainIndex:
    """Regular domain containing the state ``x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n,):
        raise ModelError(f"state has {x.size} coordinates, network has {net.n}")
    a = []
    for i, v in enumerate(net.variables):
        xi = x[i]
        if not 0.0 <= xi <= v.upper_bound:
            raise ModelError(f"state coordinate {v.name} = {xi!r} outside [0, {v.upper_bound!r}]")
        for t in v.thresholds:
            if abs(xi - t) <= tol.threshold:
                raise OnThresholdError(i, float(xi))
        a.append(int(np.searchsorted(v.thresholds, xi)))
    return tuple(a)

"""First-return map of a deterministic cycle and the limit-cycle certificate.

Along a cycle ``a^0 ... a^{l-1}`` the flow maps wall ``W^{i-1}`` (the exit
wall of ``a^{i-1}``) to ``W^i`` through domain ``a^i``. Composing the ``l``
local maps gives the return map on ``W^0``. When consecutive focal points are
aligned and every variable switches, the return map is monotone and concave
on a single zone of ``W^0`` after reflecting coordinates, and the spectral
radius of its differential at the zone corner decides between convergence to
the corner and a unique attracting periodic orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import flow
from .errors import AssumptionViolation, ConvergenceError, OrbitLeftCycleError
from .graph import Cycle, CycleProperties, cycle_properties
from .model import Network
from .tolerances import DEFAULT, Tolerances

UNIQUE_LIMIT_CYCLE = "unique-limit-cycle"
CONVERGES_TO_CORNER = "converges-to-corner"


# -- orbit machinery ---------------------------------------------------------

def _steps(c: Cycle):
    """Yield ``(domain, s_prev, s, theta, step)`` for local maps 1..l."""
    ell = len(c)
    for i in range(1, ell + 1):
        k = i % ell
        yield c.domains[k], c.directions[i - 1], c.directions[k], c.thresholds[k], k


def _as_wall_point(net: Network, c: Cycle, x: Sequence[float]) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    s0 = c.directions[0]
    if x.shape == (net.n - 1,):
        x = np.insert(x, s0, c.thresholds[0])
    elif x.shape == (net.n,):
        x = x.copy()
        x[s0] = c.thresholds[0]
    else:
        raise ValueError(f"expected {net.n - 1} free or {net.n} full coordinates, got {x.shape}")
    return x


def _check_on_wall(c: Cycle, k: int, y: np.ndarray, slack: float) -> None:
    for j, (lo, hi) in enumerate(c.wall_bounds[k]):
        if not lo - slack <= y[j] <= hi + slack:
            raise OrbitLeftCycleError(
                f"image on wall {k} has x[{j}] = {y[j]!r} outside [{lo!r}, {hi!r}]"
            )


def cycle_orbit(net: Network, c: Cycle, x: Sequence[float],
                tol: Tolerances = DEFAULT) -> list[np.ndarray]:
    """Points ``x^0, x^1, ..., x^l`` of the orbit of ``x`` around the cycle."""
    pts = [_as_wall_point(net, c, x)]
    _check_on_wall(c, 0, pts[0], tol.wall_slack)
    for a, _, s, theta, k in _steps(c):
        y = flow.local_transition(net, a, pts[-1], s, theta, tol).x
        _check_on_wall(c, k, y, tol.wall_slack)
        pts.append(y)
    return pts


def poincare_map(net: Network, c: Cycle, x: Sequence[float],
                 tol: Tolerances = DEFAULT) -> np.ndarray:
    """Return map on ``W^0``; accepts and returns full state vectors."""
    return cycle_orbit(net, c, x, tol)[-1]


def return_time(net: Network, c: Cycle, x: Sequence[float], tol: Tolerances = DEFAULT) -> float:
    """Time taken by the flow to go once around the cycle from ``x``."""
    total = 0.0
    pts = cycle_orbit(net, c, x, tol)
    for (a, _, s, theta, _), p in zip(_steps(c), pts):
        total += flow._escape_time(net.focal(a)[s], theta, p[s], net.gamma[s])
    return total


def return_jacobian(net: Network, c: Cycle, x: Sequence[float],
                    tol: Tolerances = DEFAULT) -> np.ndarray:
    """Differential of the return map over the free coordinates of ``W^0``."""
    pts = cycle_orbit(net, c, x, tol)
    jac = np.eye(net.n - 1)
    for (a, sp, s, theta, _), p in zip(_steps(c), pts):
        jac = flow.local_jacobian(net, a, sp, s, theta, p, tol) @ jac
    return jac


def return_hessian(net: Network, c: Cycle, x: Sequence[float],
                   tol: Tolerances = DEFAULT) -> tuple[np.ndarray, np.ndarray]:
    """``(J, H)`` of the return map with ``H[k, m, j] = d2 T_k / dx_m dx_j``."""
    pts = cycle_orbit(net, c, x, tol)
    m = net.n - 1
    jac = np.eye(m)
    hess = np.zeros((m, m, m))
    for (a, sp, s, theta, _), p in zip(_steps(c), pts):
        jl = flow.local_jacobian(net, a, sp, s, theta, p, tol)
        hl = flow.local_second_derivatives(net, a, sp, s, theta, p, tol)
        hess = np.einsum("kpq,pa,qb->kab", hl, jac, jac) + np.einsum("kp,pab->kab", jl, hess)
        jac = jl @ jac
    return jac, hess


# -- zones -------------------------------------------------------------------

@dataclass(frozen=True)
class ZoneSigns:
    """Per wall ``i``, the full-length sign vector ``sign(phi^i - x)``.

    The entry at the wall's own direction ``s_i`` is ``eps_i``; the zone sign
    vector proper excludes it (see :meth:`sigma`).
    """

    delta: tuple[tuple[int, ...], ...]
    directions: tuple[int, ...]

    def sigma(self, i: int) -> np.ndarray:
        return np.delete(np.array(self.delta[i], dtype=float), self.directions[i])

    def to_dict(self) -> list[list[int]]:
        return [list(np.delete(np.array(d), s).tolist()) for d, s in zip(self.delta, self.directions)]


def _delta_passes(net: Network, c: Cycle, passes: int) -> list[list[tuple]]:
    ell = len(c)
    known: list[int | None] = [None] * net.n
    history = []
    for p in range(passes):
        record = []
        for i in range(ell):
            if i > 0 or p > 0:
                prev = (i - 1) % ell
                sp = c.directions[prev]
                if sp != c.directions[i]:
                    known[sp] = int(np.sign(net.focal(c.domains[i])[sp] - c.thresholds[prev]))
            known[c.directions[i]] = c.signs[i]
            record.append(tuple(known))
        history.append(record)
    return history


def zone_signs(net: Network, c: Cycle) -> ZoneSigns:
    """Sign vectors of the invariant zones, by propagating signs around the cycle."""
    last = _delta_passes(net, c, 2)[-1]
    missing = sorted({j for rec in last for j, v in enumerate(rec) if v is None})
    if missing:
        names = ", ".join(net.variables[j].name for j in missing)
        raise AssumptionViolation(f"assumption violated: not all variables switch ({names} never do)")
    return ZoneSigns(tuple(last), c.directions)


def corner_and_apex(net: Network, c: Cycle, z: ZoneSigns) -> tuple[np.ndarray, np.ndarray]:
    """Zone corner on ``W^0`` (full vector) and the zone extent ``p`` (free coords)."""
    s0 = c.directions[0]
    corner = np.empty(net.n)
    for j, (lo, hi) in enumerate(c.wall_bounds[0]):
        if j == s0:
            corner[j] = c.thresholds[0]
        else:
            corner[j] = lo if z.delta[0][j] > 0 else hi
    phi0 = net.focal(c.domains[0])
    apex = np.abs(np.delete(phi0 - corner, s0))
    return corner, apex


@dataclass(frozen=True)
class ZoneFrame:
    """Reflected, translated coordinates in which the zone is ``[0, p]``."""

    corner: np.ndarray
    apex: np.ndarray
    sigma: np.ndarray
    s0: int

    def to_z(self, x: np.ndarray) -> np.ndarray:
        return self.sigma * (np.delete(x, self.s0) - np.delete(self.corner, self.s0))

    def from_z(self, zc: np.ndarray) -> np.ndarray:
        free = np.delete(self.corner, self.s0) + self.sigma * zc
        return np.insert(free, self.s0, self.corner[self.s0])

    def jac(self, j: np.ndarray) -> np.ndarray:
        return self.sigma[:, None] * j * self.sigma[None, :]

    def hess(self, h: np.ndarray) -> np.ndarray:
        s = self.sigma
        return s[:, None, None] * s[None, :, None] * s[None, None, :] * h


def zone_frame(net: Network, c: Cycle, z: ZoneSigns | None = None) -> ZoneFrame:
    z = z or zone_signs(net, c)
    corner, apex = corner_and_apex(net, c, z)
    return ZoneFrame(corner, apex, z.sigma(0), c.directions[0])


# -- spectral radius -----------------------------------------------------------

def spectral_radius(m: np.ndarray, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Largest eigenvalue magnitude.

    Small matrices use a direct eigenvalue solve; larger ones use power
    iteration, falling back to the direct solve when two dominant
    eigenvalues share a modulus and the iteration stalls.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("spectral_radius needs a square matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if m.shape[0] <= 3:
        return float(np.max(np.abs(np.linalg.eigvals(m))))
    v = np.ones(m.shape[0]) + np.linspace(0.0, 0.1, m.shape[0])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = m @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return float(np.max(np.abs(np.linalg.eigvals(m))))
        rayleigh = abs(v @ w)
        w /= norm
        if abs(norm - est) <= tol * norm and abs(rayleigh - norm) <= math.sqrt(tol) * norm:
            return float(norm)
        est, v = norm, w
    return float(np.max(np.abs(np.linalg.eigvals(m))))


# -- hypotheses of the fixed-point theorem ------------------------------------

@dataclass
class ConditionReport:
    monotone_ok: bool
    concave_ok: bool
    second_order_ok: bool
    Tp_lt_p: bool
    samples: int
    counterexamples: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "monotone_ok": self.monotone_ok,
            "concave_ok": self.concave_ok,
            "second_order_ok": self.second_order_ok,
            "Tp_lt_p": self.Tp_lt_p,
            "samples": self.samples,
            "counterexamples": {k: [float(v) for v in pt] for k, pt in self.counterexamples.items()},
        }


def _interior_sample(rng: np.random.Generator, size: int) -> np.ndarray:
    # uniform on the open interval (0, 1)
    u = rng.random(size)
    return np.where(u == 0.0, 0.5, u)


def condition_checks(net: Network, c: Cycle, z: ZoneSigns | None = None, samples: int = 200,
                     seed: int = 0, tol: Tolerances = DEFAULT,
                     frame: ZoneFrame | None = None) -> ConditionReport:
    """Sample the monotonicity, concavity and ``T(p) < p`` hypotheses on the zone."""
    frame = frame or zone_frame(net, c, z)
    rng = np.random.default_rng(seed)
    p = frame.apex
    m = net.n - 1
    cex: dict[str, np.ndarray] = {}
    monotone = second = True
    for _ in range(samples):
        zc = _interior_sample(rng, m) * p
        x = frame.from_z(zc)
        jac, hess = return_hessian(net, c, x, tol)
        jz, hz = frame.jac(jac), frame.hess(hess)
        if monotone and not np.all(jz > 0):
            monotone = False
            cex["monotone"] = zc
        scale = max(np.max(np.abs(hz)), 1.0)
        if second and np.any(hz > 1e-10 * scale):
            second = False
            cex["second_order"] = zc
    concave = True
    for _ in range(samples):
        zx = _interior_sample(rng, m) * p
        zy = zx + _interior_sample(rng, m) * (p - zx)
        jx = frame.jac(return_jacobian(net, c, frame.from_z(zx), tol))
        jy = frame.jac(return_jacobian(net, c, frame.from_z(zy), tol))
        slack = 1e-12 * max(np.max(np.abs(jx)), 1.0)
        if not (np.all(jy <= jx + slack) and np.any(jy < jx)):
            concave = False
            cex["concave"] = np.concatenate([zx, zy])
            break
    top = frame.to_z(poincare_map(net, c, frame.from_z(p), tol))
    tp_lt_p = bool(np.all(top < p))
    if not tp_lt_p:
        cex["Tp_lt_p"] = top
    return ConditionReport(monotone, concave, second, tp_lt_p, samples, cex)


# -- certification -----------------------------------------------------------

@dataclass
class ReturnMapAnalysis:
    cycle: Cycle
    properties: CycleProperties
    zones: ZoneSigns
    corner: np.ndarray
    apex: np.ndarray
    corner_image: np.ndarray
    jacobian_at_corner: np.ndarray
    lam: float
    verdict: str
    branch: str
    lambda_at_margin: bool
    checks: ConditionReport
    fixed_point: np.ndarray | None = None
    iterations: int | None = None
    period: float | None = None
    floquet_multipliers: list[float] | None = None
    zone_margin: float | None = None
    tolerances: Tolerances = DEFAULT

    def to_dict(self) -> dict:
        def vec(v):
            return None if v is None else [float(t) for t in v]

        return {
            "cycle": self.cycle.to_dict(),
            "properties": self.properties.to_dict(),
            "sigma": self.zones.to_dict(),
            "corner": vec(self.corner),
            "corner_image": vec(self.corner_image),
            "apex": vec(self.apex),
            "jacobian_at_corner": [vec(r) for r in self.jacobian_at_corner],
            "lambda": float(self.lam),
            "lambda_at_margin": self.lambda_at_margin,
            "verdict": self.verdict,
            "branch": self.branch,
            "fixed_point": vec(self.fixed_point),
            "iterations": self.iterations,
            "period": None if self.period is None else float(self.period),
            "floquet_multipliers": vec(self.floquet_multipliers),
            "zone_margin": None if self.zone_margin is None else float(self.zone_margin),
            "checks": self.checks.to_dict(),
            "tolerances": self.tolerances.as_dict(),
        }


def fixed_point(net: Network, c: Cycle, tol: float | None = None,
                start: Sequence[float] | None = None,
                tolerances: Tolerances = DEFAULT,
                frame: ZoneFrame | None = None) -> tuple[np.ndarray, int]:
    """Iterate the return map to its attracting fixed point.

    Starts from the middle of the zone unless ``start`` is given, stops when
    successive iterates differ by less than ``tol`` in max norm, then applies
    one Newton step if it lowers the residual.
    """
    tol = tolerances.fixed_point if tol is None else tol
    if start is None:
        frame = frame or zone_frame(net, c)
        x = frame.from_z(frame.apex / 2.0)
    else:
        x = _as_wall_point(net, c, start)
    s0 = c.directions[0]
    for it in range(1, tolerances.max_iterations + 1):
        y = poincare_map(net, c, x, tolerances)
        step = np.max(np.abs(y - x))
        x = y
        if step < tol:
            break
    else:
        raise ConvergenceError(f"max iterations exceeded ({tolerances.max_iterations}) without reaching tol={tol}")
    residual = np.delete(poincare_map(net, c, x, tolerances) - x, s0)
    jac = return_jacobian(net, c, x, tolerances)
    try:
        delta = np.linalg.solve(jac - np.eye(net.n - 1), -residual)
    except np.linalg.LinAlgError:
        return x, it
    cand = x.copy()
    cand[np.arange(net.n) != s0] += delta
    try:
        new_res = np.delete(poincare_map(net, c, cand, tolerances) - cand, s0)
    except OrbitLeftCycleError:
        return x, it
    if np.max(np.abs(new_res)) < np.max(np.abs(residual)):
        x = cand
    return x, it


def certify(net: Network, c: Cycle, tol: Tolerances = DEFAULT, samples: int = 200,
            seed: int = 0) -> ReturnMapAnalysis:
    """Decide the fate of orbits around ``c`` and locate the limit cycle if any."""
    props = cycle_properties(net, c, tol)
    if not props.aligned:
        raise AssumptionViolation("assumption violated: alignment")
    if not props.all_switch:
        raise AssumptionViolation("assumption violated: not all variables switch")
    zones = zone_signs(net, c)
    frame = zone_frame(net, c, zones)
    corner = frame.corner
    corner_image = poincare_map(net, c, corner, tol)
    jac0 = return_jacobian(net, c, corner, tol)
    lam = spectral_radius(jac0)
    checks = condition_checks(net, c, zones, samples=samples, seed=seed, tol=tol, frame=frame)

    margin = False
    if props.parallel_thresholds:
        verdict, branch = UNIQUE_LIMIT_CYCLE, "parallel-thresholds"
    elif lam > 1.0 + tol.spectral_margin:
        verdict, branch = UNIQUE_LIMIT_CYCLE, "unstable-corner"
    else:
        verdict, branch = CONVERGES_TO_CORNER, "stable-corner"
        margin = abs(lam - 1.0) <= tol.spectral_margin

    analysis = ReturnMapAnalysis(
        cycle=c, properties=props, zones=zones, corner=corner, apex=frame.apex,
        corner_image=corner_image, jacobian_at_corner=jac0, lam=lam, verdict=verdict,
        branch=branch, lambda_at_margin=margin, checks=checks, tolerances=tol,
    )
    if verdict == UNIQUE_LIMIT_CYCLE:
        q, iterations = fixed_point(net, c, tolerances=tol, frame=frame)
        analysis.fixed_point = q
        analysis.iterations = iterations
        analysis.period = return_time(net, c, q, tol)
        analysis.floquet_multipliers = sorted(
            (float(v) for v in np.abs(np.linalg.eigvals(return_jacobian(net, c, q, tol)))), reverse=True
        )
        zq = frame.to_z(q)
        analysis.zone_margin = float(min(np.min(zq), np.min(frame.apex - zq)))
    return analysis

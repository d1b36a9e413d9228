"""Exact affine flow inside one regular domain.

In domain ``a`` every coordinate relaxes exponentially towards the focal
point ``phi``: ``x_i(t) = phi_i + exp(-gamma_i t) (x_i(0) - phi_i)``.
Exit times, wall-to-wall transition maps and their derivatives follow in
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InteriorEquilibriumError, SingularDomainError, WallNormalDegeneracyError
from .graph import exit_directions
from .model import DomainIndex, Network
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True)
class WallPoint:
    """A state on the hyperplane ``x[direction] == threshold``.

    ``domain`` is the regular domain the point exits; ``x`` is the full state
    vector with the pinned coordinate assigned exactly.
    """

    domain: DomainIndex
    direction: int
    threshold: float
    x: np.ndarray

    def free(self) -> np.ndarray:
        return np.delete(self.x, self.direction)


@dataclass(frozen=True)
class ExitEvent:
    tau: float
    direction: int
    sign: int
    point: WallPoint


def flow_at(net: Network, a: DomainIndex, x: Sequence[float], t: float) -> np.ndarray:
    phi = net.focal(a)
    x = np.asarray(x, dtype=float)
    decay = np.exp(-net.gamma * t)
    # zero elapsed time returns x bitwise, keeping event states exact
    return np.where(decay == 1.0, x, phi + decay * (x - phi))


def _escape_time(phi: float, theta: float, x: float, gamma: float) -> float:
    ratio = (phi - theta) / (phi - x)
    if ratio >= 1.0:
        return 0.0
    return float(-math.log(ratio) / gamma)


def exit_time(net: Network, a: DomainIndex, x: Sequence[float],
              tol: Tolerances = DEFAULT) -> ExitEvent:
    """First boundary crossing of the flow started at ``x`` in domain ``a``."""
    a = tuple(a)
    phi = net.focal(a)
    x = np.asarray(x, dtype=float)
    plus, minus = exit_directions(net, a)
    if not plus and not minus:
        raise InteriorEquilibriumError(f"domain {a} contains its focal point; no exit")
    times = []
    for i in sorted(plus | minus):
        sign = 1 if i in plus else -1
        theta = net.upper(a, i) if sign > 0 else net.lower(a, i)
        times.append((_escape_time(phi[i], theta, x[i], net.gamma[i]), i, sign, theta))
    times.sort()
    tau, i, sign, theta = times[0]
    if len(times) > 1:
        tau2 = times[1][0]
        if tau2 - tau <= tol.tie * max(tau, tau2):
            raise SingularDomainError(
                f"exit times tie in domain {a} (directions {i} and {times[1][1]}, tau={tau!r})"
            )
    y = flow_at(net, a, x, tau)
    y[i] = theta
    return ExitEvent(float(tau), i, sign, WallPoint(a, i, float(theta), y))


def alpha(net: Network, a: DomainIndex, s: int, theta: float, x_s: float) -> np.ndarray:
    """Contraction factors ``exp(-gamma_j tau)`` for exit through ``x_s = theta``."""
    phi_s = net.focal(a)[s]
    ratio = (phi_s - theta) / (phi_s - x_s)
    return ratio ** (net.gamma / net.gamma[s])


def local_transition(net: Network, a: DomainIndex, x: Sequence[float],
                     direction: int | None = None, theta: float | None = None,
                     tol: Tolerances = DEFAULT) -> WallPoint:
    """Map a point of an entry wall of ``a`` to where the flow leaves ``a``.

    With ``direction``/``theta`` omitted the realised exit is computed by
    :func:`exit_time`; inside a cycle they are the cycle's prescribed exit.
    """
    a = tuple(a)
    x = np.asarray(x, dtype=float)
    if direction is None:
        return exit_time(net, a, x, tol).point
    if theta is None:
        sign = 1 if net.focal(a)[direction] > x[direction] else -1
        theta = net.upper(a, direction) if sign > 0 else net.lower(a, direction)
    phi = net.focal(a)
    _check_denominator(phi[direction], x[direction], theta, tol)
    al = alpha(net, a, direction, theta, x[direction])
    y = phi + (x - phi) * al
    # a start already on the exit wall must come back bitwise unchanged
    y[al == 1.0] = x[al == 1.0]
    y[direction] = theta
    return WallPoint(a, direction, theta, y)


def _check_denominator(phi_s: float, x_s: float, theta: float, tol: Tolerances) -> None:
    if abs(phi_s - x_s) < tol.denominator * max(abs(theta), 1.0):
        raise WallNormalDegeneracyError(f"|phi_s - x_s| = {abs(phi_s - x_s)!r} is degenerate")


def local_jacobian(net: Network, a: DomainIndex, s_prev: int, s: int, theta: float,
                   x: Sequence[float], tol: Tolerances = DEFAULT) -> np.ndarray:
    """Derivative of the transition through ``a`` between wall coordinates.

    Rows are output coordinates ``k != s``, columns input coordinates
    ``j != s_prev`` (both in increasing order).
    """
    x = np.asarray(x, dtype=float)
    phi = net.focal(a)
    _check_denominator(phi[s], x[s], theta, tol)
    al = alpha(net, a, s, theta, x[s])
    r = net.gamma / net.gamma[s]
    full = np.diag(al)
    full[:, s] = -r * (phi - x) / (phi[s] - x[s]) * al
    full[s, s] = 0.0
    rows = [k for k in range(net.n) if k != s]
    cols = [j for j in range(net.n) if j != s_prev]
    return full[np.ix_(rows, cols)]


def local_second_derivatives(net: Network, a: DomainIndex, s_prev: int, s: int, theta: float,
                             x: Sequence[float], tol: Tolerances = DEFAULT) -> np.ndarray:
    """Array ``H[k, m, j] = d2 T_k / dx_m dx_j`` in the indexing of :func:`local_jacobian`."""
    x = np.asarray(x, dtype=float)
    phi = net.focal(a)
    _check_denominator(phi[s], x[s], theta, tol)
    al = alpha(net, a, s, theta, x[s])
    r = net.gamma / net.gamma[s]
    d = phi[s] - x[s]
    n = net.n
    full = np.zeros((n, n, n))
    for k in range(n):
        if k == s:
            continue
        full[k, s, k] = full[k, k, s] = r[k] * al[k] / d
        full[k, s, s] = -r[k] * (1.0 + r[k]) * (phi[k] - x[k]) / d**2 * al[k]
    rows = [k for k in range(n) if k != s]
    cols = [j for j in range(n) if j != s_prev]
    return full[np.ix_(rows, cols, cols)]

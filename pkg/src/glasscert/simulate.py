"""Event-driven trajectories and a fixed-step integration oracle."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import flow
from .errors import (
    InsufficientCrossingsError,
    InteriorEquilibriumError,
    ModelError,
    SingularDomainError,
)
from .model import DomainIndex, Network, domain_of, kappa, label
from .tolerances import DEFAULT, Tolerances

T_MAX = "t_max reached"
EQUILIBRIUM = "interior equilibrium reached"
SINGULAR = "singular-domain hit"
MAX_EVENTS = "max events"
BLACK_WALL = "black wall reached"


@dataclass(frozen=True)
class Event:
    time: float
    domain: DomainIndex
    state: np.ndarray


@dataclass
class Trajectory:
    """Entry events of an exact trajectory.

    With ``hold`` set the state is frozen after the last event (the orbit
    has closed in on a codimension-2 switching set and stays within
    ``singular_approach`` of it).
    """

    events: list[Event]
    terminal: str
    t_end: float
    final_state: np.ndarray
    hold: bool = False

    def domain_sequence(self) -> list[DomainIndex]:
        return [e.domain for e in self.events]

    def events_json(self) -> str:
        return json.dumps(
            [{"t": e.time, "domain": label(e.domain), "state": [float(v) for v in e.state]}
             for e in self.events],
            indent=1,
        )


def run(net: Network, x0: Sequence[float], t_max: float, max_events: int = 100_000,
        tol: Tolerances = DEFAULT) -> Trajectory:
    """Follow the exact flow from domain to domain until a terminal condition."""
    x = np.asarray(x0, dtype=float)
    a = domain_of(net, x, tol)
    t = 0.0
    events = [Event(0.0, a, x.copy())]
    t_max = float(t_max)
    terminal = T_MAX
    while True:
        try:
            ev = flow.exit_time(net, a, x, tol)
        except InteriorEquilibriumError:
            terminal = EQUILIBRIUM
            break
        except SingularDomainError:
            terminal = SINGULAR
            break
        if t + ev.tau > t_max:
            break
        i = ev.direction
        b = tuple(ai + ev.sign * (k == i) for k, ai in enumerate(a))
        if np.sign(net.focal(b)[i] - ev.point.threshold) != ev.sign:
            # the neighbour pushes back across the threshold: sliding mode
            t += ev.tau
            x = ev.point.x
            terminal = BLACK_WALL
            events.append(Event(t, a, x.copy()))
            return Trajectory(events, terminal, t, x.copy())
        t += ev.tau
        x = ev.point.x
        a = b
        events.append(Event(t, a, x.copy()))
        if _near_singular(net, x, tol.singular_approach):
            return Trajectory(events, SINGULAR, max(t_max, t), x.copy(), hold=True)
        if len(events) - 1 >= max_events:
            terminal = MAX_EVENTS
            return Trajectory(events, terminal, t, x.copy())
    last = events[-1]
    t_end = t_max if terminal in (T_MAX, EQUILIBRIUM) else t
    final = flow.flow_at(net, last.domain, last.state, t_end - last.time)
    return Trajectory(events, terminal, t_end, final)


def _near_singular(net: Network, x: np.ndarray, eps: float) -> bool:
    close = 0
    for i, v in enumerate(net.variables):
        if any(abs(x[i] - t) <= eps for t in v.thresholds):
            close += 1
    return close >= 2


def sample_times(t_end: float, dt: float) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    count = int(math.floor(t_end / dt + 1e-9))
    times = np.arange(count + 1) * dt
    if t_end - times[-1] > 1e-9 * max(dt, 1.0):
        times = np.append(times, t_end)
    return times


def sample(traj: Trajectory, net: Network, dt: float) -> list[tuple[float, np.ndarray]]:
    """States on a uniform time grid, from the exact per-domain flow."""
    times = sample_times(traj.t_end, dt)
    ev_t = np.array([e.time for e in traj.events])
    out = []
    for t in times:
        k = int(np.searchsorted(ev_t, t, side="right")) - 1
        e = traj.events[k]
        if t == e.time or (traj.hold and k == len(traj.events) - 1):
            out.append((float(t), e.state.copy()))
        else:
            out.append((float(t), flow.flow_at(net, e.domain, e.state, t - e.time)))
    return out


def state_at(traj: Trajectory, net: Network, t: float) -> np.ndarray:
    ev_t = [e.time for e in traj.events]
    k = int(np.searchsorted(ev_t, t, side="right")) - 1
    e = traj.events[k]
    if traj.hold and k == len(traj.events) - 1:
        return e.state.copy()
    return flow.flow_at(net, e.domain, e.state, t - e.time)


def samples_csv(samples: list[tuple[float, np.ndarray]], names: Sequence[str] | None = None) -> str:
    n = len(samples[0][1]) if samples else 0
    header = ["t", *(names or [f"x{i + 1}" for i in range(n)])]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for t, x in samples:
        w.writerow([f"{t:.17g}", *(f"{v:.17g}" for v in x)])
    return buf.getvalue()


@dataclass
class LimitCycleDetection:
    converged: bool
    crossing_times: list[float]
    crossing_points: list[np.ndarray]
    deltas: list[float] = field(default_factory=list)

    @property
    def limit(self) -> np.ndarray:
        return self.crossing_points[-1]


def detect_limit_cycle(traj: Trajectory, wall: tuple[DomainIndex, DomainIndex],
                       tol: float) -> LimitCycleDetection:
    """Successive crossings of the wall from ``wall[0]`` into ``wall[1]``."""
    src, dst = (tuple(w) for w in wall)
    times, points = [], []
    for prev, ev in zip(traj.events, traj.events[1:]):
        if prev.domain == src and ev.domain == dst:
            times.append(ev.time)
            points.append(ev.state)
    if len(points) < 3:
        raise InsufficientCrossingsError(
            f"insufficient crossings: {len(points)} crossing(s) of {label(src)} -> {label(dst)}"
        )
    deltas = [float(np.max(np.abs(b - a))) for a, b in zip(points, points[1:])]
    return LimitCycleDetection(deltas[-1] < tol, times, points, deltas)


# -- fixed-step oracle --------------------------------------------------------

@dataclass
class OracleResult:
    times: np.ndarray
    states: np.ndarray
    crossing_times: np.ndarray
    crossing_domains: list[DomainIndex]
    crossing_states: np.ndarray
    singular: bool = False


def oracle_integrate(net: Network, x0: Sequence[float], t_max: float, h: float = 1e-5,
                     sample_dt: float = 0.01, bisections: int = 50,
                     max_crossings: int = 100_000, tol: Tolerances = DEFAULT) -> OracleResult:
    """Classic RK4 on ``dx/dt = kappa(domain(x)) - gamma x`` with bisected switching.

    The production rate is frozen within a step; when a step lands in a new
    domain the switching instant is bisected and the step completed with the
    new rate. Only the domain-wise production table is shared with the exact
    solver, never its closed-form flow.
    """
    record_every = int(round(sample_dt / h))
    if record_every < 1 or abs(record_every * h - sample_dt) > 1e-9 * sample_dt:
        raise ValueError("sample_dt must be a whole multiple of h")
    nsteps = int(round(t_max / h))
    shape = net.shape
    strides = np.array([int(np.prod(shape[i + 1:])) for i in range(net.n)], dtype=np.int64)
    width = max(max(q - 1 for q in shape), 1)
    levels = np.full((net.n, width), np.inf)
    for i, v in enumerate(net.variables):
        levels[i, :len(v.thresholds)] = v.thresholds
    nthr = np.array([q - 1 for q in shape], dtype=np.int64)
    domains = list(net.domains())
    table = np.array([kappa(net, a) for a in domains], dtype=float)
    from ._oracle import oracle_kernel

    rec, ct, cd, cx, ncross, status = oracle_kernel(
        np.asarray(x0, dtype=float), levels, nthr, strides, table, np.array(net.gamma),
        nsteps, float(h), record_every, max_crossings, bisections, tol.singular_approach,
    )
    if status == 1:
        raise ModelError("oracle step landed exactly on a threshold; re-run with a perturbed h")
    ncross = min(ncross, max_crossings)
    times = np.arange(rec.shape[0]) * sample_dt
    return OracleResult(times, rec, ct[:ncross].copy(), [domains[k] for k in cd[:ncross]],
                        cx[:ncross].copy(), status == 2)

"""Discrete transition structure over regular domains."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import DomainIndex, Network, label
from .tolerances import DEFAULT, Tolerances

TRANSPARENT = "transparent"
BLACK = "black"
WHITE = "white"


@dataclass(frozen=True)
class WallClass:
    kind: str
    direction: int = 0  # +1/-1 crossing sign for transparent walls, 0 otherwise

    def __str__(self) -> str:
        if self.kind == TRANSPARENT:
            return f"transparent({'+' if self.direction > 0 else '-'})"
        return self.kind


@dataclass(frozen=True)
class Edge:
    source: DomainIndex
    target: DomainIndex
    direction: int
    sign: int


@dataclass(frozen=True)
class Wall:
    lower: DomainIndex   # the domain below the shared threshold
    direction: int
    threshold: float
    cls: WallClass

    @property
    def upper(self) -> DomainIndex:
        a = list(self.lower)
        a[self.direction] += 1
        return tuple(a)


@dataclass
class TransitionGraph:
    nodes: list[DomainIndex]
    edges: list[Edge]
    walls: list[Wall]
    exits: dict[DomainIndex, tuple[frozenset, frozenset]]
    equilibria: list[DomainIndex] = field(default_factory=list)
    net: Network | None = field(default=None, repr=False)

    def successors(self, a: DomainIndex) -> list[Edge]:
        return self._succ.get(a, [])

    def out_degree(self, a: DomainIndex) -> int:
        return len(self.successors(a))

    def is_deterministic(self, a: DomainIndex) -> bool:
        """Exactly one escaping direction, through a transparent wall."""
        plus, minus = self.exits[a]
        return len(plus) + len(minus) == 1 and self.out_degree(a) == 1

    def __post_init__(self):
        self._succ: dict[DomainIndex, list[Edge]] = {}
        for e in self.edges:
            self._succ.setdefault(e.source, []).append(e)

    def wall_counts(self) -> dict[str, int]:
        counts = {TRANSPARENT: 0, BLACK: 0, WHITE: 0}
        for w in self.walls:
            counts[w.cls.kind] += 1
        return counts

    def to_dict(self) -> dict:
        return {
            "nodes": [label(a) for a in self.nodes],
            "edges": [
                {"from": label(e.source), "to": label(e.target), "direction": e.direction, "sign": e.sign}
                for e in self.edges
            ],
            "walls": [
                {"lower": label(w.lower), "upper": label(w.upper), "direction": w.direction,
                 "threshold": w.threshold, "class": w.cls.kind, "sign": w.cls.direction}
                for w in self.walls
            ],
            "equilibria": [label(a) for a in self.equilibria],
        }


@dataclass(frozen=True)
class Cycle:
    """A periodic sequence of regular domains, each with a unique exit.

    Step ``i`` leaves ``domains[i]`` through the hyperplane
    ``x[directions[i]] == thresholds[i]`` in the sense ``signs[i]``; that
    hyperplane piece is wall ``W^i``.
    """

    domains: tuple[DomainIndex, ...]
    directions: tuple[int, ...]
    signs: tuple[int, ...]
    thresholds: tuple[float, ...]
    wall_bounds: tuple[tuple[tuple[float, float], ...], ...]  # per wall, per coordinate

    def __len__(self) -> int:
        return len(self.domains)

    @property
    def labels(self) -> list[str]:
        return [label(a) for a in self.domains]

    @property
    def key(self) -> str:
        return ",".join(self.labels)

    @property
    def id(self) -> str:
        return "c" + hashlib.sha1(self.key.encode()).hexdigest()[:8]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "domains": self.labels,
            "directions": list(self.directions),
            "signs": list(self.signs),
            "thresholds": list(self.thresholds),
        }


@dataclass(frozen=True)
class CycleProperties:
    aligned: bool
    all_switch: bool
    parallel_thresholds: bool
    switching_variables: frozenset

    def to_dict(self) -> dict:
        return {
            "aligned": self.aligned,
            "all_switch": self.all_switch,
            "parallel_thresholds": self.parallel_thresholds,
            "switching_variables": sorted(self.switching_variables),
        }


def exit_directions(net: Network, a: DomainIndex) -> tuple[frozenset, frozenset]:
    """Escaping directions ``(I_out^+, I_out^-)`` of domain ``a``.

    The outer faces of the state box are never escaping: only interior
    thresholds count.
    """
    phi = net.focal(a)
    plus, minus = set(), set()
    for i, q in enumerate(net.shape):
        if a[i] < q - 1 and phi[i] > net.upper(a, i):
            plus.add(i)
        if a[i] > 0 and phi[i] < net.lower(a, i):
            minus.add(i)
    return frozenset(plus), frozenset(minus)


def classify_wall(net: Network, a: DomainIndex, i: int) -> WallClass:
    """Class of the wall between ``a`` and ``a + e_i``."""
    b = list(a)
    b[i] += 1
    b = tuple(b)
    if not (net.is_valid_domain(a) and net.is_valid_domain(b)):
        raise ValueError(f"no wall between {a} and {b}")
    theta = net.upper(a, i)
    below = np.sign(net.focal(a)[i] - theta)
    above = np.sign(net.focal(b)[i] - theta)
    if below == above:
        return WallClass(TRANSPARENT, int(below))
    if below > 0 > above:
        return WallClass(BLACK)
    if below < 0 < above:
        return WallClass(WHITE)
    # a focal coordinate on the threshold itself (non-generic network)
    return WallClass(BLACK if below > 0 or above < 0 else WHITE)


def build_graph(net: Network) -> TransitionGraph:
    nodes = list(net.domains())
    walls, wall_of = [], {}
    for a in nodes:
        for i, q in enumerate(net.shape):
            if a[i] < q - 1:
                w = Wall(a, i, net.upper(a, i), classify_wall(net, a, i))
                walls.append(w)
                wall_of[(a, i)] = w

    edges, exits, equilibria = [], {}, []
    for a in nodes:
        plus, minus = exit_directions(net, a)
        exits[a] = (plus, minus)
        if not plus and not minus:
            equilibria.append(a)
        for i in sorted(plus | minus):
            eps = 1 if i in plus else -1
            lower = a if eps > 0 else tuple(ai - (k == i) for k, ai in enumerate(a))
            if wall_of[(lower, i)].cls.kind != TRANSPARENT:
                continue
            b = tuple(ai + eps * (k == i) for k, ai in enumerate(a))
            edges.append(Edge(a, b, i, eps))
    return TransitionGraph(nodes, edges, walls, exits, equilibria, net)


def _make_cycle(net: Network, domains: Sequence[DomainIndex]) -> Cycle:
    dirs, signs, thetas, bounds = [], [], [], []
    ell = len(domains)
    for k, a in enumerate(domains):
        b = domains[(k + 1) % ell]
        diff = [bi - ai for ai, bi in zip(a, b)]
        i = next(j for j, d in enumerate(diff) if d)
        eps = diff[i]
        dirs.append(i)
        signs.append(eps)
        theta = net.upper(a, i) if eps > 0 else net.lower(a, i)
        thetas.append(theta)
        bounds.append(tuple(
            (theta, theta) if j == i else (net.lower(a, j), net.upper(a, j))
            for j in range(net.n)
        ))
    return Cycle(tuple(domains), tuple(dirs), tuple(signs), tuple(thetas), tuple(bounds))


def find_deterministic_cycles(g: TransitionGraph) -> list[Cycle]:
    """Every loop of the subgraph whose nodes have a unique transparent exit."""
    net = g.net
    succ = {a: g.successors(a)[0].target for a in g.nodes if g.is_deterministic(a)}
    found: dict[tuple, list[DomainIndex]] = {}
    done = set()
    for start in succ:
        path, pos = [], {}
        a = start
        while a in succ and a not in done and a not in pos:
            pos[a] = len(path)
            path.append(a)
            a = succ[a]
        if a in pos:
            loop = path[pos[a]:]
            k = loop.index(min(loop))
            loop = loop[k:] + loop[:k]
            found[tuple(loop)] = loop
        done.update(path)
    return [_make_cycle(net, loop) for loop in sorted(found)]


def cycle_from_domains(net: Network, domains: Sequence[DomainIndex]) -> Cycle:
    """Cycle through explicitly listed domains, normalised like discovered ones."""
    domains = [tuple(a) for a in domains]
    ell = len(domains)
    if ell < 2:
        raise ValueError("a cycle needs at least two domains")
    for k, a in enumerate(domains):
        b = domains[(k + 1) % ell]
        if not net.is_valid_domain(a):
            raise ValueError(f"invalid domain {label(a)}")
        if sum(abs(x - y) for x, y in zip(a, b)) != 1:
            raise ValueError(f"{label(a)} and {label(b)} are not adjacent")
    k = domains.index(min(domains))
    return _make_cycle(net, domains[k:] + domains[:k])


def _close(u: float, v: float, rel: float) -> bool:
    return u == v or abs(u - v) <= rel * max(abs(u), abs(v))


def cycle_properties(net: Network, c: Cycle, tol: Tolerances = DEFAULT) -> CycleProperties:
    ell = len(c)
    aligned = True
    for i in range(ell):
        nxt = (i + 1) % ell
        phi_i, phi_n = net.focal(c.domains[i]), net.focal(c.domains[nxt])
        s_next = c.directions[nxt]
        if any(not _close(phi_n[j], phi_i[j], tol.alignment) for j in range(net.n) if j != s_next):
            aligned = False
            break
    switching = frozenset(c.directions)
    crossed: dict[int, set] = {}
    for s, theta in zip(c.directions, c.thresholds):
        crossed.setdefault(s, set()).add(theta)
    return CycleProperties(
        aligned=aligned,
        all_switch=switching == frozenset(range(net.n)),
        parallel_thresholds=any(len(v) > 1 for v in crossed.values()),
        switching_variables=switching,
    )


def export_dot(g: TransitionGraph, highlight: Cycle | None = None) -> str:
    bold = set()
    if highlight is not None:
        ell = len(highlight)
        bold = {(highlight.domains[k], highlight.domains[(k + 1) % ell]) for k in range(ell)}
    lines = ["digraph transitions {", "  node [shape=box];"]
    for a in g.nodes:
        extra = ", peripheries=2" if a in g.equilibria else ""
        lines.append(f'  "{label(a)}" [label="{label(a)}"{extra}];')
    for e in g.edges:
        style = "bold" if (e.source, e.target) in bold else "solid"
        lines.append(f'  "{label(e.source)}" -> "{label(e.target)}" [style={style}];')
    for w in g.walls:
        if w.cls.kind == TRANSPARENT:
            continue
        lines.append(
            f'  "{label(w.lower)}" -> "{label(w.upper)}" '
            f'[dir=none, style=dotted, label="{w.cls.kind} wall", constraint=false];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"

"""Core geometric and instance data types shared by all solver modules.

Points carry exact double coordinates (all constructed coordinates are
integers or dyadic rationals, so equality is exact comparison).
Connectivity of a forest is defined over shared segment endpoints only;
geometric crossings without a shared endpoint do not connect.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

MODE_STEINER_FOREST = "steiner-forest"
MODE_S_MPCSF = "s-mpcsf"
MODE_MPCSF = "mpcsf"
MODE_ASYM_S_MPCSF = "asym-s-mpcsf"
MODE_ASYM_MPCSF = "asym-mpcsf"
MODE_PCSF = "pcsf"

MODES = (
    MODE_STEINER_FOREST,
    MODE_S_MPCSF,
    MODE_MPCSF,
    MODE_ASYM_S_MPCSF,
    MODE_ASYM_MPCSF,
    MODE_PCSF,
)

MULTIPLICATIVE_MODES = frozenset(
    {MODE_S_MPCSF, MODE_MPCSF, MODE_ASYM_S_MPCSF, MODE_ASYM_MPCSF}
)
ASYMMETRIC_MODES = frozenset({MODE_ASYM_S_MPCSF, MODE_ASYM_MPCSF})
S_TARGET_MODES = frozenset({MODE_S_MPCSF, MODE_ASYM_S_MPCSF})


class InstanceError(ValueError):
    """Raised for structurally invalid instances."""


class Point(NamedTuple):
    x: float
    y: float

    def dist(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def __repr__(self) -> str:  # compact in test failures
        return f"({self.x!r}, {self.y!r})"


def seg(a: Point, b: Point) -> tuple[Point, Point]:
    """Normalize an unordered segment to a canonical (min, max) pair."""
    return (a, b) if a <= b else (b, a)


def seg_length(s: tuple[Point, Point]) -> float:
    return s[0].dist(s[1])


@dataclass(frozen=True)
class Terminal:
    id: str
    location: Point
    weight: float = 0.0
    weight_s: float | None = None
    weight_t: float | None = None

    def __post_init__(self) -> None:
        if self.weight < 0:
            raise InstanceError(f"terminal {self.id}: negative weight")
        ws = self.weight if self.weight_s is None else self.weight_s
        wt = self.weight if self.weight_t is None else self.weight_t
        if ws < 0 or wt < 0:
            raise InstanceError(f"terminal {self.id}: negative type weight")
        object.__setattr__(self, "weight_s", ws)
        object.__setattr__(self, "weight_t", wt)


@dataclass(frozen=True)
class DemandPair:
    a: str
    b: str
    penalty: float | None = None

    def __post_init__(self) -> None:
        if self.penalty is not None and self.penalty < 0:
            raise InstanceError(f"pair ({self.a},{self.b}): negative penalty")


@dataclass(frozen=True)
class Instance:
    mode: str
    terminals: tuple[Terminal, ...]
    pairs: tuple[DemandPair, ...] = ()
    prize_target: float | None = None
    epsilon: float = 0.5
    epsilon_prime: float = 0.1

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise InstanceError(f"unknown mode {self.mode!r}")
        ids = [t.id for t in self.terminals]
        if len(set(ids)) != len(ids):
            raise InstanceError("duplicate terminal ids")
        known = set(ids)
        for p in self.pairs:
            if p.a not in known or p.b not in known:
                raise InstanceError(f"pair ({p.a},{p.b}) references unknown terminal")
        if not (0 < self.epsilon <= 1):
            raise InstanceError("epsilon must be in (0, 1]")
        if not (0 < self.epsilon_prime <= 1):
            raise InstanceError("epsilon_prime must be in (0, 1]")
        if self.mode in S_TARGET_MODES:
            if self.prize_target is None or self.prize_target < 0:
                raise InstanceError("S-variant modes need a non-negative prize target")
        elif self.prize_target is not None:
            raise InstanceError(f"prize target is meaningless in mode {self.mode}")

    def terminal(self, tid: str) -> Terminal:
        for t in self.terminals:
            if t.id == tid:
                return t
        raise KeyError(tid)

    @property
    def n(self) -> int:
        return len(self.terminals)

    def locations(self) -> dict[str, Point]:
        return {t.id: t.location for t in self.terminals}


@dataclass(frozen=True)
class Forest:
    """A geometric graph: points plus straight segments between them."""

    points: frozenset[Point] = frozenset()
    segments: frozenset[tuple[Point, Point]] = frozenset()

    def __post_init__(self) -> None:
        pts = set(self.points)
        for a, b in self.segments:
            pts.add(a)
            pts.add(b)
        object.__setattr__(self, "points", frozenset(pts))
        object.__setattr__(
            self, "segments", frozenset(seg(a, b) for a, b in self.segments)
        )

    def union(self, other: "Forest") -> "Forest":
        return Forest(self.points | other.points, self.segments | other.segments)


EMPTY_FOREST = Forest()


def forest_from_segments(
    segments: Iterable[tuple[Point, Point]], extra_points: Iterable[Point] = ()
) -> Forest:
    return Forest(frozenset(extra_points), frozenset(seg(a, b) for a, b in segments))


def forest_length(f: Forest) -> float:
    """Sum of Euclidean segment lengths, accumulated in canonical order."""
    return sum(seg_length(s) for s in sorted(f.segments))


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict = {}

    def add(self, x) -> None:
        if x not in self.parent:
            self.parent[x] = x

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _components_uf(f: Forest) -> _UnionFind:
    uf = _UnionFind()
    for p in f.points:
        uf.add(p)
    for a, b in f.segments:
        uf.union(a, b)
    return uf


def connected(f: Forest, p: Point, q: Point) -> bool:
    """True iff p and q lie in the same component of the endpoint graph."""
    if p not in f.points or q not in f.points:
        return False
    if p == q:
        return True
    uf = _components_uf(f)
    return uf.find(p) == uf.find(q)


def components(f: Forest) -> list[frozenset[Point]]:
    """Connected components of the endpoint graph, including isolated points."""
    uf = _components_uf(f)
    groups: dict = {}
    for p in sorted(f.points):
        groups.setdefault(uf.find(p), []).append(p)
    return [frozenset(g) for g in groups.values()]


def collected_prize(inst: Instance, f: Forest) -> float:
    """Multiplicative prize collected by f: ordered pairs including self-pairs.

    Symmetric modes: sum over components of (sum of weights)^2. Asymmetric
    modes: sum over components of (sum phi_s) * (sum phi_t). Terminal
    locations missing from f count as singleton components.
    """
    by_loc: dict[Point, list[Terminal]] = {}
    for t in inst.terminals:
        by_loc.setdefault(t.location, []).append(t)
    full = Forest(f.points | frozenset(by_loc), f.segments)
    asym = inst.mode in ASYMMETRIC_MODES
    total = 0.0
    for comp in components(full):
        ws = wt = w = 0.0
        for p in comp:
            for t in by_loc.get(p, ()):
                w += t.weight
                ws += t.weight_s
                wt += t.weight_t
        total += ws * wt if asym else w * w
    return total


def total_weight(inst: Instance) -> float:
    return sum(t.weight for t in inst.terminals)


def max_prize(inst: Instance) -> float:
    """Prize collected when everything is one component."""
    if inst.mode in ASYMMETRIC_MODES:
        return sum(t.weight_s for t in inst.terminals) * sum(
            t.weight_t for t in inst.terminals
        )
    return total_weight(inst) ** 2


def pcsf_objective(inst: Instance, f: Forest) -> float:
    """Forest length plus uncollected multiplicative prize."""
    return forest_length(f) + (max_prize(inst) - collected_prize(inst, f))

"""Constant-factor reference algorithms: primal-dual moat growing and MST forests.

These supply the estimate omega for the prize-collecting case split and the
comparison curves for benchmarks. They operate on the terminal-only metric
(no Steiner points); the weakening is absorbed into the case-split constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import (
    MULTIPLICATIVE_MODES,
    DemandPair,
    Forest,
    Instance,
    Point,
    collected_prize,
    forest_from_segments,
    forest_length,
    max_prize,
    pcsf_objective,
    seg,
)

_EPS = 1e-9


@dataclass
class DualState:
    """Grown moats: dual value per vertex set plus the tight-edge trace."""

    duals: dict[frozenset, float] = field(default_factory=dict)
    events: list[tuple[str, float, tuple]] = field(default_factory=list)

    def grow(self, comp: frozenset, dt: float) -> None:
        if dt > 0:
            self.duals[comp] = self.duals.get(comp, 0.0) + dt

    def load(self, u, v) -> float:
        return sum(y for s, y in self.duals.items() if (u in s) != (v in s))


def check_dual_feasibility(state: DualState, dist: dict[tuple, float]) -> float:
    """Max constraint violation over all edges (negative = feasible slack)."""
    worst = -math.inf
    for (u, v), d in dist.items():
        worst = max(worst, state.load(u, v) - d)
    return worst


class _Moats:
    """Shared moat-growing machinery for the forest and prize-collecting runs."""

    def __init__(self, points: dict[str, Point]):
        self.points = points
        self.ids = sorted(points)
        self.comp = {t: frozenset([t]) for t in self.ids}
        self.potential = {t: 0.0 for t in self.ids}
        self.members: dict[frozenset, frozenset] = {
            frozenset([t]): frozenset([t]) for t in self.ids
        }
        self.state = DualState()
        self.tight_edges: list[tuple[str, str]] = []

    def dist(self, u: str, v: str) -> float:
        return self.points[u].dist(self.points[v])

    def merge(self, u: str, v: str) -> frozenset:
        cu, cv = self.comp[u], self.comp[v]
        new = cu | cv
        for t in new:
            self.comp[t] = new
        return new

    def cross_pairs(self):
        for i, u in enumerate(self.ids):
            for v in self.ids[i + 1 :]:
                if self.comp[u] is not self.comp[v] and self.comp[u] != self.comp[v]:
                    yield u, v


def _prune(
    points: dict[str, Point],
    edges: list[tuple[str, str]],
    must_connect: list[tuple[str, str]],
) -> list[tuple[str, str]]:
    """Reverse-delete down to a minimal subset keeping must_connect joined."""

    def ok(sub: list[tuple[str, str]]) -> bool:
        parent = {t: t for t in points}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in sub:
            parent[find(a)] = find(b)
        return all(find(a) == find(b) for a, b in must_connect)

    kept = list(edges)
    for e in reversed(edges):
        trial = [x for x in kept if x != e]
        if ok(trial):
            kept = trial
    return kept


def _edges_to_forest(points: dict[str, Point], edges: list[tuple[str, str]]) -> Forest:
    segs = [seg(points[a], points[b]) for a, b in edges if points[a] != points[b]]
    return forest_from_segments(segs, extra_points=points.values())


def gw_steiner_forest(inst: Instance, with_duals: bool = False):
    """Goemans-Williamson moat growing for Steiner forest on the terminals."""
    points = inst.locations()
    demands = [(p.a, p.b) for p in inst.pairs if points[p.a] != points[p.b]]
    moats = _Moats(points)
    if demands:
        while True:
            active = {
                moats.comp[u]
                for u, v in demands
                if moats.comp[u] != moats.comp[v]
                for u in (u, v)
            }
            active |= {
                moats.comp[v] for u, v in demands if moats.comp[u] != moats.comp[v]
            }
            if not active:
                break
            best = None
            for u, v in moats.cross_pairs():
                rate = (moats.comp[u] in active) + (moats.comp[v] in active)
                if rate == 0:
                    continue
                slack = moats.dist(u, v) - moats.potential[u] - moats.potential[v]
                dt = max(slack, 0.0) / rate
                if best is None or dt < best[0] - _EPS or (
                    abs(dt - best[0]) <= _EPS and (u, v) < best[1:]
                ):
                    best = (dt, u, v)
            assert best is not None, "active components but no candidate edge"
            dt, u, v = best
            for c in sorted(active, key=sorted):
                moats.state.grow(c, dt)
                for t in c:
                    moats.potential[t] += dt
            moats.state.events.append(("tight", dt, (u, v)))
            moats.tight_edges.append((u, v))
            moats.merge(u, v)
    kept = _prune(points, moats.tight_edges, demands)
    forest = _edges_to_forest(points, kept)
    if with_duals:
        return forest, moats.state
    return forest


def mst_forest(inst: Instance) -> Forest:
    """Minimum spanning forest over the terminal groups forced by pairs."""
    points = inst.locations()
    parent = {t: t for t in points}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in inst.pairs:
        parent[find(p.a)] = find(p.b)
    groups: dict[str, list[str]] = {}
    for t in sorted(points):
        groups.setdefault(find(t), []).append(t)
    segs = []
    demanded = {t for p in inst.pairs for t in (p.a, p.b)}
    for g in groups.values():
        g = [t for t in g if t in demanded]
        if len(g) < 2:
            continue
        pts = sorted({points[t] for t in g})
        from .oracle import mst_edges

        segs.extend(mst_edges(pts))
    return forest_from_segments(segs, extra_points=points.values())


def _implicit_pairs(inst: Instance) -> list[DemandPair]:
    """Unordered pair expansion of the multiplicative penalties (2*phi*phi)."""
    pairs = []
    terms = sorted(inst.terminals, key=lambda t: t.id)
    for i, u in enumerate(terms):
        for v in terms[i + 1 :]:
            if inst.mode in {"asym-s-mpcsf", "asym-mpcsf"}:
                pen = u.weight_s * v.weight_t + v.weight_s * u.weight_t
            else:
                pen = 2.0 * u.weight * v.weight
            if pen > 0:
                pairs.append(DemandPair(u.id, v.id, pen))
    return pairs


def _pd_prize_collecting(
    points: dict[str, Point], pairs: list[DemandPair], with_duals: bool = False
):
    """Moat growing with penalty-capped duals over the pair set."""
    moats = _Moats(points)
    budget = {}
    live = {}
    for i, p in enumerate(pairs):
        if points[p.a] == points[p.b]:
            continue
        budget[i] = math.inf if p.penalty is None else p.penalty
        live[i] = True
    loadv = {i: 0.0 for i in budget}
    while True:
        active = set()
        for i, p in enumerate(pairs):
            if not live.get(i):
                continue
            if moats.comp[p.a] == moats.comp[p.b]:
                live[i] = False
                continue
            active.add(moats.comp[p.a])
            active.add(moats.comp[p.b])
        if not active:
            break
        best = None  # (dt, kind, payload)
        for u, v in moats.cross_pairs():
            rate = (moats.comp[u] in active) + (moats.comp[v] in active)
            if rate == 0:
                continue
            slack = moats.dist(u, v) - moats.potential[u] - moats.potential[v]
            dt = max(slack, 0.0) / rate
            cand = (dt, "tight", (u, v))
            if best is None or cand[0] < best[0] - _EPS or (
                abs(cand[0] - best[0]) <= _EPS and cand[1:] < best[1:]
            ):
                best = cand
        for i, p in enumerate(pairs):
            if not live.get(i) or moats.comp[p.a] == moats.comp[p.b]:
                continue
            rate = (moats.comp[p.a] in active) + (moats.comp[p.b] in active)
            if rate == 0 or budget[i] == math.inf:
                continue
            dt = max(budget[i] - loadv[i], 0.0) / rate
            cand = (dt, "death", (i,))
            if best is None or cand[0] < best[0] - _EPS or (
                abs(cand[0] - best[0]) <= _EPS and cand[1:] < best[1:]
            ):
                best = cand
        assert best is not None
        dt, kind, payload = best
        for c in sorted(active, key=sorted):
            moats.state.grow(c, dt)
            for t in c:
                moats.potential[t] += dt
        for i, p in enumerate(pairs):
            if live.get(i) and moats.comp[p.a] != moats.comp[p.b]:
                rate = (moats.comp[p.a] in active) + (moats.comp[p.b] in active)
                loadv[i] += dt * rate
        moats.state.events.append((kind, dt, payload))
        if kind == "tight":
            u, v = payload
            moats.tight_edges.append((u, v))
            moats.merge(u, v)
        else:
            live[payload[0]] = False
    survivors = [
        (p.a, p.b)
        for i, p in enumerate(pairs)
        if i in budget and moats.comp[p.a] == moats.comp[p.b] and loadv[i] < budget[i] - _EPS
    ]
    kept = _prune(points, moats.tight_edges, survivors)
    forest = _edges_to_forest(points, kept)
    if with_duals:
        return forest, moats.state
    return forest


def pcsf_baseline(inst: Instance, with_duals: bool = False):
    """Feasible prize-collecting solution and its objective value omega.

    omega is exactly the objective of the returned solution; the case split
    in the prize solver assumes OPT >= omega/3, which is validated against
    the oracle in tests rather than proven here.
    """
    points = inst.locations()
    if inst.mode in MULTIPLICATIVE_MODES:
        pairs = _implicit_pairs(inst)

        def objective(f: Forest) -> float:
            return pcsf_objective(inst, f)

    else:
        pairs = [p for p in inst.pairs]

        def objective(f: Forest) -> float:
            from .geometry import connected

            pen = 0.0
            for p in pairs:
                if not connected(f, points[p.a], points[p.b]):
                    pen += math.inf if p.penalty is None else p.penalty
            return forest_length(f) + pen

    result = _pd_prize_collecting(points, pairs, with_duals=True)
    pd_forest, duals = result
    candidates = [pd_forest, Forest(frozenset(points.values()))]
    # connect-everything alternative
    from .oracle import mst_edges

    all_pts = sorted(set(points.values()))
    candidates.append(
        forest_from_segments(mst_edges(all_pts), extra_points=points.values())
    )
    best = min(candidates, key=lambda f: (objective(f), forest_length(f)))
    omega = objective(best)
    if with_duals:
        return best, omega, duals
    return best, omega

"""Exact brute-force solvers for tiny instances; ground truth for tests.

Steiner minimal trees are exact for blocks of up to 4 terminals (Fermat
point for 3, full-topology enumeration with alternating coordinate descent
for 4). Larger blocks fall back to a deterministic upper-bound
construction (MST plus greedy Fermat-junction insertion); every test that
relies on exact equality uses the same block cost on both sides.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .geometry import (
    ASYMMETRIC_MODES,
    DemandPair,
    Forest,
    Instance,
    Point,
    forest_from_segments,
    forest_length,
    seg,
)


class OracleRefusal(RuntimeError):
    """The instance needs a block the oracle cannot solve exactly."""


def _angle_at_least_120(v: Point, a: Point, b: Point) -> bool:
    ux, uy = a.x - v.x, a.y - v.y
    wx, wy = b.x - v.x, b.y - v.y
    nu = math.hypot(ux, uy)
    nw = math.hypot(wx, wy)
    if nu == 0.0 or nw == 0.0:
        return True  # duplicate point: degenerate branch
    return ux * wx + uy * wy <= -0.5 * nu * nw + 1e-15 * nu * nw


def _rot60(px: float, py: float, sign: float) -> tuple[float, float]:
    c, s = 0.5, sign * math.sqrt(3.0) / 2.0
    return c * px - s * py, s * px + c * py


def fermat_point(a: Point, b: Point, c: Point) -> tuple[Point, float]:
    """Exact 3-terminal Steiner tree: the meeting point and total length.

    If some angle is >= 120 degrees (or points are degenerate) the meeting
    point is that vertex; otherwise the interior Torricelli point.
    """
    for v, p, q in ((a, b, c), (b, a, c), (c, a, b)):
        if _angle_at_least_120(v, p, q):
            return v, v.dist(p) + v.dist(q)
    # Torricelli point: apex of the outward equilateral triangle on ab,
    # intersected with the line through c; total length equals |apex - c|.
    ex, ey = b.x - a.x, b.y - a.y
    cross = ex * (c.y - a.y) - ey * (c.x - a.x)
    sign = -1.0 if cross > 0 else 1.0  # apex on the opposite side of ab from c
    rx, ry = _rot60(ex, ey, sign)
    apex = Point(a.x + rx, a.y + ry)
    length = apex.dist(c)
    # Locate the point itself: intersection of apex-c with the analogous
    # line apex2-a built on side bc.
    ex2, ey2 = c.x - b.x, c.y - b.y
    cross2 = ex2 * (a.y - b.y) - ey2 * (a.x - b.x)
    sign2 = -1.0 if cross2 > 0 else 1.0
    r2x, r2y = _rot60(ex2, ey2, sign2)
    apex2 = Point(b.x + r2x, b.y + r2y)
    pt = _line_intersection(apex, c, apex2, a)
    if pt is None:  # nearly collinear input; the >=120 branch should have fired
        pt = min((a, b, c), key=lambda v: v.dist(a) + v.dist(b) + v.dist(c))
    return pt, length


def _line_intersection(p1: Point, p2: Point, p3: Point, p4: Point) -> Point | None:
    d1x, d1y = p2.x - p1.x, p2.y - p1.y
    d2x, d2y = p4.x - p3.x, p4.y - p3.y
    den = d1x * d2y - d1y * d2x
    if abs(den) < 1e-14:
        return None
    t = ((p3.x - p1.x) * d2y - (p3.y - p1.y) * d2x) / den
    return Point(p1.x + t * d1x, p1.y + t * d1y)


def mst_length(points: Sequence[Point]) -> float:
    pts = list(points)
    n = len(pts)
    if n <= 1:
        return 0.0
    in_tree = [False] * n
    dist = [math.inf] * n
    dist[0] = 0.0
    total = 0.0
    for _ in range(n):
        i = min((k for k in range(n) if not in_tree[k]), key=lambda k: dist[k])
        in_tree[i] = True
        total += dist[i]
        for j in range(n):
            if not in_tree[j]:
                d = pts[i].dist(pts[j])
                if d < dist[j]:
                    dist[j] = d
    return total


def mst_edges(points: Sequence[Point]) -> list[tuple[Point, Point]]:
    pts = sorted(set(points))
    n = len(pts)
    if n <= 1:
        return []
    in_tree = [False] * n
    dist = [math.inf] * n
    parent = [-1] * n
    dist[0] = 0.0
    edges: list[tuple[Point, Point]] = []
    for _ in range(n):
        i = min((k for k in range(n) if not in_tree[k]), key=lambda k: (dist[k], k))
        in_tree[i] = True
        if parent[i] >= 0:
            edges.append(seg(pts[parent[i]], pts[i]))
        for j in range(n):
            if not in_tree[j]:
                d = pts[i].dist(pts[j])
                if d < dist[j]:
                    dist[j] = d
                    parent[j] = i
    return edges


def _four_point_full_topology(
    a: Point, b: Point, c: Point, d: Point, tol: float = 1e-12, max_iter: int = 10_000
) -> tuple[float, list[tuple[Point, Point]]]:
    """Full topology (a,b)-s1-s2-(c,d), alternating exact Fermat solves."""
    s1 = Point((a.x + b.x) / 2, (a.y + b.y) / 2)
    s2 = Point((c.x + d.x) / 2, (c.y + d.y) / 2)
    for _ in range(max_iter):
        n1, _ = fermat_point(a, b, s2)
        n2, _ = fermat_point(c, d, n1)
        if max(abs(n1.x - s1.x), abs(n1.y - s1.y), abs(n2.x - s2.x), abs(n2.y - s2.y)) < tol:
            s1, s2 = n1, n2
            break
        s1, s2 = n1, n2
    cost = a.dist(s1) + b.dist(s1) + s1.dist(s2) + c.dist(s2) + d.dist(s2)
    edges = [seg(a, s1), seg(b, s1), seg(s1, s2), seg(c, s2), seg(d, s2)]
    edges = [e for e in edges if e[0] != e[1]]
    return cost, edges


def _steiner_exact4(points: tuple[Point, ...]) -> tuple[float, list[tuple[Point, Point]]]:
    a, b, c, d = points
    best = (mst_length(points), mst_edges(points))
    # one Steiner point: Fermat star over a 3-subset, fourth point attached
    for tri in itertools.combinations(points, 3):
        (other,) = [p for p in points if p not in tri] or [None]
        if other is None:  # duplicated coordinates
            continue
        s, tri_len = fermat_point(*tri)
        attach = min(list(tri) + [s], key=lambda q: other.dist(q))
        cost = tri_len + other.dist(attach)
        if cost < best[0] - 1e-15:
            edges = [seg(t, s) for t in tri if t != s] + [seg(other, attach)]
            best = (cost, [e for e in edges if e[0] != e[1]])
    for (p1, p2), (p3, p4) in (
        ((a, b), (c, d)),
        ((a, c), (b, d)),
        ((a, d), (b, c)),
    ):
        cost, edges = _four_point_full_topology(p1, p2, p3, p4)
        if cost < best[0] - 1e-15:
            best = (cost, edges)
    return best


def _steiner_upper(points: tuple[Point, ...]) -> tuple[float, list[tuple[Point, Point]]]:
    """Deterministic upper bound for 5+ points: MST then greedy Fermat insertion."""
    edges = mst_edges(points)
    cost = sum(s[0].dist(s[1]) for s in edges)
    improved = True
    while improved:
        improved = False
        adj: dict[Point, list[Point]] = {}
        for u, v in edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        best_gain, best_swap = 1e-12, None
        for v, nbrs in adj.items():
            for u, w in itertools.combinations(sorted(nbrs), 2):
                s, tri_len = fermat_point(u, v, w)
                gain = (v.dist(u) + v.dist(w)) - tri_len
                if gain > best_gain:
                    best_gain = gain
                    best_swap = (u, v, w, s)
        if best_swap is not None:
            u, v, w, s = best_swap
            edges = [e for e in edges if e not in (seg(u, v), seg(v, w))]
            edges += [e for e in (seg(u, s), seg(v, s), seg(w, s)) if e[0] != e[1]]
            cost -= best_gain
            improved = True
    return sum(s[0].dist(s[1]) for s in edges), edges


@lru_cache(maxsize=None)
def steiner_tree(points: tuple[Point, ...]) -> tuple[float, tuple[tuple[Point, Point], ...]]:
    """Minimal tree interconnecting the points (exact up to 4 distinct points)."""
    distinct = tuple(sorted(set(points)))
    if len(distinct) <= 1:
        return 0.0, ()
    if len(distinct) == 2:
        return distinct[0].dist(distinct[1]), (seg(*distinct),)
    if len(distinct) == 3:
        s, length = fermat_point(*distinct)
        edges = tuple(seg(t, s) for t in distinct if t != s)
        return length, edges
    if len(distinct) == 4:
        cost, edges = _steiner_exact4(distinct)
        return cost, tuple(edges)
    cost, edges = _steiner_upper(distinct)
    return cost, tuple(edges)


def steiner_tree_cost(points: Iterable[Point]) -> float:
    return steiner_tree(tuple(sorted(points)))[0]


def _set_partitions(items: list) -> Iterable[list[list]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def _forced_groups(inst: Instance) -> list[list[str]]:
    parent = {t.id: t.id for t in inst.terminals}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in inst.pairs:
        parent[find(p.a)] = find(p.b)
    groups: dict[str, list[str]] = {}
    for t in inst.terminals:
        groups.setdefault(find(t.id), []).append(t.id)
    return sorted(groups.values())


def brute_force_steiner_forest(
    inst: Instance, max_n: int = 6
) -> tuple[Forest, float]:
    """Minimum Steiner forest over all pair-respecting partitions."""
    if inst.n > max_n:
        raise OracleRefusal(f"instance has {inst.n} > {max_n} terminals")
    loc = inst.locations()
    groups = _forced_groups(inst)
    # groups without any demand can stay as isolated points at zero cost
    demanded = {tid for p in inst.pairs for tid in (p.a, p.b)}
    active = [g for g in groups if any(t in demanded for t in g)]
    for g in active:
        if len(set(loc[t] for t in g)) > 4:
            raise OracleRefusal("a demand group needs a Steiner block of size > 4")
    best_cost = math.inf
    best_edges: tuple = ()
    for part in _set_partitions(active):
        cost = 0.0
        edges: list[tuple[Point, Point]] = []
        feasible = True
        for block in part:
            pts = set()
            for g in block:
                pts.update(loc[t] for t in g)
            if len(pts) > 4:
                feasible = False  # outside the exact regime; corpus avoids needing it
                break
            c, e = steiner_tree(tuple(sorted(pts)))
            cost += c
            edges.extend(e)
            if cost >= best_cost:
                break
        if feasible and cost < best_cost - 1e-15:
            best_cost = cost
            best_edges = tuple(edges)
    forest = forest_from_segments(best_edges, extra_points=loc.values())
    return forest, best_cost


def brute_force_mpcsf(
    inst: Instance,
    mode: str | None = None,
    S: float | None = None,
    max_n: int = 7,
) -> tuple[Forest, float, float]:
    """Brute force over all terminal partitions for the multiplicative modes.

    Returns (forest, objective-or-cost, collected). For S-target modes the
    objective is the minimum cost among partitions collecting at least S;
    for the prize-collecting modes it is cost + (max prize - collected).
    """
    if inst.n > max_n:
        raise OracleRefusal(f"instance has {inst.n} > {max_n} terminals")
    mode = mode or inst.mode
    if S is None:
        S = inst.prize_target
    asym = mode in ASYMMETRIC_MODES
    terms = list(inst.terminals)
    total_s = sum(t.weight_s for t in terms)
    total_t = sum(t.weight_t for t in terms)
    delta2 = total_s * total_t if asym else sum(t.weight for t in terms) ** 2
    best: tuple[float, float, tuple] | None = None
    for part in _set_partitions(terms):
        cost = 0.0
        collected = 0.0
        edges: list[tuple[Point, Point]] = []
        for block in part:
            pts = tuple(sorted({t.location for t in block}))
            c, e = steiner_tree(pts)
            cost += c
            edges.extend(e)
            if asym:
                collected += sum(t.weight_s for t in block) * sum(
                    t.weight_t for t in block
                )
            else:
                collected += sum(t.weight for t in block) ** 2
        if S is not None:
            if collected < S - 1e-9:
                continue
            key = cost
        else:
            key = cost + (delta2 - collected)
        if best is None or key < best[0] - 1e-12:
            best = (key, collected, tuple(edges))
    if best is None:
        raise OracleRefusal("no partition collects the requested prize")
    key, collected, edges = best
    forest = forest_from_segments(edges, extra_points=(t.location for t in terms))
    return forest, key, collected


def brute_force_kmst(
    points: dict[str, Point], root: str, k: int
) -> tuple[float, tuple[str, ...]]:
    """Min tree cost spanning the root plus at least k other vertices."""
    others = sorted(t for t in points if t != root)
    if k > len(others):
        raise OracleRefusal("k exceeds the number of non-root vertices")
    best = (math.inf, ())
    for size in range(k, len(others) + 1):
        for subset in itertools.combinations(others, size):
            pts = tuple(sorted({points[root]} | {points[t] for t in subset}))
            c = steiner_tree_cost(pts)
            if c < best[0] - 1e-15:
                best = (c, (root,) + subset)
    return best


def brute_force_kforest(
    inst: Instance, multiplicities: Sequence[int], k: int, max_n: int = 6
) -> tuple[Forest, float]:
    """Min-cost forest connecting pair copies summing to at least k.

    multiplicities[i] copies of pair i all connect together or not at all.
    """
    pairs = list(inst.pairs)
    best: tuple[float, Forest] | None = None
    for mask in range(1 << len(pairs)):
        chosen = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        credit = sum(multiplicities[i] for i in range(len(pairs)) if mask >> i & 1)
        if credit < k:
            continue
        sub = Instance(
            mode=inst.mode if inst.mode == "steiner-forest" else "steiner-forest",
            terminals=inst.terminals,
            pairs=tuple(chosen),
            epsilon=inst.epsilon,
        )
        try:
            forest, cost = brute_force_steiner_forest(sub, max_n=max_n)
        except OracleRefusal:
            continue
        if best is None or cost < best[0] - 1e-12:
            best = (cost, forest)
    if best is None:
        raise OracleRefusal("no pair subset reaches the requested credit")
    return best[1], best[0]


def brute_force_pcsf(inst: Instance, max_n: int = 6) -> tuple[Forest, float]:
    """Exact prize-collecting Steiner forest over pair subsets."""
    pairs = list(inst.pairs)
    best: tuple[float, Forest] | None = None
    for mask in range(1 << len(pairs)):
        chosen = tuple(pairs[i] for i in range(len(pairs)) if mask >> i & 1)
        penalty = sum(
            (p.penalty or 0.0) for i, p in enumerate(pairs) if not mask >> i & 1
        )
        sub = Instance(
            mode="steiner-forest",
            terminals=inst.terminals,
            pairs=chosen,
            epsilon=inst.epsilon,
        )
        forest, cost = brute_force_steiner_forest(sub, max_n=max_n)
        value = cost + penalty
        if best is None or value < best[0] - 1e-12:
            best = (value, forest)
    assert best is not None
    return best[1], best[0]

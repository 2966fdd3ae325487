"""Instance normalization: scaling, odd-lattice snapping, component splitting.

The scaled picture places terminals on the odd lattice (coordinates of the
form 2i+1) so dissection lines (even coordinates) never hit them. Weights
and prizes are never scaled; only geometry is.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import (
    Forest,
    Instance,
    InstanceError,
    MULTIPLICATIVE_MODES,
    Point,
    Terminal,
    forest_from_segments,
    seg,
)

# Scaled length of the largest pair distance (forest mode) or of the OPT
# guess (multiplicative modes), per unit of 1/epsilon. Chosen so the total
# snap cost (<= 8n lattice units) stays under an epsilon fraction of OPT.
_FOREST_SCALE_UNITS = 32
_MULT_SCALE_UNITS = 16


def snap_odd(v: float) -> int:
    """Nearest odd integer (ties resolve downward deterministically)."""
    return 2 * math.floor(v / 2) + 1


@dataclass(frozen=True)
class SubGeometry:
    anchor: tuple[float, float]
    d_prime: float


@dataclass(frozen=True)
class ScaledInstance:
    base: Instance
    scale_factor: float
    translation: tuple[float, float]
    snapped: dict[str, Point] = field(default_factory=dict, compare=False)
    subinstances: tuple[Instance, ...] = ()
    sub_geometry: tuple[SubGeometry, ...] = ()
    opt_guess: float = 1.0
    trivial: bool = False  # solution is the empty forest

    def to_scaled(self, p: Point) -> Point:
        tx, ty = self.translation
        return Point((p.x - tx) * self.scale_factor, (p.y - ty) * self.scale_factor)

    def to_original(self, p: Point) -> Point:
        tx, ty = self.translation
        return Point(p.x / self.scale_factor + tx, p.y / self.scale_factor + ty)

    def map_forest_back(self, f: Forest) -> Forest:
        """Inverse transform only; lengths divide exactly by scale_factor."""
        return Forest(
            frozenset(self.to_original(p) for p in f.points),
            frozenset(
                seg(self.to_original(a), self.to_original(b)) for a, b in f.segments
            ),
        )

    def bridge_segments(self, inst: Instance) -> list[tuple[Point, Point]]:
        """Original-units segments joining each terminal to its snapped site."""
        out = []
        for t in inst.terminals:
            if t.id not in self.snapped:
                continue
            back = self.to_original(self.snapped[t.id])
            if back != t.location:
                out.append(seg(t.location, back))
        return out


def _split_components(
    terminals: list[Terminal], threshold: float
) -> list[list[Terminal]]:
    n = len(terminals)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if terminals[i].location.dist(terminals[j].location) <= threshold + 1e-12:
                parent[find(i)] = find(j)
    groups: dict[int, list[Terminal]] = {}
    for i, t in enumerate(terminals):
        groups.setdefault(find(i), []).append(t)
    return sorted(groups.values(), key=lambda g: g[0].id)


def _scaled_instance(
    inst: Instance,
    kept: list[Terminal],
    groups: list[list[Terminal]],
    scale: float,
    translation: tuple[float, float],
    opt_guess: float,
) -> ScaledInstance:
    tx, ty = translation
    snapped: dict[str, Point] = {}
    scaled_terms: dict[str, Terminal] = {}
    for t in kept:
        sx = snap_odd((t.location.x - tx) * scale)
        sy = snap_odd((t.location.y - ty) * scale)
        snapped[t.id] = Point(float(sx), float(sy))
        scaled_terms[t.id] = Terminal(
            t.id, snapped[t.id], t.weight, t.weight_s, t.weight_t
        )
    subs = []
    geoms = []
    for group in groups:
        ids = {t.id for t in group}
        sub_terms = tuple(scaled_terms[t.id] for t in group)
        sub_pairs = tuple(p for p in inst.pairs if p.a in ids and p.b in ids)
        subs.append(
            Instance(
                mode=inst.mode,
                terminals=sub_terms,
                pairs=sub_pairs,
                prize_target=inst.prize_target,
                epsilon=inst.epsilon,
                epsilon_prime=inst.epsilon_prime,
            )
        )
        xs = [t.location.x for t in sub_terms]
        ys = [t.location.y for t in sub_terms]
        anchor = (2 * math.floor(min(xs) / 2) - 2, 2 * math.floor(min(ys) / 2) - 2)
        span = max(max(xs) - min(xs), max(ys) - min(ys))
        geoms.append(SubGeometry(anchor=anchor, d_prime=span + 8))
    base = Instance(
        mode=inst.mode,
        terminals=tuple(scaled_terms[t.id] for t in kept),
        pairs=tuple(p for p in inst.pairs if p.a in scaled_terms and p.b in scaled_terms),
        prize_target=inst.prize_target,
        epsilon=inst.epsilon,
        epsilon_prime=inst.epsilon_prime,
    )
    return ScaledInstance(
        base=base,
        scale_factor=scale,
        translation=translation,
        snapped=snapped,
        subinstances=tuple(subs),
        sub_geometry=tuple(geoms),
        opt_guess=opt_guess,
    )


def normalize_forest_instance(inst: Instance) -> ScaledInstance:
    """Scale, snap and split a Steiner-forest instance.

    Terminals that appear in no pair are irrelevant to the forest objective
    and are left out of the subinstances. Degenerate instances (all pairs
    collocated) come back flagged trivial: the empty forest is optimal.
    """
    if inst.mode != "steiner-forest":
        raise InstanceError("normalize_forest_instance expects steiner-forest mode")
    if not inst.pairs:
        raise InstanceError("a Steiner-forest instance needs at least one pair")
    loc = inst.locations()
    d = max(loc[p.a].dist(loc[p.b]) for p in inst.pairs)
    if d == 0:
        return ScaledInstance(
            base=inst, scale_factor=1.0, translation=(0.0, 0.0), trivial=True
        )
    paired_ids = {t for p in inst.pairs for t in (p.a, p.b)}
    kept = [t for t in inst.terminals if t.id in paired_ids]
    w_ub = sum(loc[p.a].dist(loc[p.b]) for p in inst.pairs)
    groups = _split_components(kept, w_ub)
    scale = (_FOREST_SCALE_UNITS * len(kept) / inst.epsilon) / d
    tx = min(t.location.x for t in kept)
    ty = min(t.location.y for t in kept)
    return _scaled_instance(inst, kept, groups, scale, (tx, ty), opt_guess=w_ub)


def normalize_multiplicative(inst: Instance, opt_guess: float) -> ScaledInstance:
    """Appendix pipeline: split by the OPT-guess threshold graph, scale, snap."""
    if inst.mode not in MULTIPLICATIVE_MODES:
        raise InstanceError("normalize_multiplicative expects a multiplicative mode")
    if opt_guess <= 0:
        raise InstanceError("opt_guess must be positive")
    kept = list(inst.terminals)
    if not kept:
        return ScaledInstance(
            base=inst, scale_factor=1.0, translation=(0.0, 0.0), trivial=True
        )
    groups = _split_components(kept, opt_guess)
    scale = (_MULT_SCALE_UNITS * len(kept) / inst.epsilon) / opt_guess
    tx = min(t.location.x for t in kept)
    ty = min(t.location.y for t in kept)
    return _scaled_instance(inst, kept, groups, scale, (tx, ty), opt_guess=opt_guess)


def guess_opt_schedule(inst: Instance, baseline_value: float) -> list[float]:
    """Geometric (1+eps) grid of OPT guesses covering [omega/n, omega]."""
    if baseline_value <= 0:
        return [1.0]
    n = max(inst.n, 1)
    lo = baseline_value / n
    guesses = []
    g = lo
    while g < baseline_value - 1e-12:
        guesses.append(g)
        g *= 1 + inst.epsilon
    guesses.append(baseline_value)
    return guesses

"""Randomly shifted quadtree with portals, levels and cell grids.

All dissection lines lie on even coordinates, so odd-lattice terminals and
Steiner points never sit on a line. Shifts are drawn from the even
integers in [0, L/2): the instance occupies a half-box, which keeps every
terminal strictly inside a leaf for every shift (drawing from the full
[0, L) range would let the box slide off the instance).
"""
from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass
from functools import lru_cache

from .geometry import Point


def next_pow2(x: float) -> int:
    """Smallest power of two >= x (at least 1)."""
    p = 1
    while p < x - 1e-12:
        p *= 2
    return p


@dataclass(frozen=True)
class Square:
    x0: float
    y0: float
    side: float
    level: int

    @property
    def origin(self) -> Point:
        return Point(self.x0, self.y0)

    @property
    def id(self) -> tuple[float, float, float]:
        return (self.x0, self.y0, self.side)

    def contains(self, p: Point) -> bool:
        return self.x0 < p.x < self.x0 + self.side and self.y0 < p.y < self.y0 + self.side

    def contains_closed(self, p: Point) -> bool:
        return (
            self.x0 <= p.x <= self.x0 + self.side
            and self.y0 <= p.y <= self.y0 + self.side
        )

    def on_boundary(self, p: Point) -> bool:
        return self.contains_closed(p) and (
            p.x in (self.x0, self.x0 + self.side)
            or p.y in (self.y0, self.y0 + self.side)
        )

    def children(self) -> tuple["Square", ...]:
        """Quadrants in fixed order SW, SE, NW, NE (q = 2*dy + dx)."""
        h = self.side / 2
        lv = self.level + 1
        return (
            Square(self.x0, self.y0, h, lv),
            Square(self.x0 + h, self.y0, h, lv),
            Square(self.x0, self.y0 + h, h, lv),
            Square(self.x0 + h, self.y0 + h, h, lv),
        )

    def corners(self) -> tuple[Point, Point, Point, Point]:
        s = self.side
        return (
            Point(self.x0, self.y0),
            Point(self.x0 + s, self.y0),
            Point(self.x0, self.y0 + s),
            Point(self.x0 + s, self.y0 + s),
        )

    def sides(self) -> tuple[tuple[Point, Point], ...]:
        """Sides as (endpoint, endpoint): bottom, top, left, right."""
        s = self.side
        a, b, c, d = (
            Point(self.x0, self.y0),
            Point(self.x0 + s, self.y0),
            Point(self.x0, self.y0 + s),
            Point(self.x0 + s, self.y0 + s),
        )
        return ((a, b), (c, d), (a, c), (b, d))


@lru_cache(maxsize=None)
def square_portals(square: Square, m: int) -> tuple[Point, ...]:
    """The 4m distinct portals: m+1 equally spaced points per side, corners shared."""
    step = square.side / m
    pts = set()
    x0, y0, s = square.x0, square.y0, square.side
    for k in range(m + 1):
        pts.add(Point(x0 + k * step, y0))
        pts.add(Point(x0 + k * step, y0 + s))
        pts.add(Point(x0, y0 + k * step))
        pts.add(Point(x0 + s, y0 + k * step))
    return tuple(sorted(pts))


def side_portals(square: Square, m: int, side: tuple[Point, Point]) -> tuple[Point, ...]:
    a, b = side
    return tuple(
        p
        for p in square_portals(square, m)
        if (a.x == b.x and p.x == a.x and min(a.y, b.y) <= p.y <= max(a.y, b.y))
        or (a.y == b.y and p.y == a.y and min(a.x, b.x) <= p.x <= max(a.x, b.x))
    )


@dataclass(frozen=True)
class Dissection:
    L: int
    shift: tuple[int, int]
    root: Square
    depth: int  # log2(L) - 1: index of the leaf level (side-2 squares)

    def leaf_of(self, p: Point) -> Square:
        sq = self.root
        if not sq.contains(p):
            raise ValueError(f"{p} outside the dissection box")
        while sq.side > 2:
            for child in sq.children():
                if child.contains(p):
                    sq = child
                    break
            else:
                raise ValueError(f"{p} lies on a dissection line")
        return sq

    def squares(self):
        """Full quadtree, breadth-first (use sparingly: O(L^2) leaves)."""
        frontier = [self.root]
        while frontier:
            yield from frontier
            if frontier[0].side <= 2:
                return
            frontier = [c for sq in frontier for c in sq.children()]

    def line_level(self, axis: str, coord: float) -> int:
        """Level of the grid line x=coord (axis 'x') or y=coord within the box."""
        base = self.root.x0 if axis == "x" else self.root.y0
        v = int(coord - base)
        if v % 2:
            raise ValueError("dissection lines have even coordinates")
        v %= self.L
        if v == 0:
            return 0
        k = self.L.bit_length() - 1
        t = (v & -v).bit_length() - 1  # 2-adic valuation
        return k - t


def build_dissection(
    d_prime: float, seed: int, anchor: tuple[float, float] = (0.0, 0.0)
) -> Dissection:
    """Shifted quadtree whose box contains [anchor, anchor + d_prime]^2.

    L is the smallest power of two >= 2*d_prime; the shift components are
    even integers drawn uniformly from [0, L/2) with the given seed.
    """
    if d_prime <= 0:
        raise ValueError("d_prime must be positive")
    L = next_pow2(2 * d_prime)
    L = max(L, 4)
    rng = random.Random(seed)
    a = 2 * rng.randrange(L // 4)
    b = 2 * rng.randrange(L // 4)
    ax = 2 * math.floor(anchor[0] / 2)
    ay = 2 * math.floor(anchor[1] / 2)
    root = Square(ax - a, ay - b, float(L), 0)
    return Dissection(L=L, shift=(a, b), root=root, depth=max(L.bit_length() - 2, 0))


@dataclass(frozen=True)
class Params:
    m: int
    rho: int
    lam: int
    gamma: int
    practical: bool
    epsilon: float


def compute_parameters(
    epsilon: float,
    L: int,
    practical: bool = True,
    m: int | None = None,
    rho: int | None = None,
    gamma: int | None = None,
    c_rho: float = 4.0,
) -> Params:
    """Dissection parameters (m, rho, lambda, gamma).

    Theoretical mode follows the quoted formulas; practical mode takes the
    overrides (defaults m=8, rho=3, gamma=4) and forfeits the (1+eps)
    guarantee, which is worth a warning because it is easy to miss.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if practical:
        m_v = m if m is not None else 8
        rho_v = rho if rho is not None else 3
        gamma_v = gamma if gamma is not None else 4
        warnings.warn(
            "practical parameters: the (1+epsilon) guarantee is forfeited",
            stacklevel=2,
        )
    else:
        m_v = next_pow2(4 / epsilon * math.log2(L) + 1e-9) if m is None else m
        if m_v <= 4 / epsilon * math.log2(L):
            m_v *= 2  # strictly greater than the bound
        rho_v = rho if rho is not None else math.ceil(c_rho / epsilon)
        gamma_v = gamma
        if gamma_v is None:
            bound = 112 * (1 + epsilon) * 2 / epsilon
            gamma_v = next_pow2(bound)
            if gamma_v <= bound:
                gamma_v *= 2
    return Params(
        m=m_v, rho=rho_v, lam=4 * (rho_v + 1), gamma=gamma_v,
        practical=practical, epsilon=epsilon,
    )


def effective_gamma(square: Square, gamma: int) -> int:
    """Clamp gamma so cells have side >= 2 (odd points stay off cell lines)."""
    return max(1, min(gamma, int(square.side) // 2))


def cell_of(point: Point, square: Square, gamma: int) -> tuple[int, int]:
    """(row, col) of the cell containing the point: row from y, col from x."""
    if not square.contains(point):
        raise ValueError(f"{point} is not strictly inside {square}")
    cell = square.side / gamma
    row = int((point.y - square.y0) // cell)
    col = int((point.x - square.x0) // cell)
    return (min(row, gamma - 1), min(col, gamma - 1))


@dataclass(frozen=True)
class CellGrid:
    owner: Square
    gamma: int

    def cell_square(self, row: int, col: int) -> Square:
        side = self.owner.side / self.gamma
        extra = int(round(math.log2(self.gamma)))
        return Square(
            self.owner.x0 + col * side,
            self.owner.y0 + row * side,
            side,
            self.owner.level + extra,
        )

    def cells(self):
        for row in range(self.gamma):
            for col in range(self.gamma):
                yield (row, col), self.cell_square(row, col)

    def private_sides(self, row: int, col: int) -> list[tuple[Point, Point]]:
        """The two cell sides not lying on the virtual parent's boundary."""
        sq = self.cell_square(row, col)
        bottom, top, left, right = sq.sides()
        out = []
        out.append(top if row % 2 == 0 else bottom)
        out.append(right if col % 2 == 0 else left)
        return out

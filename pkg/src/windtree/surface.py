"""Unfolding billiard tables into square-tiled translation surfaces.

The unfolded surface consists of four copies of the torus-with-obstacle,
labeled (i, j) in {0,1}^2 by the parities of horizontal/vertical reflections.
Each copy is drawn in its own chart; charts are chosen so that all transition
maps are translations, which makes the result a genuine origami after
rescaling to integer data.  Crossing an obstacle wall flips one copy parity
and re-enters at the wall position reflected through the obstacle's symmetry
axis (all walls of a reflection-symmetric configuration share those axes up
to lattice translations, so the rule is globally consistent).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .errors import (
    InconsistentComplex,
    InvalidDims,
    NotAdmissible,
    NotCommensurable,
    NotSymmetric,
)
from .geometry import LatticeBasis, RectilinearPolygon

Cell = Tuple[int, int]
Copy = Tuple[int, int]

# corner slots of a square, in ccw order starting at the bottom-left
BL, BR, TR, TL = 0, 1, 2, 3

COPIES: Tuple[Copy, ...] = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass
class Origami:
    """Square-tiled surface given by right-neighbor and up-neighbor permutations."""

    h: List[int]
    v: List[int]

    def __post_init__(self):
        n = len(self.h)
        if len(self.v) != n or n == 0:
            raise InconsistentComplex("h and v must be permutations of the same size")
        for p in (self.h, self.v):
            if sorted(p) != list(range(n)):
                raise InconsistentComplex("not a permutation")
        self.h_inv = [0] * n
        self.v_inv = [0] * n
        for i, t in enumerate(self.h):
            self.h_inv[t] = i
        for i, t in enumerate(self.v):
            self.v_inv[t] = i
        if not self._transitive():
            raise InconsistentComplex("surface is not connected")

    @property
    def n_squares(self) -> int:
        return len(self.h)

    def _transitive(self) -> bool:
        n = len(self.h)
        seen = [False] * n
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            s = stack.pop()
            for t in (self.h[s], self.v[s], self.h_inv[s], self.v_inv[s]):
                if not seen[t]:
                    seen[t] = True
                    count += 1
                    stack.append(t)
        return count == n

    # -- vertex structure ----------------------------------------------------

    def sector_cycles(self) -> List[List[int]]:
        """Vertex classes as ccw cycles of sectors; sector id = 4*square + slot."""
        n = len(self.h)
        nxt = [0] * (4 * n)
        for s in range(n):
            nxt[4 * s + BL] = 4 * self.h_inv[s] + BR
            nxt[4 * s + BR] = 4 * self.v_inv[s] + TR
            nxt[4 * s + TR] = 4 * self.h[s] + TL
            nxt[4 * s + TL] = 4 * self.v[s] + BL
        seen = [False] * (4 * n)
        cycles = []
        for start in range(4 * n):
            if seen[start]:
                continue
            cyc = []
            cur = start
            while not seen[cur]:
                seen[cur] = True
                cyc.append(cur)
                cur = nxt[cur]
            if cur != start:
                raise InconsistentComplex("sector walk is not a cycle")
            if len(cyc) % 4:
                raise InconsistentComplex("cone angle not a multiple of 2*pi")
            cycles.append(cyc)
        return cycles

    def cone_orders(self) -> List[int]:
        """Zero order (cone angle / 2pi - 1) of every vertex class."""
        return [len(c) // 4 - 1 for c in self.sector_cycles()]

    def genus(self) -> int:
        # V - E + F = 2 - 2g with E = 2N, F = N
        V = len(self.sector_cycles())
        N = self.n_squares
        g2 = 2 - V + N
        if g2 % 2:
            raise InconsistentComplex("odd Euler characteristic")
        return g2 // 2


@dataclass
class UnfoldedSurface:
    """Four-copy unfolding of (lattice, polygon), rescaled to unit squares."""

    origami: Origami
    scale: int                       # original length * scale = integer chart length
    period: Tuple[int, int, int]     # lattice HNF (A, B, C): v1=(A,B), v2=(0,C)
    squares: List[Tuple[Copy, Cell]]
    index: Dict[Tuple[Copy, Cell], int]
    mirror2: Tuple[int, int]         # (2*Mx, 2*My): doubled reflection axes (scaled)
    blocked_v: Set[Cell]             # vertical unit edges on obstacle boundary (reduced)
    blocked_h: Set[Cell]
    obstacle_cells: Set[Cell]
    corner_positions: Set[Cell]      # reduced grid positions of obstacle corners
    lattice: LatticeBasis
    polygon: RectilinearPolygon

    def area(self) -> Fraction:
        return Fraction(self.origami.n_squares, self.scale * self.scale)

    def rep(self, x: int, y: int) -> Cell:
        A, B, C = self.period
        k = x // A
        return (x - k * A, (y - k * B) % C)


def _rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if hasattr(x, "is_rational"):
        if x.is_rational():
            return x.rational()
        raise NotCommensurable("irrational coordinate in unfolding data")
    raise NotCommensurable(f"cannot interpret coordinate {x!r}")


def _hnf(v1: Tuple[int, int], v2: Tuple[int, int]) -> Tuple[int, int, int]:
    """Hermite form of the integer lattice: basis (A, B), (0, C), A, C > 0."""
    (a1, b1), (a2, b2) = v1, v2
    # euclidean algorithm on x-components, tracking the full vectors
    while a2 != 0:
        q = a1 // a2
        a1, b1, a2, b2 = a2, b2, a1 - q * a2, b1 - q * b2
    # now a2 == 0: (a1, b1) has the x-gcd; (0, b2) spans the kernel line
    A, B = a1, b1
    C = abs(b2)
    if A < 0:
        A, B = -A, -B
    if A == 0 or C == 0:
        raise InvalidDims("degenerate lattice")
    B %= C
    return A, B, C


def unfold(lattice: LatticeBasis, polygon: RectilinearPolygon, anchor=(0, 0)) -> UnfoldedSurface:
    """Build the four-copy square-tiled unfolding of the billiard table.

    All coordinates must be rational (NotCommensurable otherwise) and the
    obstacle configuration must be invariant under reflections through the
    obstacle's horizontal and vertical symmetry axes (NotSymmetric otherwise).
    `anchor` translates the polygon before unfolding (the billiard dynamics is
    translation invariant; anchoring changes only the chart alignment)."""
    ax, ay = _rational(anchor[0]), _rational(anchor[1])
    coords: List[Fraction] = []
    for v in polygon.vertices:
        coords += [_rational(v[0]) + ax, _rational(v[1]) + ay]
    for v in (lattice.v1, lattice.v2):
        coords += [_rational(v[0]), _rational(v[1])]
    den = 1
    for c in coords:
        den = den * c.denominator // gcd(den, c.denominator)
    scale = den

    def s_int(x) -> int:
        f = _rational(x) * scale
        assert f.denominator == 1
        return f.numerator

    L1 = (s_int(lattice.v1[0]), s_int(lattice.v1[1]))
    L2 = (s_int(lattice.v2[0]), s_int(lattice.v2[1]))
    A, B, C = _hnf(L1, L2)
    period = (A, B, C)

    def rep(x: int, y: int) -> Cell:
        k = x // A
        return (x - k * A, (y - k * B) % C)

    # scaled integer vertices of the anchored polygon
    verts = [(s_int(_rational(v[0]) + ax), s_int(_rational(v[1]) + ay)) for v in polygon.vertices]
    # mirror axes: the polygon's bounding-box center (doubled, stays integer)
    xs = [p[0] for p in verts]
    ys = [p[1] for p in verts]
    mir2 = (min(xs) + max(xs), min(ys) + max(ys))

    # boundary unit edges, reduced
    blocked_v: Set[Cell] = set()
    blocked_h: Set[Cell] = set()
    nv = len(verts)
    for i in range(nv):
        (x1, y1), (x2, y2) = verts[i], verts[(i + 1) % nv]
        if x1 == x2:
            for y in range(min(y1, y2), max(y1, y2)):
                blocked_v.add(rep(x1, y))
        else:
            for x in range(min(x1, x2), max(x1, x2)):
                blocked_h.add(rep(x, y1))

    # obstacle cells: unit cells with center strictly inside the polygon
    obstacle: Set[Cell] = set()
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    half = Fraction(1, 2)
    for x in range(x_lo, x_hi):
        for y in range(y_lo, y_hi):
            cx = Fraction(2 * x + 1, 2 * scale) - ax
            cy = Fraction(2 * y + 1, 2 * scale) - ay
            if polygon.contains((cx, cy), strict=True):
                obstacle.add(rep(x, y))
    expected = _rational(polygon.area()) * scale * scale
    if expected.denominator != 1 or len(obstacle) != expected.numerator:
        raise NotAdmissible("obstacle overlaps its lattice translates")
    if len(obstacle) >= A * C:
        raise NotAdmissible("obstacle fills the torus")

    # reflection symmetry of the reduced configuration
    M2x, M2y = mir2

    def mx_cell(c: Cell) -> Cell:
        return rep(M2x - c[0] - 1, c[1])

    def my_cell(c: Cell) -> Cell:
        return rep(c[0], M2y - c[1] - 1)

    for cset, mapper in ((obstacle, mx_cell), (obstacle, my_cell)):
        if {mapper(c) for c in cset} != cset:
            raise NotSymmetric("configuration not reflection symmetric")
    if {rep(M2x - e[0], e[1]) for e in blocked_v} != blocked_v or \
       {rep(e[0], M2y - e[1] - 1) for e in blocked_v} != blocked_v:
        raise NotSymmetric("wall set not reflection symmetric")
    if {rep(M2x - e[0] - 1, e[1]) for e in blocked_h} != blocked_h or \
       {rep(e[0], M2y - e[1]) for e in blocked_h} != blocked_h:
        raise NotSymmetric("wall set not reflection symmetric")

    free = sorted(
        (x, y) for x in range(A) for y in range(C) if (x, y) not in obstacle
    )
    squares: List[Tuple[Copy, Cell]] = [(c, cell) for c in COPIES for cell in free]
    index = {sq: i for i, sq in enumerate(squares)}

    h = [0] * len(squares)
    v = [0] * len(squares)
    for idx, ((i, j), (x, y)) in enumerate(squares):
        e = rep(x + 1, y)
        if e in blocked_v:
            h[idx] = index[((1 - i, j), rep(M2x - (x + 1), y))]
        else:
            h[idx] = index[((i, j), e)]
        e = rep(x, y + 1)
        if e in blocked_h:
            v[idx] = index[((i, 1 - j), rep(x, M2y - (y + 1)))]
        else:
            v[idx] = index[((i, j), e)]

    origami = Origami(h, v)

    corner_positions = {rep(p[0], p[1]) for p in verts}
    return UnfoldedSurface(
        origami=origami,
        scale=scale,
        period=period,
        squares=squares,
        index=index,
        mirror2=mir2,
        blocked_v=blocked_v,
        blocked_h=blocked_h,
        obstacle_cells=obstacle,
        corner_positions=corner_positions,
        lattice=lattice,
        polygon=polygon,
    )


def to_origami(surface_or_lattice, polygon: Optional[RectilinearPolygon] = None, anchor=(0, 0)) -> Origami:
    """The square-tiled model of an unfolding (building it if given raw data)."""
    if isinstance(surface_or_lattice, UnfoldedSurface):
        return surface_or_lattice.origami
    return unfold(surface_or_lattice, polygon, anchor).origami


def _sector_position(surface: UnfoldedSurface, sector: int) -> Cell:
    """Reduced grid position of a sector's corner point."""
    sq, slot = divmod(sector, 4)
    _, (x, y) = surface.squares[sq]
    dx = 1 if slot in (BR, TR) else 0
    dy = 1 if slot in (TR, TL) else 0
    return surface.rep(x + dx, y + dy)


def genus_and_stratum(surface: UnfoldedSurface) -> Tuple[int, Tuple[int, ...]]:
    """Genus and the multiset of zero orders (marked regular points included).

    Zeros/marked points are the vertex classes located at obstacle corner
    positions; every class with cone angle > 2*pi must be such a class."""
    og = surface.origami
    cycles = og.sector_cycles()
    g = og.genus()
    orders: List[int] = []
    for cyc in cycles:
        order = len(cyc) // 4 - 1
        at_corner = any(
            _sector_position(surface, sec) in surface.corner_positions for sec in cyc
        )
        if at_corner:
            orders.append(order)
        elif order != 0:
            raise InconsistentComplex("cone point away from obstacle corners")
    if sum(orders) != 2 * g - 2:
        raise InconsistentComplex("Gauss-Bonnet mismatch")
    return g, tuple(sorted(orders))

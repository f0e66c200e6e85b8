"""Centrally-symmetric rectilinear obstacles and lattice admissibility.

Coordinates are exact (Fraction or QNum).  Polygons are vertex loops of
axis-parallel edges, centered at the origin (central symmetry P = -P).
Slits are represented as doubled edge pairs ending in a tip vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import EulerViolation, InvalidDims, MalformedPolygon
from .qfield import QNum, to_exact

Point = Tuple[object, object]  # exact numbers


def _ex(x):
    return to_exact(x)


def _pt(p) -> Point:
    return (_ex(p[0]), _ex(p[1]))


def _sign(x) -> int:
    if isinstance(x, QNum):
        return x.sign()
    return (x > 0) - (x < 0)


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeBasis:
    """Rank-2 lattice spanned by v1, v2 (exact coordinates)."""

    v1: Point
    v2: Point

    def __post_init__(self):
        object.__setattr__(self, "v1", _pt(self.v1))
        object.__setattr__(self, "v2", _pt(self.v2))
        if self.det() == 0:
            raise InvalidDims("lattice basis is degenerate")

    def det(self):
        return self.v1[0] * self.v2[1] - self.v1[1] * self.v2[0]

    def covolume(self):
        d = self.det()
        return -d if _sign(d) < 0 else d

    def vector(self, m1: int, m2: int) -> Point:
        return (
            m1 * self.v1[0] + m2 * self.v2[0],
            m1 * self.v1[1] + m2 * self.v2[1],
        )

    def reduced(self) -> "LatticeBasis":
        """Lagrange-reduced basis (shortest vector first)."""
        u, w = self.v1, self.v2

        def n2(a):
            return a[0] * a[0] + a[1] * a[1]

        def sub(a, b, k):
            return (a[0] - k * b[0], a[1] - k * b[1])

        while True:
            if n2(w) < n2(u):
                u, w = w, u
            dot = u[0] * w[0] + u[1] * w[1]
            ratio = dot / n2(u)
            # nearest integer to an exact ratio
            if isinstance(ratio, QNum):
                k = (ratio + Fraction(1, 2)).floor()
            else:
                k = (ratio + Fraction(1, 2)).__floor__()
            if k == 0:
                break
            w = sub(w, u, k)
        return LatticeBasis(u, w)

    def vectors_in_ball(self, radius) -> List[Tuple[int, int, Point]]:
        """All nonzero lattice vectors with |v| <= radius, with coefficients
        relative to this (unreduced) basis."""
        red = self.reduced()
        u, w = red.v1, red.v2
        r2 = radius * radius
        cov = red.covolume()

        def norm(a):
            v = a[0] * a[0] + a[1] * a[1]
            return v

        # |m1| <= radius * |w| / covol, |m2| <= radius * |u| / covol (Cramer)
        def bound(other):
            n = norm(other)
            # ceil(radius * sqrt(n) / cov): use float overestimate then verify
            est = float(radius) * float(n) ** 0.5 / float(cov)
            return int(est) + 2

        b1, b2 = bound(w), bound(u)
        out = []
        for m1 in range(-b1, b1 + 1):
            for m2 in range(-b2, b2 + 1):
                if m1 == 0 and m2 == 0:
                    continue
                v = red.vector(m1, m2)
                if norm(v) <= r2:
                    # convert reduced coords back: we only need the vector
                    out.append((m1, m2, v))
        return out


# ---------------------------------------------------------------------------
# segment primitives (exact)
# ---------------------------------------------------------------------------


def _between(a, x, b) -> bool:
    """Is x in [min(a,b), max(a,b)]?"""
    lo, hi = (a, b) if a <= b else (b, a)
    return lo <= x <= hi


def on_segment(p: Point, a: Point, b: Point) -> bool:
    """p on closed axis-parallel segment [a, b]."""
    if a[0] == b[0]:
        return p[0] == a[0] and _between(a[1], p[1], b[1])
    return p[1] == a[1] and _between(a[0], p[0], b[0])


def segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Do closed axis-parallel segments [a,b] and [c,d] intersect?"""
    ab_vert = a[0] == b[0]
    cd_vert = c[0] == d[0]
    if ab_vert and cd_vert:
        if a[0] != c[0]:
            return False
        lo1, hi1 = sorted((a[1], b[1]))
        lo2, hi2 = sorted((c[1], d[1]))
        return not (hi1 < lo2 or hi2 < lo1)
    if not ab_vert and not cd_vert:
        if a[1] != c[1]:
            return False
        lo1, hi1 = sorted((a[0], b[0]))
        lo2, hi2 = sorted((c[0], d[0]))
        return not (hi1 < lo2 or hi2 < lo1)
    if ab_vert:
        (a, b), (c, d) = (c, d), (a, b)
    # now [a,b] horizontal, [c,d] vertical
    return _between(a[0], c[0], b[0]) and _between(c[1], a[1], d[1])


def segment_meets_open_rect(a: Point, b: Point, lo: Point, hi: Point) -> bool:
    """Does closed axis segment [a,b] meet the open rectangle (lo, hi)?"""
    if lo[0] >= hi[0] or lo[1] >= hi[1]:
        return False
    if a[0] == b[0]:  # vertical
        if not (lo[0] < a[0] < hi[0]):
            return False
        y1, y2 = sorted((a[1], b[1]))
        return y2 > lo[1] and y1 < hi[1]
    if not (lo[1] < a[1] < hi[1]):
        return False
    x1, x2 = sorted((a[0], b[0]))
    return x2 > lo[0] and x1 < hi[0]


# ---------------------------------------------------------------------------
# polygons
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CornerCensus:
    """Half-counts of corner types of a centrally-symmetric rectilinear polygon.

    m1: exterior angle pi/2 (concave corners), m3: exterior angle 3*pi/2
    (convex corners), m4: exterior angle 2*pi (slit tips)."""

    m1: int
    m3: int
    m4: int

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.m1, self.m3, self.m4)

    def check(self) -> None:
        if -2 * self.m1 + 2 * self.m3 + 4 * self.m4 != 4:
            raise EulerViolation(f"census {self.as_tuple()} violates the angle identity")

    def genus(self) -> int:
        return 2 * self.m3 + 2 * self.m4 + 1

    def stratum(self) -> Tuple[int, ...]:
        """Orders of the zeros of the unfolded translation surface, sorted."""
        return tuple(sorted([0] * (2 * self.m1) + [1] * (4 * self.m4) + [2] * (2 * self.m3)))


@dataclass
class RectilinearPolygon:
    """Centrally-symmetric rectilinear obstacle, possibly with slits.

    vertices: the boundary loop (consecutive vertices joined by axis-parallel
    edges; the loop is closed implicitly).  Normalized to ccw orientation;
    the original orientation is kept in `ccw_input`."""

    vertices: List[Point]
    labels: Dict[str, Point] = field(default_factory=dict)
    ccw_input: bool = True

    def __post_init__(self):
        vs = [_pt(v) for v in self.vertices]
        if len(vs) < 4:
            raise MalformedPolygon("need at least 4 vertices")
        # drop an explicit closing vertex
        if vs[0] == vs[-1]:
            vs = vs[:-1]
        # validate axis-parallel edges, no zero edges
        n = len(vs)
        for i in range(n):
            a, b = vs[i], vs[(i + 1) % n]
            if a == b:
                raise MalformedPolygon("zero-length edge")
            if a[0] != b[0] and a[1] != b[1]:
                raise MalformedPolygon("edge not axis-parallel")
        area2 = 0
        for i in range(n):
            a, b = vs[i], vs[(i + 1) % n]
            area2 = area2 + (a[0] * b[1] - b[0] * a[1])
        if _sign(area2) == 0:
            raise MalformedPolygon("degenerate (zero-area) polygon")
        if _sign(area2) < 0:
            vs = [vs[0]] + vs[:0:-1]
            self.ccw_input = False
            area2 = -area2
        self.vertices = vs
        self._area2 = area2
        self._check_symmetry()
        self._check_simplicity()

    # -- basic data ---------------------------------------------------------

    def edges(self) -> List[Tuple[Point, Point]]:
        vs = self.vertices
        n = len(vs)
        return [(vs[i], vs[(i + 1) % n]) for i in range(n)]

    def area(self):
        return self._area2 / 2

    def bbox(self) -> Tuple[Point, Point]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), min(ys)), (max(xs), max(ys))

    def circumradius_sq(self):
        return max(v[0] * v[0] + v[1] * v[1] for v in self.vertices)

    def diameter_sq(self):
        return 4 * self.circumradius_sq()

    # -- validation -----------------------------------------------------------

    def _check_symmetry(self):
        segs = set()
        for a, b in self.edges():
            key = tuple(sorted([(a[0], a[1]), (b[0], b[1])]))
            segs.add(key)
        for a, b in self.edges():
            key = tuple(sorted([(-a[0], -a[1]), (-b[0], -b[1])]))
            if key not in segs:
                raise MalformedPolygon("polygon is not centrally symmetric")

    def _check_simplicity(self):
        """Edges may meet only at shared endpoints, except exact reversed
        duplicates (slit edge pairs)."""
        E = self.edges()
        n = len(E)
        for i in range(n):
            a, b = E[i]
            for j in range(i + 1, n):
                c, d = E[j]
                if {a, b} == {c, d}:
                    continue  # slit pair (same segment traversed twice)
                if not segments_touch(a, b, c, d):
                    continue
                # two axis segments that are not collinear-overlapping meet in
                # at most one point; that point must be an endpoint of both
                shared = {a, b} & {c, d}
                if len(shared) != 1 or _collinear_overlap(a, b, c, d):
                    raise MalformedPolygon("boundary self-intersects")

    # -- point location ---------------------------------------------------------

    def on_boundary(self, p: Point) -> bool:
        return any(on_segment(p, a, b) for a, b in self.edges())

    def contains(self, p: Point, strict: bool = False) -> bool:
        """Point-in-closed-region test (slit edges cancel in the crossing count)."""
        if self.on_boundary(p):
            return not strict
        # ray cast to the east; count crossings of vertical edge interiors,
        # with the half-open convention [y_lo, y_hi)
        cnt = 0
        for a, b in self.edges():
            if a[0] != b[0]:
                continue
            x = a[0]
            if x <= p[0]:
                continue
            ylo, yhi = (a[1], b[1]) if a[1] < b[1] else (b[1], a[1])
            if ylo <= p[1] < yhi:
                cnt += 1
        return cnt % 2 == 1

    def translated(self, rho: Point) -> List[Tuple[Point, Point]]:
        r = _pt(rho)
        return [((a[0] + r[0], a[1] + r[1]), (b[0] + r[0], b[1] + r[1])) for a, b in self.edges()]


def _collinear_overlap(a, b, c, d) -> bool:
    """Do collinear segments [a,b], [c,d] overlap in more than a point?"""
    if a[0] == b[0] == c[0] == d[0]:
        lo1, hi1 = sorted((a[1], b[1]))
        lo2, hi2 = sorted((c[1], d[1]))
        return min(hi1, hi2) > max(lo1, lo2)
    if a[1] == b[1] == c[1] == d[1]:
        lo1, hi1 = sorted((a[0], b[0]))
        lo2, hi2 = sorted((c[0], d[0]))
        return min(hi1, hi2) > max(lo1, lo2)
    return False


# ---------------------------------------------------------------------------
# corner census
# ---------------------------------------------------------------------------


def corner_census(poly: RectilinearPolygon) -> CornerCensus:
    """Classify corners by turning number along the ccw boundary loop."""
    vs = poly.vertices
    n = len(vs)
    c1 = c3 = c4 = 0
    for i in range(n):
        a = vs[(i - 1) % n]
        b = vs[i]
        c = vs[(i + 1) % n]
        d1 = (_sign(b[0] - a[0]), _sign(b[1] - a[1]))
        d2 = (_sign(c[0] - b[0]), _sign(c[1] - b[1]))
        if d1 == d2:
            raise MalformedPolygon("collinear consecutive edges")
        if d2 == (-d1[0], -d1[1]):
            c4 += 1  # slit tip: direction reversal, exterior angle 2*pi
            continue
        cross = d1[0] * d2[1] - d1[1] * d2[0]
        if cross > 0:
            c3 += 1  # convex corner (exterior 3*pi/2 after unfolding)
        else:
            c1 += 1  # concave corner (exterior pi/2)
    if c1 % 2 or c3 % 2 or c4 % 2:
        raise MalformedPolygon("corner counts not even (symmetry broken)")
    census = CornerCensus(c1 // 2, c3 // 2, c4 // 2)
    if -2 * census.m1 + 2 * census.m3 + 4 * census.m4 != 4:
        raise EulerViolation(
            f"census {census.as_tuple()} violates -2*m1 + 2*m3 + 4*m4 = 4"
        )
    return census


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------


def polygons_overlap(P: RectilinearPolygon, rho: Point) -> bool:
    """Do the closed regions P and P + rho intersect (touching counts)?"""
    E0 = P.edges()
    E1 = P.translated(rho)
    for a, b in E0:
        for c, d in E1:
            if segments_touch(a, b, c, d):
                return True
    r = _pt(rho)
    # containment without boundary contact
    if P.contains((P.vertices[0][0] + r[0], P.vertices[0][1] + r[1])):
        return True
    if P.contains((P.vertices[0][0] - r[0], P.vertices[0][1] - r[1])):
        return True
    return False


def is_admissible(lattice: LatticeBasis, poly: RectilinearPolygon) -> bool:
    """No two lattice translates of the obstacle intersect.

    It suffices to test lattice vectors with |rho| <= 2 * circumradius: any
    overlap forces |rho| <= diam(P) <= 2 * circumradius."""
    r2 = poly.circumradius_sq()
    # radius = 2 * circumradius, exact comparison via squares
    seen = set()
    for m1, m2, v in lattice.vectors_in_ball(_SqrtBound(4 * r2)):
        key = (v[0], v[1])
        if key in seen:
            continue
        seen.add(key)
        if polygons_overlap(poly, v):
            return False
    return True


class _SqrtBound:
    """Represents sqrt(value) for use as a radius in vectors_in_ball:
    supports radius*radius (exact) and float()."""

    def __init__(self, sq):
        self.sq = sq

    def __mul__(self, other):
        if isinstance(other, _SqrtBound):
            return self.sq if self.sq == other.sq else None
        return NotImplemented

    def __float__(self):
        return float(self.sq) ** 0.5


# ---------------------------------------------------------------------------
# suckered rectangles
# ---------------------------------------------------------------------------


def make_suckered_rectangle(kind: str, width, height, slit, offset=None) -> RectilinearPolygon:
    """Rectangle with two symmetric slits ("suckers") and labeled corners.

    kind 'a': vertical slits at x = 0 (top and bottom edges).
    kind 'b': vertical slits at x = +offset (top) and x = -offset (bottom).
    kind 'c': horizontal slits at y = 0 (right and left edges).

    Labels: V_r / V_l the distinguished right/left corners, V_t / V_b the
    slit tips (types a, b), A_0, A_0', A_1, A_1' the slit-base corner visits
    used by the free-pair construction."""
    w = _ex(width)
    h = _ex(height)
    s = _ex(slit)
    if not (_sign(w) > 0 and _sign(h) > 0 and _sign(s) > 0):
        raise InvalidDims("width, height, slit must be positive")
    w2, h2 = w / 2, h / 2
    zero = w - w
    if kind == "a":
        off = zero
    elif kind == "b":
        if offset is None:
            raise InvalidDims("type b needs an offset")
        off = _ex(offset)
        if not (_sign(off) > 0 and off < w2):
            raise InvalidDims("type b needs 0 < offset < width/2")
    elif kind == "c":
        off = None
    else:
        raise InvalidDims(f"unknown kind {kind!r}")

    if kind in ("a", "b"):
        o = off
        verts = [
            (w2, -h2), (w2, h2),
            (o, h2), (o, h2 + s), (o, h2),
            (-w2, h2), (-w2, -h2),
            (-o, -h2), (-o, -h2 - s), (-o, -h2),
        ]
        labels = {
            "V_r": (w2, h2),
            "V_l": (-w2, -h2),
            "V_t": (o, h2 + s),
            "V_b": (-o, -h2 - s),
            "A_0": (o, h2),
            "A_0p": (-o, -h2),
            "A_1": (-o, -h2),
            "A_1p": (o, h2),
        }
    else:  # kind == "c"
        verts = [
            (w2, -h2), (w2, zero), (w2 + s, zero), (w2, zero),
            (w2, h2), (-w2, h2),
            (-w2, zero), (-w2 - s, zero), (-w2, zero),
            (-w2, -h2),
        ]
        labels = {
            "V_r": (w2 + s, zero),
            "V_l": (-w2 - s, zero),
            "V_t": (w2 + s, zero),
            "V_b": (-w2 - s, zero),
            "A_0": (w2, zero),
            "A_0p": (-w2, zero),
            "A_1": (w2, zero),
            "A_1p": (-w2, zero),
        }
    poly = RectilinearPolygon([_pt(v) for v in verts])
    poly.labels = {k: _pt(v) for k, v in labels.items()}
    poly.kind = kind  # type: ignore[attr-defined]
    return poly


def random_symmetric_polygon(rng) -> RectilinearPolygon:
    """Random centrally-symmetric rectilinear polygon (skyline family).

    Half-widths are an even skyline function f on columns [-n, n); with
    probability 1/2 a vertical slit pair is added at x = 0.  Adjacent column
    heights always differ, so no collinear vertices occur."""
    n = rng.randint(1, 5)
    heights = []
    prev = None
    for _ in range(n):
        h = Fraction(rng.randint(1, 12), rng.choice([1, 2, 3, 4]))
        while h == prev:
            h = Fraction(rng.randint(1, 12), rng.choice([1, 2, 3, 4]))
        heights.append(h)
        prev = h
    verts: List[Point] = []
    # right side, then top staircase from x=n to x=-n, then mirrored bottom
    f = heights  # f on [i, i+1) for i = 0..n-1, extended evenly
    verts.append((Fraction(n), -f[n - 1]))
    verts.append((Fraction(n), f[n - 1]))
    for i in range(n - 1, 0, -1):
        verts.append((Fraction(i), f[i]))
        verts.append((Fraction(i), f[i - 1]))
    slit = rng.random() < 0.5
    if slit:
        s = Fraction(rng.randint(1, 5), rng.choice([1, 2, 3]))
        verts.append((Fraction(0), f[0]))
        verts.append((Fraction(0), f[0] + s))
        verts.append((Fraction(0), f[0]))
    for i in range(0, n - 1):
        verts.append((Fraction(-i), f[i]))
        verts.append((Fraction(-(i + 1)), f[i]))
    verts.append((Fraction(-(n - 1)), f[n - 1]))
    verts.append((Fraction(-n), f[n - 1]))
    # bottom half = mirror image of the list so far (central symmetry)
    verts = verts + [(-x, -y) for x, y in verts]
    # deduplicate consecutive equal points created at the seams
    out: List[Point] = []
    for v in verts:
        if not out or out[-1] != v:
            out.append(v)
    if out[0] == out[-1]:
        out.pop()
    # merge collinear straight-through vertices (seams without slits), keeping
    # genuine slit reversals intact
    cleaned: List[Point] = []
    m = len(out)
    for idx in range(m):
        a, b, c = out[(idx - 1) % m], out[idx], out[(idx + 1) % m]
        d1 = (_sign(b[0] - a[0]), _sign(b[1] - a[1]))
        d2 = (_sign(c[0] - b[0]), _sign(c[1] - b[1]))
        if d1 == d2:
            continue
        cleaned.append(b)
    return RectilinearPolygon(cleaned)


def make_rectangle(width, height) -> RectilinearPolygon:
    w2 = _ex(width) / 2
    h2 = _ex(height) / 2
    if not (_sign(w2) > 0 and _sign(h2) > 0):
        raise InvalidDims("width and height must be positive")
    return RectilinearPolygon([(w2, -h2), (w2, h2), (-w2, h2), (-w2, -h2)])

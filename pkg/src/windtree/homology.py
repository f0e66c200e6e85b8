"""Integer homology of square-tiled surfaces with exact intersection form.

Edges of the cell structure: edge s (0 <= s < N) is the bottom edge of square
s (oriented east), edge N + s is the left edge (oriented north).  Cycles are
integer edge vectors; a spanning tree of the 1-skeleton gives fundamental
cycles, and H1 is the quotient by face boundaries (computed via Smith form;
the quotient is free, which is asserted).

The intersection form is computed from local crossing data at vertices: each
passage of a closed walk through a vertex is a chord between edge-end slots
of the ccw sector cycle; two chords contribute +-1 when their endpoints
interleave.  The first walk of a pairing uses center slots, the second walk
side slots (cw side in, ccw side out); the sign is +1 iff the second walk's
incoming slot lies on the ccw arc from the first walk's incoming to outgoing
slot.  The convention is calibrated on the one-square torus where the bottom
edge sigma and left edge zeta satisfy <sigma, zeta> = +1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linal
from .errors import DimensionMismatch, InconsistentComplex, NotSymmetric
from .intmat import smith_basis, vec_in_basis
from .surface import BL, BR, TL, TR, Origami, UnfoldedSurface

Walk = List[Tuple[int, int]]  # (edge id, +1/-1)


class HomologyModel:
    def __init__(self, origami: Origami, validate: bool = True):
        og = origami
        self.origami = og
        N = og.n_squares
        self.n_edges = 2 * N

        # vertex classes and edge-end slots
        cycles = og.sector_cycles()
        self.cycles = cycles
        sec_class = [0] * (4 * N)
        sec_pos = [0] * (4 * N)
        for ci, cyc in enumerate(cycles):
            for pos, sec in enumerate(cyc):
                sec_class[sec] = ci
                sec_pos[sec] = pos
        self._sec_class = sec_class
        self._sec_pos = sec_pos

        # sector emitting each edge end: (edge, is_head) -> sector
        end_sector: Dict[Tuple[int, bool], int] = {}
        for s in range(N):
            end_sector[(s, False)] = 4 * s + BL            # sigma_s tail
            end_sector[(N + og.h[s], False)] = 4 * s + BR  # zeta_{h(s)} tail
            end_sector[(og.v[s], True)] = 4 * s + TR       # sigma_{v(s)} head
            end_sector[(N + s, True)] = 4 * s + TL         # zeta_s head
        if len(end_sector) != 4 * N:
            raise InconsistentComplex("edge-end emission not bijective")
        self._end_sector = end_sector

        # spanning tree over vertex classes
        V = len(cycles)
        adj: List[List[Tuple[int, int, int]]] = [[] for _ in range(V)]  # (edge, sign, to)
        for e in range(2 * N):
            t = sec_class[end_sector[(e, False)]]
            h = sec_class[end_sector[(e, True)]]
            adj[t].append((e, 1, h))
            adj[h].append((e, -1, t))
        parent: List[Optional[Tuple[int, int, int]]] = [None] * V  # (edge, sign, parent class)
        depth = [0] * V
        order = [0]
        seen = [False] * V
        seen[0] = True
        tree_edges = set()
        queue = [0]
        while queue:
            u = queue.pop(0)
            for e, sgn, w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = (e, sgn, u)
                    depth[w] = depth[u] + 1
                    tree_edges.add(e)
                    queue.append(w)
        if not all(seen):
            raise InconsistentComplex("1-skeleton not connected")
        self._parent = parent
        self._depth = depth
        self._tree_edges = tree_edges
        self.fund_edges = [e for e in range(2 * N) if e not in tree_edges]
        self._fund_index = {e: i for i, e in enumerate(self.fund_edges)}
        nf = len(self.fund_edges)

        def edge_tail(e: int) -> int:
            return sec_class[end_sector[(e, False)]]

        def edge_head(e: int) -> int:
            return sec_class[end_sector[(e, True)]]

        self._edge_tail = edge_tail
        self._edge_head = edge_head

        def tree_path(u: int, v: int) -> Walk:
            """Walk along tree edges from class u to class v."""
            up_u: Walk = []
            up_v: Walk = []
            uu, vv = u, v
            while depth[uu] > depth[vv]:
                e, sgn, p = parent[uu]
                up_u.append((e, -sgn))
                uu = p
            while depth[vv] > depth[uu]:
                e, sgn, p = parent[vv]
                up_v.append((e, -sgn))
                vv = p
            while uu != vv:
                e, sgn, p = parent[uu]
                up_u.append((e, -sgn))
                uu = p
                e, sgn, p = parent[vv]
                up_v.append((e, -sgn))
                vv = p
            return up_u + [(e, -sgn) for e, sgn in reversed(up_v)]

        self._tree_path = tree_path

        # fundamental cycles as closed walks: the extra edge plus the tree path back
        self.fund_walks: List[Walk] = []
        for e in self.fund_edges:
            walk = [(e, 1)] + tree_path(edge_head(e), edge_tail(e))
            self.fund_walks.append(walk)

        # face boundary relations in fundamental coordinates
        face_rows: List[List[int]] = []
        self.face_walks: List[Walk] = []
        for s in range(N):
            walk: Walk = [(s, 1), (N + og.h[s], 1), (og.v[s], -1), (N + s, -1)]
            self.face_walks.append(walk)
            vec = [0] * nf
            for e, sgn in walk:
                if e in self._fund_index:
                    vec[self._fund_index[e]] += sgn
            face_rows.append(vec)

        d, T, Tinv = smith_basis(face_rows, nf)
        if any(abs(x) != 1 for x in d):
            raise InconsistentComplex("H1 has torsion (bug)")
        self._rank_rel = len(d)
        self._T = T
        self._Tinv = Tinv
        self.rank = nf - len(d)
        g = og.genus()
        if self.rank != 2 * g:
            raise InconsistentComplex("homology rank disagrees with genus")
        self.genus = g

        # H1 basis in fundamental coordinates
        self.basis_fund = [T[i] for i in range(len(d), nf)]

        # intersection form on fundamental cycles, then on the H1 basis
        omega_fund = [[0] * nf for _ in range(nf)]
        buckets = self._passage_buckets([self.fund_walks[i] for i in range(nf)])
        for passages in buckets.values():
            for ai in range(len(passages)):
                wi, a_in, a_out, L = passages[ai]
                for bi in range(len(passages)):
                    if ai == bi:
                        continue
                    wj, b_in, b_out, _ = passages[bi]
                    if wi == wj:
                        continue
                    omega_fund[wi][wj] += _chord_sign(a_in, a_out, b_in, b_out, L)
        self._omega_fund = omega_fund

        B = self.basis_fund
        n2g = self.rank
        mid = []
        for i in range(n2g):
            row = [0] * nf
            Bi = B[i]
            for a in range(nf):
                ca = Bi[a]
                if not ca:
                    continue
                Oa = omega_fund[a]
                for b in range(nf):
                    if Oa[b]:
                        row[b] += ca * Oa[b]
            mid.append(row)
        self.omega = [
            [sum(mid[i][b] * B[j][b] for b in range(nf) if mid[i][b]) for j in range(n2g)]
            for i in range(n2g)
        ]

        if validate:
            self._validate()

        # holonomy of the basis classes (in chart units)
        self.basis_edge_vectors = [self._fund_to_edges(b) for b in self.basis_fund]
        Nn = og.n_squares
        self.hol_basis = [
            (sum(vec[:Nn]), sum(vec[Nn:])) for vec in self.basis_edge_vectors
        ]
        self.named: Dict[str, List[int]] = {}

    # ------------------------------------------------------------------

    def _passage_buckets(self, walks: Sequence[Walk]):
        """Group walk passages by vertex class.

        Entry: (walk index, in slot, out slot, circle size). The slots here
        are raw ccw sector positions; _chord_sign applies the 3x sub-slot
        offsets for the two roles."""
        buckets: Dict[int, List[Tuple[int, int, int, int]]] = {}
        for wi, walk in enumerate(walks):
            m = len(walk)
            for k in range(m):
                e, sgn = walk[k]
                f, sgn2 = walk[(k + 1) % m]
                in_end = (e, sgn > 0)
                out_end = (f, sgn2 < 0)
                sec_in = self._end_sector[in_end]
                sec_out = self._end_sector[out_end]
                c_in = self._sec_class[sec_in]
                c_out = self._sec_class[sec_out]
                if c_in != c_out:
                    raise InconsistentComplex("walk is not connected at a vertex")
                L = len(self.cycles[c_in])
                buckets.setdefault(c_in, []).append(
                    (wi, self._sec_pos[sec_in], self._sec_pos[sec_out], L)
                )
        return buckets

    def pair_walks(self, w1: Walk, w2: Walk) -> int:
        """Intersection number of two closed walks."""
        total = 0
        b1 = self._passage_buckets([w1])
        b2 = self._passage_buckets([w2])
        for cls, plist in b1.items():
            if cls not in b2:
                continue
            for (_, a_in, a_out, L) in plist:
                for (_, c_in, c_out, _) in b2[cls]:
                    total += _chord_sign(a_in, a_out, c_in, c_out, L)
        return total

    def _fund_to_edges(self, fund_vec: Sequence[int]) -> List[int]:
        vec = [0] * self.n_edges
        for i, c in enumerate(fund_vec):
            if not c:
                continue
            for e, sgn in self.fund_walks[i]:
                vec[e] += c * sgn
        return vec

    def boundary(self, edge_vec: Sequence[int]) -> List[int]:
        V = len(self.cycles)
        out = [0] * V
        for e, c in enumerate(edge_vec):
            if not c:
                continue
            out[self._edge_tail(e)] -= c
            out[self._edge_head(e)] += c
        return out

    def reduce(self, edge_vec: Sequence[int]) -> List[int]:
        """H1 coordinates of a 1-cycle given as an integer edge vector."""
        if any(self.boundary(edge_vec)):
            raise InconsistentComplex("edge vector is not a cycle")
        fc = [edge_vec[e] for e in self.fund_edges]
        gamma = vec_in_basis(fc, self._Tinv)
        return gamma[self._rank_rel:]

    def reduce_walk(self, walk: Walk) -> List[int]:
        vec = [0] * self.n_edges
        for e, sgn in walk:
            vec[e] += sgn
        return self.reduce(vec)

    def pair(self, a: Sequence[int], b: Sequence[int]) -> int:
        """Intersection number of two classes in H1 coordinates."""
        return sum(
            a[i] * self.omega[i][j] * b[j]
            for i in range(self.rank)
            for j in range(self.rank)
            if a[i] and b[j]
        )

    def hol(self, coords: Sequence[int]) -> Tuple[int, int]:
        hx = sum(c * self.hol_basis[i][0] for i, c in enumerate(coords))
        hy = sum(c * self.hol_basis[i][1] for i, c in enumerate(coords))
        return (hx, hy)

    def project(self, rho: Sequence, basis: Sequence[Sequence]) -> List:
        """Symplectic projection of rho onto span(basis) (exact).

        p(rho) = sum_ij <rho, xi_i> (Xi^-1)_ij xi_j with Xi the pairing Gram
        matrix of the basis; requires the restriction of the form to the
        subspace to be nondegenerate."""
        k = len(basis)
        Xi = [[Fraction(self.pair(basis[i], basis[j])) for j in range(k)] for i in range(k)]
        Xinv = linal.inverse(Xi)
        pairings = [Fraction(self.pair(rho, basis[i])) for i in range(k)]
        out = [Fraction(0)] * self.rank
        for j in range(k):
            coef = sum(pairings[i] * Xinv[i][j] for i in range(k))
            if coef:
                for t in range(self.rank):
                    out[t] += coef * basis[j][t]
        return out

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "genus": self.genus,
            "intersection_matrix": self.omega,
            "hol_basis": self.hol_basis,
            "named_classes": {k: list(v) for k, v in self.named.items()},
        }

    # ------------------------------------------------------------------

    def _validate(self):
        nf = len(self.fund_edges)
        # face boundaries pair to zero against every fundamental cycle
        for fw in self.face_walks[: min(len(self.face_walks), 64)]:
            for i in range(min(nf, 64)):
                if self.pair_walks(fw, self.fund_walks[i]) != 0:
                    raise InconsistentComplex("face boundary has nonzero pairing")
        # skewness and unimodularity of the H1 intersection matrix
        n = self.rank
        for i in range(n):
            if self.omega[i][i] != 0:
                raise InconsistentComplex("intersection matrix not alternating")
            for j in range(n):
                if self.omega[i][j] != -self.omega[j][i]:
                    raise InconsistentComplex("intersection matrix not skew")
        d = linal.det([[Fraction(x) for x in row] for row in self.omega])
        if abs(d) != 1:
            raise InconsistentComplex(f"intersection form determinant {d} != +-1")


def _chord_sign(a_in: int, a_out: int, b_in: int, b_out: int, L: int) -> int:
    """Crossing contribution of chord b (side slots) against chord a (center slots)."""
    circle = 3 * L
    a1 = 3 * a_in + 1
    a2 = 3 * a_out + 1
    c = 3 * b_in
    d = 3 * b_out + 2
    if a1 == a2:
        return 0
    span = (a2 - a1) % circle
    c_in_arc = 0 < (c - a1) % circle < span
    d_in_arc = 0 < (d - a1) % circle < span
    if c_in_arc == d_in_arc:
        return 0
    return 1 if c_in_arc else -1


# ---------------------------------------------------------------------------
# named classes, involutions, splittings
# ---------------------------------------------------------------------------


def _free_row(surface: UnfoldedSurface) -> int:
    """A row y0 whose h-orbit rows carry no obstacle walls (loops stay in copy)."""
    A, B_, C = surface.period
    from math import gcd as _gcd

    k = C // _gcd(B_, C) if B_ else 1
    for y0 in range(C):
        rows = {(y0 - t * B_) % C for t in range(k)}
        if any((x, y) in surface.blocked_v for y in rows for x in range(A)):
            continue
        if any((x, y) in surface.obstacle_cells for y in rows for x in range(A)):
            continue
        return y0
    raise InconsistentComplex("no obstacle-free horizontal loop exists")


def _free_col(surface: UnfoldedSurface) -> int:
    A, B_, C = surface.period
    for x0 in range(A):
        if any((x0, y) in surface.blocked_h for y in range(C)):
            continue
        if any((x0, y) in surface.obstacle_cells for y in range(C)):
            continue
        return x0
    raise InconsistentComplex("no obstacle-free vertical loop exists")


def attach_named_classes(model: HomologyModel, surface: UnfoldedSurface) -> None:
    """Locate the straight core loops h_ij, v_ij and derived classes.

    h_ij: horizontal loop through an obstacle-free row of copy (i, j);
    v_ij: vertical loop through an obstacle-free column.  The same row and
    column are used for all four copies."""
    og = model.origami
    N = og.n_squares
    y0 = _free_row(surface)
    x0 = _free_col(surface)
    named: Dict[str, List[int]] = {}
    walks: Dict[str, Walk] = {}
    for (i, j) in ((0, 0), (1, 0), (0, 1), (1, 1)):
        s = surface.index[((i, j), (0, y0))]
        orbit = [s]
        cur = og.h[s]
        while cur != s:
            orbit.append(cur)
            cur = og.h[cur]
        if any(surface.squares[t][0] != (i, j) for t in orbit):
            raise InconsistentComplex("horizontal core loop leaves its copy")
        walks[f"h{i}{j}"] = [(t, 1) for t in orbit]

        s = surface.index[((i, j), (x0, 0))]
        orbit = [s]
        cur = og.v[s]
        while cur != s:
            orbit.append(cur)
            cur = og.v[cur]
        if any(surface.squares[t][0] != (i, j) for t in orbit):
            raise InconsistentComplex("vertical core loop leaves its copy")
        walks[f"v{i}{j}"] = [(N + t, 1) for t in orbit]

    for name, walk in walks.items():
        named[name] = model.reduce_walk(walk)
    model.named_walks = walks

    def lin(*terms):
        out = [0] * model.rank
        for coef, name in terms:
            for t, c in enumerate(named[name]):
                out[t] += coef * c
        return out

    named["h_0"] = lin((1, "h00"), (-1, "h11"))
    named["h_1"] = lin((1, "h10"), (-1, "h01"))
    named["v_0"] = lin((1, "v00"), (-1, "v11"))
    named["v_1"] = lin((1, "v10"), (-1, "v01"))
    named["gamma_h"] = [a + b for a, b in zip(named["h_0"], named["h_1"])]
    named["gamma_v"] = [a - b for a, b in zip(named["v_0"], named["v_1"])]
    named["sigma"] = model.reduce([1] * N + [0] * N)
    named["zeta"] = model.reduce([0] * N + [1] * N)
    model.named.update(named)


def _square_maps(surface: UnfoldedSurface):
    """Square permutations of the three involutions tau, zeta0, zeta1."""
    M2x, M2y = surface.mirror2
    idx = surface.index

    def tau(s: int) -> int:
        (i, j), cell = surface.squares[s]
        return idx[((1 - i, 1 - j), cell)]

    def zeta0(s: int) -> int:
        (i, j), (x, y) = surface.squares[s]
        return idx[((i, j), surface.rep(M2x - x - 1, M2y - y - 1))]

    def zeta1(s: int) -> int:
        return zeta0(tau(s))

    return {"tau": tau, "zeta0": zeta0, "zeta1": zeta1}


def involution_action(surface: UnfoldedSurface, model: HomologyModel, which: str):
    """Induced integer matrix on H1 (columns = images of basis classes).

    tau is a translation (edges map to like edges); zeta0 and zeta1 are
    point reflections (the bottom edge maps to the reversed top edge of the
    image square, the left edge to the reversed right edge)."""
    maps = _square_maps(surface)
    if which not in maps:
        raise ValueError(f"unknown involution {which!r}")
    sq_map = maps[which]
    og = model.origami
    N = og.n_squares

    def edge_image(e: int) -> Tuple[int, int]:
        if e < N:
            sp = sq_map(e)
            if which == "tau":
                return (sp, 1)
            return (og.v[sp], -1)
        s = e - N
        sp = sq_map(s)
        if which == "tau":
            return (N + sp, 1)
        return (N + og.h[sp], -1)

    cols = []
    for bvec in model.basis_edge_vectors:
        out = [0] * model.n_edges
        for e, c in enumerate(bvec):
            if not c:
                continue
            ei, sgn = edge_image(e)
            out[ei] += c * sgn
        cols.append(model.reduce(out))
    n = model.rank
    return [[cols[j][i] for j in range(n)] for i in range(n)]


@dataclass
class Splitting:
    K1: List[List[Fraction]]
    K0: List[List[Fraction]]
    Kperp: List[List[Fraction]]

    def dims(self) -> Tuple[int, int, int]:
        return (len(self.K1), len(self.K0), len(self.Kperp))


def splitting(model: HomologyModel, actions: Dict[str, list], census) -> Splitting:
    """K1 = Fix(zeta1*), K0 = Fix(zeta0*), Kperp = their joint symplectic
    orthocomplement; dimensions checked against the corner census."""
    n = model.rank

    def fix_space(M):
        A = [[Fraction(M[i][j]) - (1 if i == j else 0) for j in range(n)] for i in range(n)]
        return linal.nullspace(A)

    K1 = fix_space(actions["zeta1"])
    K0 = fix_space(actions["zeta0"])
    rows = []
    omega = model.omega
    for b in K1 + K0:
        rows.append([sum(b[i] * omega[i][j] for i in range(n) if b[i]) for j in range(n)])
    Kperp = linal.nullspace(rows) if rows else linal.identity(n)
    m1, m3, m4 = census.as_tuple()
    expect = (4, 2 * (m3 + m4 - 2), 2 * (m3 + m4 + 1))
    got = (len(K1), len(K0), len(Kperp))
    if got != expect:
        raise DimensionMismatch(f"splitting dims {got}, census predicts {expect}")
    if sum(got) != n:
        raise DimensionMismatch("splitting dimensions do not sum to 2g")
    return Splitting(K1=K1, K0=K0, Kperp=Kperp)


def origami_splitting(model: HomologyModel):
    """Tautological/zero-holonomy splitting of a plain origami's H1.

    Returns dict with sigma and zeta class coordinates, the kernel-of-holonomy
    subspace H1^(0) (dimension 2g - 2), and the tautological plane H1^st."""
    N = model.origami.n_squares
    sigma = model.reduce([1] * N + [0] * N)
    zeta = model.reduce([0] * N + [1] * N)
    n = model.rank
    hol_rows = [
        [Fraction(model.hol_basis[j][0]) for j in range(n)],
        [Fraction(model.hol_basis[j][1]) for j in range(n)],
    ]
    zero_space = linal.nullspace(hol_rows)
    if len(zero_space) != n - 2:
        raise DimensionMismatch("dim H1^(0) != 2g - 2")
    return {
        "sigma": sigma,
        "zeta": zeta,
        "st": [ [Fraction(c) for c in sigma], [Fraction(c) for c in zeta] ],
        "zero": zero_space,
    }

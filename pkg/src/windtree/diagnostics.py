"""Ergodicity diagnostics: finite-scale essential-value scans, an exact
algebraic witness constructor, and winding-growth reports over skew products.

The essential-value scan is a declared heuristic: it samples a grid of
starting points in every dyadic cell at a documented depth, records the
fiber displacements seen when an orbit returns to its starting cell, keeps
the displacements common to every cell, and closes them into a group within
a bounded window.  The report carries its (N, depth, window, grid)
provenance and never claims a verdict by itself.

The winding check iterates the integer-valued skew-product sums attached to
homology classes along first-return IET orbits (return counts grow linearly
with flow time, so growth exponents agree with flow-time exponents) and fits
a growth exponent to the running maximum.  Stable directions are estimated
from the smallest singular directions of the stacked winding matrices.
"""

from __future__ import annotations

import json
import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import linal
from .errors import (
    DimensionMismatch,
    IllConditioned,
    InsufficientData,
    PreconditionFail,
)
from .homology import HomologyModel
from .iet import DecoratedIET, poincare_section
from .qfield import QNum, qsqrt

__all__ = [
    "EssentialValueScan",
    "essential_value_scan",
    "rotation_map",
    "iet_observables",
    "AlglemWitness",
    "alglem_witness",
    "random_alglem_instance",
    "WindingReport",
    "winding_series",
    "bounded_winding_check",
    "growth_exponent",
    "StableEstimate",
    "stable_space_estimate",
]


# ---------------------------------------------------------------------------
# essential-value scan
# ---------------------------------------------------------------------------


@dataclass
class EssentialValueScan:
    """Observed finite-scale essential values with full scan provenance."""

    observed: List[Tuple[int, ...]]
    scale: int
    depth: int
    window: int
    grid: int
    description: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {
                "observed": [list(g) for g in self.observed],
                "scale": self.scale,
                "depth": self.depth,
                "window": self.window,
                "grid": self.grid,
                "test_sets": f"dyadic depth-{self.depth} cells, "
                             f"{self.grid} grid points each",
                "description": self.description,
            },
            indent=1,
        )


def rotation_map(alpha: float) -> Callable[[float], float]:
    """Circle rotation x -> x + alpha mod 1."""

    def tmap(x: float) -> float:
        y = x + alpha
        return y - math.floor(y)

    return tmap


def iet_observables(iet: DecoratedIET, gammas: Sequence[Sequence[int]]):
    """(tmap, psi, breakpoints) on the unit interval for a decorated IET.

    The IET domain [0, L) is rescaled to [0, 1); psi(x) is the tuple of
    pairings <gamma, xi_alpha> of the interval containing x."""
    f = iet.floatify() if iet.exact else iet
    L = float(f.total_length())
    starts = f.domain_starts()
    cuts = sorted(float(starts[k]) / L for k in f.top)[1:]
    order = sorted(f.top, key=lambda k: float(starts[k]))
    trans = [float(t) / L for t in f.translations()]
    model = f.model
    inc = [
        tuple(model.pair(list(g), f.xi[k]) for g in gammas)
        for k in range(len(f.top))
    ]

    def label(x: float) -> int:
        return order[bisect_right(cuts, x)]

    def tmap(x: float) -> float:
        y = x + trans[label(x)]
        if y < 0.0:
            y += 1.0
        elif y >= 1.0:
            y -= 1.0
        return y

    def psi(x: float) -> Tuple[int, ...]:
        return inc[label(x)]

    return tmap, psi, [0.0] + cuts + [1.0]


def _in_window(g: Tuple[int, ...], window: int) -> bool:
    return all(abs(c) <= window for c in g)


def _group_closure(base, d: int, window: int) -> List[Tuple[int, ...]]:
    """Group generated by `base` intersected with the coordinate window."""
    zero = tuple(0 for _ in range(d))
    seen = {zero}
    frontier = [zero]
    gens = set()
    for g in base:
        if _in_window(g, window):
            gens.add(g)
            gens.add(tuple(-c for c in g))
    while frontier:
        cur = frontier.pop()
        for g in gens:
            nxt = tuple(a + b for a, b in zip(cur, g))
            if nxt not in seen and _in_window(nxt, window):
                seen.add(nxt)
                frontier.append(nxt)
    return sorted(seen)


def essential_value_scan(
    tmap: Callable[[float], float],
    psi: Callable[[float], Tuple[int, ...]],
    N: int,
    depth: int = 3,
    window: int = 8,
    grid: int = 8,
    guard: float = 1e-9,
    breakpoints: Sequence[float] = (),
    description: str = "",
) -> EssentialValueScan:
    """Finite-scale essential-value proxy over dyadic test sets.

    For every dyadic cell B at the given depth, iterate a grid of starting
    points up to N steps; whenever the orbit returns to B, record the
    accumulated fiber sum.  The values occurring in *every* cell generate
    the reported group (intersected with the window).  Orbit points landing
    within `guard` of a supplied breakpoint taint the orbit from that step
    on and are discarded."""
    cells = 1 << depth
    brk = sorted(breakpoints)

    def near_break(x: float) -> bool:
        i = bisect_right(brk, x)
        if i < len(brk) and brk[i] - x < guard:
            return True
        return i > 0 and x - brk[i - 1] < guard

    d = len(psi(0.5 / cells))
    common: Optional[set] = None
    for cell in range(cells):
        values = {tuple(0 for _ in range(d))}
        for j in range(grid):
            x = (cell + (j + 0.5) / grid) / cells
            if near_break(x):
                continue
            acc = tuple(0 for _ in range(d))
            y = x
            for _ in range(N):
                if near_break(y):
                    break
                acc = tuple(a + b for a, b in zip(acc, psi(y)))
                y = tmap(y)
                if int(y * cells) == cell:
                    values.add(acc)
        common = values if common is None else (common & values)
    observed = _group_closure(common or set(), d, window)
    return EssentialValueScan(
        observed=observed, scale=N, depth=depth, window=window, grid=grid,
        description=description,
    )


# ---------------------------------------------------------------------------
# algebraic witness
# ---------------------------------------------------------------------------


@dataclass
class AlglemWitness:
    """Exact witness (alpha, c) with sum(alpha_j a_j) + c in the lattice."""

    alpha: Tuple[QNum, ...]
    c: Tuple[QNum, ...]
    coords: Tuple[int, ...]  # lattice coordinates of the certified sum
    branch: str  # "invertible" or "kernel"
    D: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "alpha": [repr(a) for a in self.alpha],
                "c": [repr(x) for x in self.c],
                "coords": list(self.coords),
                "branch": self.branch,
                "D": self.D,
            },
            indent=1,
        )


def _field_D(*vector_lists) -> int:
    for vecs in vector_lists:
        for v in vecs:
            for x in v:
                if isinstance(x, QNum) and x.q != 0:
                    return x.D
    return 0


def _qn(x, D: int) -> QNum:
    if isinstance(x, QNum):
        if x.q != 0 and D and x.D != D:
            raise DimensionMismatch("mixed quadratic fields")
        return QNum(x.p, x.q, D) if x.D != D else x
    return QNum(Fraction(x), Fraction(0), D)


def alglem_witness(avecs, bvecs, F) -> AlglemWitness:
    """Constructive witness: coefficients alpha (not all rational) and a
    vector c in the span of F with sum(alpha_j a_j) + c in the integer
    lattice spanned by the a's and b's.

    Refuses (PreconditionFail) when the span of F meets the rational span
    of the lattice, in which case the conclusion can fail."""
    d1, d2 = len(avecs), len(bvecs)
    n = d1 + d2
    if len(F) != d2:
        raise DimensionMismatch("need dim F = number of b vectors")
    D = _field_D(avecs, bvecs, F)
    basis = [tuple(_qn(x, D) for x in v) for v in list(avecs) + list(bvecs)]
    fvecs = [tuple(_qn(x, D) for x in v) for v in F]
    if any(len(v) != n for v in basis + fvecs):
        raise DimensionMismatch("vector length must equal d1 + d2")
    # columns of M are the lattice basis vectors
    M = [[basis[j][i] for j in range(n)] for i in range(n)]
    coords = []
    for f in fvecs:
        z = linal.solve(M, list(f))
        if z is None:
            raise PreconditionFail("lattice vectors do not span the space")
        if all(x.is_rational() for x in z):
            raise PreconditionFail("a spanning vector lies in the rational "
                                   "span of the lattice")
        coords.append(z)
    # B-coordinate matrix of F (rows: b-basis index, columns: F index)
    B = [[coords[k][d1 + j] for k in range(d2)] for j in range(d2)]
    ker = linal.nullspace(B)
    zero = QNum(Fraction(0), Fraction(0), D)
    one = QNum(Fraction(1), Fraction(0), D)
    if ker:
        weights = ker[0]
        branch = "kernel"
    else:
        rhs = [one] + [zero] * (d2 - 1)
        weights = linal.solve(B, rhs)
        branch = "invertible"
    c = tuple(
        sum((weights[k] * fvecs[k][i] for k in range(d2)), zero)
        for i in range(n)
    )
    zc = linal.solve(M, list(c))
    alpha = tuple(-zc[j] for j in range(d1))
    if all(a.is_rational() for a in alpha):
        raise PreconditionFail("witness degenerates to rational alpha: the "
                               "span of F meets the lattice")
    # exact membership check of v = sum(alpha_j a_j) + c
    v = [c[i] for i in range(n)]
    for j in range(d1):
        for i in range(n):
            v[i] = v[i] + alpha[j] * basis[j][i]
    zv = linal.solve(M, v)
    out = []
    for x in zv:
        if not x.is_rational() or x.rational().denominator != 1:
            raise PreconditionFail("certified sum is not a lattice vector")
        out.append(int(x.rational()))
    return AlglemWitness(alpha=alpha, c=c, coords=tuple(out), branch=branch, D=D)


def random_alglem_instance(rng: random.Random, D: int, d1: int = 2, d2: int = 2):
    """Random exact instance over Q(sqrt D): a unimodular integer lattice
    basis and a spanning set F whose irrational parts are independent, so
    the span of F misses the rational span of the lattice."""
    n = d1 + d2
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i != j:
            k = rng.randrange(-2, 3)
            for t in range(n):
                U[i][t] += k * U[j][t]
    rows = [tuple(QNum.of(x, D) for x in r) for r in U]
    avecs, bvecs = rows[:d1], rows[d1:]
    r = qsqrt(D)
    F = []
    for k in range(d2):
        f = [QNum.of(0, D)] * n
        # rational part: a random small integer combination of the basis
        for row in rows:
            m = rng.randrange(-2, 3)
            f = [x + QNum.of(m, D) * y for x, y in zip(f, row)]
        # irrational part: sqrt(D) times the k-th a-vector (independent)
        scale = rng.randrange(1, 4)
        f = [x + r * QNum.of(scale, D) * y for x, y in zip(f, avecs[k % d1])]
        F.append(tuple(f))
    if d2 > d1:
        raise DimensionMismatch("instance generator needs d2 <= d1")
    return avecs, bvecs, F


# ---------------------------------------------------------------------------
# winding growth
# ---------------------------------------------------------------------------


def winding_series(iet: DecoratedIET, gammas: Sequence[Sequence[int]],
                   x0: float, n_steps: int) -> np.ndarray:
    """Integer skew-product sums psi^(n) along the orbit of x0 (float fast
    path; x0 in the IET domain [0, L))."""
    f = iet.floatify() if iet.exact else iet
    starts = f.domain_starts()
    order = sorted(f.top, key=lambda k: float(starts[k]))
    cuts = [float(starts[k]) for k in order][1:]
    trans = [float(t) for t in f.translations()]
    L = float(f.total_length())
    model = f.model
    inc = np.array(
        [[model.pair(list(g), f.xi[k]) for g in gammas] for k in range(len(f.top))],
        dtype=np.int64,
    )
    out = np.zeros((n_steps + 1, len(gammas)), dtype=np.int64)
    x = float(x0)
    acc = np.zeros(len(gammas), dtype=np.int64)
    for n in range(1, n_steps + 1):
        lab = order[bisect_right(cuts, x)]
        acc = acc + inc[lab]
        out[n] = acc
        x += trans[lab]
        if x < 0.0:
            x += L
        elif x >= L:
            x -= L
    return out


def growth_exponent(runmax: np.ndarray) -> float:
    """Log-log slope of a running maximum over its upper two decades of
    steps; identically-zero (or too-short) series report slope 0."""
    n = len(runmax) - 1
    if n < 100:
        raise InsufficientData("need at least 100 steps for a growth fit")
    lo = max(8, n // 100)
    ns = np.arange(lo, n + 1, dtype=float)
    ys = np.asarray(runmax, dtype=float)[lo:]
    mask = ys > 0
    if mask.sum() < 10:
        return 0.0
    slope = np.polyfit(np.log10(ns[mask]), np.log10(ys[mask]), 1)[0]
    return float(slope)


@dataclass
class WindingReport:
    """Per-class winding growth over an orbit ensemble in one direction."""

    sups: List[int]
    exponents: List[float]
    plateau_fracs: List[float]  # last running-max increase, as orbit fraction
    n_steps: int
    n_orbits: int
    windings: Optional[List[np.ndarray]] = None

    def plateaus(self, j: int, frac: float = 0.5) -> bool:
        return self.plateau_fracs[j] < frac

    def to_json(self) -> str:
        return json.dumps(
            {
                "sups": self.sups,
                "exponents": self.exponents,
                "plateau_fracs": self.plateau_fracs,
                "n_steps": self.n_steps,
                "n_orbits": self.n_orbits,
            },
            indent=1,
        )

    def csv_rows(self, orbit: int = 0, stride: int = 1):
        """(n, psi_1, ..., psi_k) rows for one stored orbit."""
        if not self.windings:
            raise InsufficientData("report was built without keep_series")
        w = self.windings[orbit]
        for n in range(0, len(w), stride):
            yield (n, *[int(v) for v in w[n]])


def bounded_winding_check(model: HomologyModel, u, gammas, n_steps: int,
                          n_orbits: int = 4, seed: int = 0,
                          keep_series: bool = False,
                          iet: Optional[DecoratedIET] = None) -> WindingReport:
    """Winding-growth report for homology classes along the slope-u flow.

    Builds the first-return IET once, runs n_orbits orbits from random
    starting points, and reports per class the overall sup, the mean fitted
    growth exponent, and the latest point (orbit fraction) at which any
    orbit's running maximum still increased."""
    if iet is None:
        iet = poincare_section(model, u)
    rng = random.Random(seed)
    L = float(iet.total_length())
    k = len(gammas)
    sups = [0] * k
    exps = [[] for _ in range(k)]
    lastinc = [0.0] * k
    kept = []
    for _ in range(n_orbits):
        w = winding_series(iet, gammas, rng.uniform(0.05, 0.95) * L, n_steps)
        if keep_series:
            kept.append(w)
        for j in range(k):
            rm = np.maximum.accumulate(np.abs(w[:, j]))
            sups[j] = max(sups[j], int(rm[-1]))
            exps[j].append(growth_exponent(rm))
            idx = int(np.argmax(rm)) if rm[-1] > 0 else 0
            # first index achieving the final sup = last increase
            idx = int(np.searchsorted(rm, rm[-1]))
            lastinc[j] = max(lastinc[j], idx / n_steps)
    return WindingReport(
        sups=sups,
        exponents=[float(np.mean(e)) for e in exps],
        plateau_fracs=lastinc,
        n_steps=n_steps,
        n_orbits=n_orbits,
        windings=kept if keep_series else None,
    )


# ---------------------------------------------------------------------------
# stable-space estimation
# ---------------------------------------------------------------------------


@dataclass
class StableEstimate:
    """Contracting-direction estimate from stacked winding matrices."""

    basis: np.ndarray  # (k, dim) orthonormal columns
    singulars: np.ndarray  # all singular values, descending
    dim: int
    gap: float  # realized ratio across the stable cut

    def rational_intersection(self, window: int = 5, tol: float = 0.05):
        """Small integer vectors lying within angular tolerance of the
        estimated stable subspace (expected empty when the subspace is
        totally irrational)."""
        k = self.basis.shape[0]
        P = self.basis @ self.basis.T  # projector onto the estimate
        hits = []
        for vec in _int_vectors(k, window):
            v = np.array(vec, dtype=float)
            nv = np.linalg.norm(v)
            if nv == 0:
                continue
            if np.linalg.norm(P @ v - v) / nv < tol:
                hits.append(vec)
        return hits


def _int_vectors(k: int, window: int):
    if k == 0:
        yield ()
        return
    for head in range(-window, window + 1):
        for tail in _int_vectors(k - 1, window):
            yield (head, *tail)


def stable_space_estimate(windings: Sequence[np.ndarray], d_plus: int,
                          gap: float = 10.0) -> StableEstimate:
    """Stable directions from the smallest right-singular directions of the
    stacked winding matrices; the estimate has dimension d_plus (the count
    of positive exponents).  Requires a singular-value ratio of at least
    `gap` across the cut, else IllConditioned."""
    W = np.vstack([np.asarray(w, dtype=float) for w in windings])
    k = W.shape[1]
    if not (0 < d_plus < k):
        raise DimensionMismatch("need 0 < d_plus < number of classes")
    _, s, vt = np.linalg.svd(W, full_matrices=False)
    cut = k - d_plus
    realized = float(s[cut - 1] / s[cut]) if s[cut] > 0 else math.inf
    if realized < gap:
        raise IllConditioned(
            f"singular-value ratio {realized:.2f} below the gate {gap}"
        )
    return StableEstimate(
        basis=vt[cut:].T.copy(), singulars=s.copy(), dim=d_plus, gap=realized
    )

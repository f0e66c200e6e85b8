"""Lyapunov exponents of the homological (renormalization) cocycle, and the
exact sum-rule formulas they are checked against.

The cocycle is realized on pairing profiles: a homology class gamma is
represented by the vector q(gamma)_alpha = <gamma, xi_alpha> over the current
IET's intervals, and each induction step updates profiles by the column
addition q[loser] += q[winner].  Growth per unit -log(section length) gives
the exponents; the tautological plane (holonomy profiles) is evolved the same
way and its top exponent is used as the normalization constant."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidSignature, NonConvergence, TieBreak, WindtreeError
from .geometry import CornerCensus
from .homology import HomologyModel
from .direction import DirectionStream, affine_sign, head_digits
from .iet import DecoratedIET, poincare_section
from .qfield import QNum, qsqrt


# ---------------------------------------------------------------------------
# exact formulas
# ---------------------------------------------------------------------------


def ekz_rhs(signature: Sequence[int]) -> Fraction:
    """Exact value of (1/4) * sum over odd orders d_j of 1/(d_j + 2).

    signature: orders of a quadratic differential (simple poles as -1);
    the total must be 4*g - 4 for some integer g >= 0."""
    total = sum(signature)
    if total % 4 != 0 or (total + 4) // 4 < 0:
        raise InvalidSignature(f"orders sum to {total}, not 4g-4 for integer g >= 0")
    if any(d < -1 or d == 0 for d in signature):
        raise InvalidSignature("orders must be -1 (pole) or positive integers")
    return Fraction(1, 4) * sum(
        (Fraction(1, d + 2) for d in signature if d % 2 != 0), Fraction(0)
    )


def sum_formula(census: CornerCensus, lam1_sum: Fraction = Fraction(0)) -> Fraction:
    """Predicted lambda_1 + lambda_2 for the symmetric-bundle pair:
    2 - m3/3 - m4/2 + (sum of the auxiliary-bundle exponents)."""
    census.check()
    return Fraction(2) - Fraction(census.m3, 3) - Fraction(census.m4, 2) + lam1_sum


def census_triples_with_small_angles() -> List[Tuple[int, int, int]]:
    """All corner censuses satisfying m3/3 + m4/2 <= 1 (finite list)."""
    out = []
    for m1 in range(0, 8):
        # Euler identity: -2*m1 + 2*m3 + 4*m4 = 4
        for m4 in range(0, m1 + 2):
            rem = (4 + 2 * m1 - 4 * m4)
            if rem < 0 or rem % 2:
                continue
            m3 = rem // 2
            if Fraction(m3, 3) + Fraction(m4, 2) <= 1:
                out.append((m1, m3, m4))
    return sorted(out)


@dataclass
class Verdict:
    fired: Optional[str]  # "square-tiled" | "wind-tree-spectrum" | "census" | None
    detail: str


def nonergodicity_verdict(
    g: Optional[int] = None,
    p: Optional[int] = None,
    d: Optional[int] = None,
    census: Optional[CornerCensus] = None,
    estimate: Optional["LyapunovEstimate"] = None,
) -> Verdict:
    """Which non-ergodicity criterion fires, if any.

    (i)  square-tiled: cover rank d >= 2g - 1 - p;
    (ii) spectrum: both leading bundle exponents positive by > 3 stderr;
    (iii) census: m3/3 + m4/2 <= 1 (exact; forces (ii) via the sum rule)."""
    if census is not None:
        census.check()
        if Fraction(census.m3, 3) + Fraction(census.m4, 2) <= 1:
            return Verdict("census", f"m3/3 + m4/2 = {Fraction(census.m3,3)+Fraction(census.m4,2)} <= 1")
    if g is not None and p is not None and d is not None:
        if d >= 2 * g - 1 - p:
            return Verdict("square-tiled", f"d = {d} >= 2g-1-p = {2*g-1-p}")
    if estimate is not None:
        lam = estimate.exponents
        err = estimate.stderr
        if len(lam) >= 2 and lam[0] > 3 * err[0] and lam[1] > 3 * err[1]:
            return Verdict("wind-tree-spectrum", f"lambda_1={lam[0]:.3f}, lambda_2={lam[1]:.3f} both > 3*stderr")
    return Verdict(None, "no criterion fired")

# ---------------------------------------------------------------------------
# Monte-Carlo spectrum estimation
# ---------------------------------------------------------------------------
#
# The estimator follows exact induction along directions that stay
# Lebesgue-typical at every depth (see direction.py).  Lengths are exact
# integers in a sliding continued-fraction window, so the induction path is
# the true one for the sampled direction no matter how long the run is.
# Positive bundle exponents are read from forward profile rows behind a
# tautological absorber row; the mirrored negative exponents are measured
# independently from dual columns evolved by the inverse cocycle, behind a
# generic absorber column.


@dataclass
class LyapunovEstimate:
    exponents: List[float]          # bundle exponents, non-increasing, normalized
    stderr: List[float]
    taut_norm: float                # raw tautological top exponent (target 1)
    taut_norm_stderr: float
    grouped_steps: int              # total grouped induction steps, all directions
    raw_steps: int
    directions: int
    seed: int
    per_direction: List[List[float]] = field(default_factory=list)
    nonconvergence: bool = False

    def symmetric_within(self, k_stderr: float = 2.0) -> bool:
        lam = self.exponents
        n = len(lam)
        return all(
            abs(lam[i] + lam[n - 1 - i]) <= k_stderr * (self.stderr[i] + self.stderr[n - 1 - i]) + 1e-12
            for i in range(n)
        )


@dataclass
class DirectionSample:
    """Exact slope for the section plus the digit stream of its parameter."""
    u: QNum
    stream: DirectionStream


def sample_direction(rng: random.Random) -> DirectionSample:
    """Slope u in (1, 2) with a Lebesgue-typical direction stream.

    The exact slope u = 1 + n/2^40 + sqrt(2)/2^60 only anchors the section
    construction; the stream shares its leading digits (far past every exact
    comparison the section makes) and continues with lazily drawn random
    digits, so arbitrarily long runs keep sampling a typical direction
    rather than the eventually periodic digits of a fixed quadratic."""
    n = rng.randrange(1, 1 << 40) | 1
    u = QNum(Fraction(1) + Fraction(n, 1 << 40), Fraction(1, 1 << 60), 2)
    t0 = u.inverse()
    head = head_digits(t0, 1 << 38)
    return DirectionSample(u=u, stream=DirectionStream(head, rng))


def _profile_rows(iet: DecoratedIET, classes: Sequence[Sequence]) -> np.ndarray:
    """Pairing profiles q(gamma)_alpha = <gamma, xi_alpha> as float rows."""
    model = iet.model
    m = len(iet.top)
    rows = np.zeros((len(classes), m))
    for i, g in enumerate(classes):
        gl = list(g)
        for a in range(m):
            rows[i, a] = float(model.pair(gl, iet.xi[a]))
    return rows


def _dual_columns(iet: DecoratedIET, classes: Sequence[Sequence], rng: random.Random) -> np.ndarray:
    """One generic absorber column plus, for each class gamma, an exact
    solution c of q(delta) . c = <delta, gamma> over the homology basis;
    such columns evolve by the inverse cocycle with the pairing against
    every tracked class held constant."""
    from . import linal

    model = iet.model
    m = len(iet.top)
    rank = model.rank
    q0 = []
    for i in range(rank):
        delta = [0] * rank
        delta[i] = 1
        q0.append([Fraction(model.pair(delta, iet.xi[a])) for a in range(m)])
    out = np.zeros((m, 1 + len(classes)))
    out[:, 0] = [rng.gauss(0.0, 1.0) for _ in range(m)]
    for j, g in enumerate(classes):
        gl = list(g)
        b = []
        for i in range(rank):
            delta = [0] * rank
            delta[i] = 1
            b.append(Fraction(model.pair(delta, gl)))
        sol = linal.solve(q0, b)
        if sol is None:
            raise WindtreeError("class has no dual column over the section profiles")
        out[:, j + 1] = [float(v) for v in sol]
    return out


def _check_invariant_subspace(model: HomologyModel, classes: Sequence[Sequence], action) -> None:
    """Exact check that each basis class is a (+1 or -1)-eigenvector of the
    given involution action matrix (the bundle is an isotypic piece)."""
    from .linal import mat_vec

    for g in classes:
        gv = [Fraction(x) for x in g]
        img = mat_vec(action, gv)
        if img != gv and img != [-v for v in gv]:
            raise WindtreeError("bundle basis class is not an eigenvector of the defining involution")


_BUF = 2048
_CKCAP = 512
_XMAX = 1 << 21


class _WindowRun:
    """Driver for one direction: exact window induction in the compiled
    kernel, with Python fallbacks for digit refills, uncertifiable float
    comparisons, and oversized window advances."""

    def __init__(self, iet: DecoratedIET, sample: DirectionSample,
                 classes: Sequence[Sequence], rng: random.Random,
                 ortho_every: int, ck_every: int):
        from math import lcm

        self.stream = sample.stream
        self.m = m = len(iet.top)
        den = lcm(*[
            d for lam in iet.lengths
            for d in (lam.a.denominator, lam.b.denominator)
        ])
        A = [int(lam.a * den) for lam in iet.lengths]
        B = [int(lam.b * den) for lam in iet.lengths]
        if max(max(map(abs, A)), max(map(abs, B))) > _XMAX:
            raise NonConvergence("section lengths too large for the window")
        self.x = np.array(A, dtype=np.int64)
        self.y = np.array(B, dtype=np.int64)
        self.top = np.array(iet.top, dtype=np.int64)
        self.bot = np.array(iet.bot, dtype=np.int64)
        taut = np.zeros((1, m))
        for a in range(m):
            taut[0, a] = float(iet.model.hol(iet.xi[a])[0])
        self.Q = np.vstack([taut, _profile_rows(iet, classes)])
        self.Cc = _dual_columns(iet, classes, rng)
        self.r = self.Q.shape[0]
        self.rc = self.Cc.shape[1]
        self.accF = np.zeros(self.r)
        self.accD = np.zeros(self.rc)
        self.fstate = np.zeros(2)
        self.counters = np.zeros(7, dtype=np.int64)
        self.counters[3] = -1
        self.off = 0
        self.digits = np.zeros(_BUF, dtype=np.int64)
        self.ck_t = np.zeros(_CKCAP)
        self.ck_F = np.zeros((_CKCAP, self.r))
        self.ck_D = np.zeros((_CKCAP, self.rc))
        self.cks: List[Tuple[float, np.ndarray, np.ndarray]] = []
        self.ortho_every = ortho_every
        self.ck_every = ck_every
        self._refill()
        self._set_rho()
        self.lamf = np.zeros(m)
        self._recompute_lamf()
        if float(self.lamf.min()) <= 1e-9:
            raise NonConvergence("section atom too thin for float guidance")

    # -- exact-state helpers -------------------------------------------------

    def _refill(self) -> None:
        di = int(self.counters[0])
        self.off += di
        self.counters[0] = 0
        cap = 1 << 62
        for j in range(_BUF):
            d = self.stream.digit(self.off + j)
            self.digits[j] = d if d < cap else cap
        self._set_rho()

    def _set_rho(self) -> None:
        di = int(self.counters[0])
        rho = 0.0
        for j in range(24, -1, -1):
            rho = 1.0 / (self.stream.digit(self.off + di + j) + rho)
        self.fstate[0] = rho

    def _recompute_lamf(self) -> None:
        rho = self.fstate[0]
        for i in range(self.m):
            self.lamf[i] = float(int(self.x[i])) + float(int(self.y[i])) * rho

    def _flush(self) -> None:
        n = int(self.counters[6])
        for i in range(n):
            self.cks.append((float(self.ck_t[i]), self.ck_F[i].copy(), self.ck_D[i].copy()))
        self.counters[6] = 0

    def _qr(self) -> None:
        qf, rf = np.linalg.qr(self.Q.T)
        self.accF += np.log(np.abs(np.diag(rf)))
        self.Q[:, :] = qf.T
        qd, rd = np.linalg.qr(self.Cc)
        self.accD += np.log(np.abs(np.diag(rd)))
        self.Cc[:, :] = qd

    def _checkpoint(self) -> None:
        t = -(self.fstate[1] + math.log(float(self.lamf.sum())))
        self.cks.append((t, self.accF.copy(), self.accD.copy()))

    def _py_rebase(self) -> None:
        """Advance the window with exact arbitrary-precision arithmetic
        until every coordinate fits the kernel bound again."""
        xs = [int(v) for v in self.x]
        ys = [int(v) for v in self.y]
        changed = False
        guard = 0
        while max(max(map(abs, xs)), max(map(abs, ys))) > _XMAX:
            guard += 1
            if guard > 400:
                raise NonConvergence("window coordinates did not contract")
            di = int(self.counters[0])
            a = self.stream.digit(self.off + di)
            xs, ys = [a * xv + yv for xv, yv in zip(xs, ys)], xs
            self.counters[0] = di + 1
            self.fstate[1] += math.log(self.fstate[0])
            self._set_rho()
            changed = True
        if changed:
            self.x[:] = xs
            self.y[:] = ys
            self._recompute_lamf()
            if int(self.counters[0]) + 64 > _BUF:
                self._refill()

    def _exact_step(self) -> None:
        """One induction step decided by exact digit-stream comparison."""
        m = self.m
        alpha = int(self.top[m - 1])
        beta = int(self.bot[m - 1])
        if alpha == beta:
            raise TieBreak("top and bottom end in the same label")
        dx = int(self.x[alpha]) - int(self.x[beta])
        dy = int(self.y[alpha]) - int(self.y[beta])
        di = int(self.counters[0])
        s = affine_sign(dx, dy, lambda j: self.stream.digit(self.off + di + j))
        if s == 0:
            raise TieBreak("equal candidate lengths cannot be certified")
        w, l = (alpha, beta) if s > 0 else (beta, alpha)
        if w != int(self.counters[3]):
            self.counters[3] = w
            self.counters[1] += 1
            self.counters[4] += 1
            self.counters[5] += 1
            if self.counters[4] >= self.ortho_every:
                self.counters[4] = 0
                self._qr()
            if self.counters[5] >= self.ck_every:
                self.counters[5] = 0
                self._checkpoint()
        self.x[w] -= self.x[l]
        self.y[w] -= self.y[l]
        self.lamf[w] = float(int(self.x[w])) + float(int(self.y[w])) * self.fstate[0]
        self.Q[:, l] += self.Q[:, w]
        self.Cc[w, :] -= self.Cc[l, :]
        self.counters[2] += 1
        if s > 0:
            row = self.bot
            lead, moved = alpha, beta
        else:
            row = self.top
            lead, moved = beta, alpha
        pos = int(np.where(row == lead)[0][0])
        rest = row[pos + 1:m - 1].copy()
        row[pos + 1] = moved
        row[pos + 2:] = rest
        self._py_rebase()

    def run(self, n_grouped: int) -> None:
        from ._kernels import (
            window_induct, WIN_OK, WIN_NEED_DIGITS, WIN_NEED_EXACT_CMP,
            WIN_BIG_DIGIT, WIN_TIE, WIN_OVERFLOW, WIN_CK_FULL,
        )

        while int(self.counters[1]) < n_grouped:
            status = window_induct(
                self.x, self.y, self.lamf, self.top, self.bot,
                self.Q, self.Cc, self.accF, self.accD,
                self.digits, self.fstate, self.counters,
                self.ck_t, self.ck_F, self.ck_D,
                n_grouped, self.ortho_every, self.ck_every,
            )
            self._flush()
            if status == WIN_OK:
                break
            if status == WIN_NEED_DIGITS:
                self._refill()
            elif status == WIN_NEED_EXACT_CMP:
                self._exact_step()
            elif status in (WIN_BIG_DIGIT, WIN_OVERFLOW):
                self._py_rebase()
            elif status == WIN_TIE:
                raise TieBreak("tie inside window induction")
            elif status == WIN_CK_FULL:
                continue
            else:
                raise NonConvergence(f"window induction status {status}")
        self._checkpoint()


@dataclass
class DirectionRun:
    forward_rates: List[float]   # absorber + one rate per tracked class
    dual_rates: List[float]
    time_window: float
    grouped: int
    raw: int


def run_direction(
    model: HomologyModel,
    classes: Sequence[Sequence],
    sample: DirectionSample,
    n_grouped: int,
    rng: random.Random,
    ortho_every: int = 16,
    ck_every: int = 512,
    t_burn: float = 25.0,
) -> DirectionRun:
    """Windowed growth rates for one direction.

    Rates are measured between the first checkpoint past t_burn and the last
    checkpoint, which discards the transient before the tracked rows align
    with the Oseledets flag."""
    iet = poincare_section(model, sample.u)
    run = _WindowRun(iet, sample, classes, rng, ortho_every, ck_every)
    run.run(n_grouped)
    cks = run.cks
    if len(cks) < 4:
        raise NonConvergence("too few checkpoints for a windowed estimate")
    ts = np.array([c[0] for c in cks])
    i0 = int(np.searchsorted(ts, t_burn))
    if i0 >= len(ts) - 1 or ts[-1] - ts[i0] < 2 * t_burn:
        raise NonConvergence("run too short past the burn-in time")
    dt = ts[-1] - ts[i0]
    fw = (cks[-1][1] - cks[i0][1]) / dt
    du = (cks[-1][2] - cks[i0][2]) / dt
    return DirectionRun(
        forward_rates=[float(v) for v in fw],
        dual_rates=[float(v) for v in du],
        time_window=float(dt),
        grouped=int(run.counters[1]),
        raw=int(run.counters[2]),
    )


def lyapunov_spectrum(
    model: HomologyModel,
    classes: Sequence[Sequence],
    n_steps: int,
    n_directions: int,
    seed: int,
    ortho_every: int = 16,
    action=None,
    stderr_threshold: float = 0.2,
) -> LyapunovEstimate:
    """Monte-Carlo bundle spectrum over random directions.

    classes: exact basis (or partial basis) of the invariant bundle in H1
    coordinates; n_steps: grouped induction steps per direction.  For each
    direction the positive flag rates come from forward profile rows and
    the negative ones from dual columns, each normalized by its own
    tautological absorber rate; the two measurements are independent, so
    their agreement is the symmetry evidence reported by the estimate."""
    if action is not None:
        _check_invariant_subspace(model, classes, action)
    rng = random.Random(seed)
    k = len(classes)
    per_dir: List[List[float]] = []
    tauts: List[float] = []
    grouped_total = 0
    raw_total = 0
    attempts = 0
    while len(per_dir) < n_directions:
        attempts += 1
        if attempts > 4 * n_directions:
            raise NonConvergence("too many failed direction samples")
        sample = sample_direction(rng)
        try:
            run = run_direction(model, classes, sample, n_steps, rng, ortho_every)
        except (NonConvergence, WindtreeError):
            continue
        taut = run.forward_rates[0]
        taut_d = run.dual_rates[0]
        if not (0.5 < taut < 2.0 and 0.5 < taut_d < 2.0):
            continue
        pos = [run.forward_rates[1 + i] / taut for i in range(k)]
        neg = [-run.dual_rates[1 + i] / taut_d for i in range(k)]
        per_dir.append(pos + list(reversed(neg)))
        tauts.append(taut)
        grouped_total += run.grouped
        raw_total += run.raw
    arr = np.array(per_dir)
    mean = arr.mean(axis=0)
    se = (
        arr.std(axis=0, ddof=1) / math.sqrt(len(per_dir))
        if len(per_dir) > 1 else np.zeros(arr.shape[1])
    )
    order = np.argsort(-mean)
    taut_arr = np.array(tauts)
    est = LyapunovEstimate(
        exponents=[float(mean[i]) for i in order],
        stderr=[float(se[i]) for i in order],
        taut_norm=float(taut_arr.mean()),
        taut_norm_stderr=float(taut_arr.std(ddof=1) / math.sqrt(len(taut_arr))) if len(taut_arr) > 1 else 0.0,
        grouped_steps=grouped_total,
        raw_steps=raw_total,
        directions=len(per_dir),
        seed=seed,
        per_direction=per_dir,
    )
    est.nonconvergence = any(s > stderr_threshold for s in est.stderr)
    return est

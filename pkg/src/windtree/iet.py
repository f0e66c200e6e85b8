"""Decorated interval exchange maps from directional first-return sections.

The section is taken on the bottom edge of a chosen base square, for the
upward flow of direction (1/u, 1) where u is the direction slope (dy/dx).
Interval endpoints and lengths are affine expressions a + b*t (a, b rational,
t = 1/u an exact quadratic irrational), so all comparisons during induction
are exact.  Each interval carries its first-return homology class ("the
return strip closed along the transversal"), its return time, and the flow
offset; Rauzy-Veech induction updates classes by composing the winner's loop
into the loser's.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import (
    DiscontinuityHit,
    RationalSlope,
    SingularConnection,
    TieBreak,
)
from .homology import HomologyModel
from .qfield import QNum
from .surface import Origami, UnfoldedSurface


class Affine:
    """Exact affine expression a + b*t in the direction parameter t."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = a if isinstance(a, Fraction) else Fraction(a)
        self.b = b if isinstance(b, Fraction) else Fraction(b)

    def __add__(self, o):
        if isinstance(o, Affine):
            return Affine(self.a + o.a, self.b + o.b)
        return Affine(self.a + o, self.b)

    def __sub__(self, o):
        if isinstance(o, Affine):
            return Affine(self.a - o.a, self.b - o.b)
        return Affine(self.a - o, self.b)

    def __neg__(self):
        return Affine(-self.a, -self.b)

    def value(self, t: QNum) -> QNum:
        return QNum.of(self.a) + t * self.b

    def __repr__(self):
        return f"Affine({self.a} + {self.b}*t)"


def _sign_of(x: Affine, t: QNum) -> int:
    if x.b == 0:
        return (x.a > 0) - (x.a < 0)
    return x.value(t).sign()


@dataclass
class DecoratedIET:
    """Interval exchange with homology decorations.

    top/bot: label orders in the domain and the image; lengths: exact affine
    lengths (or floats in float mode); xi: decoration classes in H1
    coordinates; tau: return times; param: exact value of t (None in float
    mode)."""

    top: List[int]
    bot: List[int]
    lengths: List[object]
    xi: List[List[int]]
    tau: List[int]
    param: Optional[QNum]
    model: Optional[HomologyModel] = None
    exact: bool = True

    # -- exact helpers ---------------------------------------------------------

    def length_value(self, alpha: int):
        lam = self.lengths[alpha]
        if self.exact:
            return lam.value(self.param)
        return lam

    def total_length(self):
        tot = self.lengths[0]
        for lam in self.lengths[1:]:
            tot = tot + lam
        return tot.value(self.param) if self.exact else tot

    def domain_starts(self) -> List[object]:
        """Start position of each label's domain interval (indexed by label)."""
        out: List[object] = [None] * len(self.top)
        pos = Affine(0) if self.exact else 0.0
        for lab in self.top:
            out[lab] = pos
            pos = pos + self.lengths[lab]
        return out

    def image_starts(self) -> List[object]:
        out: List[object] = [None] * len(self.bot)
        pos = Affine(0) if self.exact else 0.0
        for lab in self.bot:
            out[lab] = pos
            pos = pos + self.lengths[lab]
        return out

    def translations(self) -> List[object]:
        d = self.domain_starts()
        i = self.image_starts()
        return [i[k] - d[k] for k in range(len(self.top))]

    def gram(self) -> List[List[int]]:
        """Pairing matrix <xi_a, xi_b> under the surface intersection form."""
        m = len(self.xi)
        return [
            [self.model.pair(self.xi[a], self.xi[b]) for b in range(m)]
            for a in range(m)
        ]

    def holonomy_invariant(self):
        """Sum_a lambda_a * hol(xi_a), conserved by induction (exact mode)."""
        hx = Affine(0)
        hy = Affine(0)
        for lam, x in zip(self.lengths, self.xi):
            h = self.model.hol(x)
            hx = hx + Affine(lam.a * h[0], lam.b * h[0])
            hy = hy + Affine(lam.a * h[1], lam.b * h[1])
        return hx, hy

    def floatify(self) -> "DecoratedIET":
        t = self.param
        return DecoratedIET(
            top=list(self.top),
            bot=list(self.bot),
            lengths=[float(l.value(t)) for l in self.lengths],
            xi=[list(x) for x in self.xi],
            tau=list(self.tau),
            param=None,
            model=self.model,
            exact=False,
        )


# ---------------------------------------------------------------------------
# section construction
# ---------------------------------------------------------------------------


def poincare_section(model: HomologyModel, u: QNum, base_square: int = 0) -> DecoratedIET:
    """First-return map of the slope-u flow to the bottom edge of base_square."""
    og = model.origami
    N = og.n_squares
    if not isinstance(u, QNum):
        u = QNum.of(u)
    if u.is_rational():
        raise RationalSlope("direction slope must be irrational")
    if not (QNum.of(0) < u):
        raise ValueError("slope must be positive")
    t = u.inverse()  # horizontal drift per unit height, in (0, 1) for u > 1
    if not (QNum.of(0) < t < QNum.of(1)):
        raise ValueError("slope must exceed 1 (t = 1/u in (0,1))")

    # worklist of strip atoms: (lo, hi, square, offset, steps, decoration)
    atoms = [(Affine(0), Affine(1), base_square, Affine(0), 0, {})]
    pieces = []
    guard = 0
    while atoms:
        lo, hi, s, c, steps, deco = atoms.pop()
        if _sign_of(hi - lo, t) <= 0:
            continue
        guard += 1
        if guard > 200000 or steps > 10000 * N:
            raise SingularConnection("first-return construction did not close")
        # flow one step up from the bottom edge of s; branch at x = 1 - t - c
        xa = Affine(1) - Affine(0, 1) - c
        cmp_lo = _sign_of(lo - xa, t)
        cmp_hi = _sign_of(hi - xa, t)
        if cmp_lo < 0 and cmp_hi > 0:
            atoms.append((lo, xa, s, c, steps, deco))
            atoms.append((xa, hi, s, c, steps, deco))
            continue
        if cmp_hi <= 0:  # case A: stays in the square
            s2 = og.v[s]
            c2 = c + Affine(0, 1)
            deco2 = dict(deco)
            deco2[N + s] = deco2.get(N + s, 0) + 1
        else:  # case B: crosses the right edge first
            mid = og.h[s]
            s2 = og.v[mid]
            c2 = c + Affine(-1, 1)
            deco2 = dict(deco)
            deco2[N + s] = deco2.get(N + s, 0) + 1
            deco2[og.v[s]] = deco2.get(og.v[s], 0) + 1
        if s2 == base_square:
            pieces.append((lo, hi, c2, steps + 1, deco2))
        else:
            atoms.append((lo, hi, s2, c2, steps + 1, deco2))

    # assemble the IET
    pieces.sort(key=lambda p: float(p[0].value(t)))
    m = len(pieces)
    lengths = []
    xi = []
    tau = []
    trans = []
    pos = Affine(0)
    for (lo, hi, c, steps, deco) in pieces:
        if _sign_of(lo - pos, t) != 0:
            raise SingularConnection("domain pieces do not tile the transversal")
        pos = hi
        lengths.append(hi - lo)
        vec = [0] * (2 * N)
        for e, cnt in deco.items():
            vec[e] = cnt
        xi.append(model.reduce(vec))
        tau.append(steps)
        trans.append(c)
    if _sign_of(pos - Affine(1), t) != 0:
        raise SingularConnection("domain pieces do not cover the transversal")
    # image order: sort labels by image start lo + c
    order = sorted(range(m), key=lambda k: float((pieces[k][0] + pieces[k][2]).value(t)))
    # verify the images tile [0,1) exactly
    pos = Affine(0)
    for k in order:
        start = pieces[k][0] + pieces[k][2]
        if _sign_of(start - pos, t) != 0:
            raise SingularConnection("image pieces do not tile the transversal")
        pos = pos + lengths[k]
    return DecoratedIET(
        top=list(range(m)),
        bot=order,
        lengths=lengths,
        xi=xi,
        tau=tau,
        param=t,
        model=model,
    )


# ---------------------------------------------------------------------------
# induction
# ---------------------------------------------------------------------------


def rauzy_step(iet: DecoratedIET) -> Tuple[DecoratedIET, List[List[int]], int]:
    """One Rauzy-Veech step.  Returns (new iet, matrix C with D' = D C, winner).

    The matrix C = I + E[winner, loser] records the decoration update
    xi'_loser = xi_loser + xi_winner on the label space."""
    alpha = iet.top[-1]
    beta = iet.bot[-1]
    if alpha == beta:
        raise TieBreak("top and bottom end in the same label")
    la, lb = iet.lengths[alpha], iet.lengths[beta]
    if iet.exact:
        s = _sign_of(la - lb, iet.param)
    else:
        s = (la > lb) - (la < lb)
    if s == 0:
        raise TieBreak("equal candidate lengths cannot be certified")
    winner, loser = (alpha, beta) if s > 0 else (beta, alpha)

    lengths = list(iet.lengths)
    lengths[winner] = lengths[winner] - lengths[loser]
    xi = [list(x) for x in iet.xi]
    xi[loser] = [a + b for a, b in zip(xi[loser], xi[winner])]
    tau = list(iet.tau)
    tau[loser] += tau[winner]
    top = list(iet.top)
    bot = list(iet.bot)
    if s > 0:  # top winner: move beta right after alpha in the bottom row
        bot.pop()
        bot.insert(bot.index(alpha) + 1, beta)
    else:      # bottom winner: move alpha right after beta in the top row
        top.pop()
        top.insert(top.index(beta) + 1, alpha)

    m = len(iet.top)
    C = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    C[winner][loser] = 1
    new = DecoratedIET(
        top=top, bot=bot, lengths=lengths, xi=xi, tau=tau,
        param=iet.param, model=iet.model, exact=iet.exact,
    )
    return new, C, winner


def zorich_accelerate(iet: DecoratedIET, max_steps: int):
    """Generator of grouped Rauzy steps: yields (iet, matrix, winner, run_len).

    Consecutive steps with the same winner are grouped; the yielded matrix is
    the product of the run's step matrices (I + run_len * E[winner, loser]
    when the loser is constant along the run, the explicit product otherwise)."""
    steps = 0
    cur = iet
    while steps < max_steps:
        cur, C, winner = rauzy_step(cur)
        steps += 1
        run = 1
        m = len(C)
        prod = C
        while steps < max_steps:
            nxt, C2, w2 = rauzy_step(cur)
            if w2 != winner:
                break
            cur = nxt
            steps += 1
            run += 1
            prod = [
                [sum(prod[i][k] * C2[k][j] for k in range(m) if prod[i][k]) for j in range(m)]
                for i in range(m)
            ]
        yield cur, prod, winner, run
        if steps >= max_steps:
            return


# ---------------------------------------------------------------------------
# skew products
# ---------------------------------------------------------------------------


@dataclass
class SkewOrbitRecord:
    x0: object
    psi: List[Tuple[int, ...]]  # psi^(n) for n = 0..n_max
    xs: List[QNum] = field(default_factory=list)  # orbit points x, Tx, ...


def skew_orbit(iet: DecoratedIET, gammas: Sequence[Sequence[int]], x0, n_max: int) -> SkewOrbitRecord:
    """Iterate the skew product over the IET with fiber increments
    psi_gamma(x) = <gamma, xi_alpha> for x in interval alpha (exact)."""
    if not iet.exact:
        raise ValueError("skew_orbit requires an exact-mode IET")
    t = iet.param
    model = iet.model
    inc = [
        tuple(model.pair(g, iet.xi[a]) for g in gammas)
        for a in range(len(iet.top))
    ]
    starts = iet.domain_starts()
    trans = iet.translations()
    # domain breakpoints in order
    order = iet.top
    x = QNum.of(x0)
    d = len(gammas)
    cur = tuple(0 for _ in range(d))
    out = [cur]
    pts = [x]
    for _ in range(n_max):
        lab = None
        for k in order:
            lo = starts[k].value(t)
            hi = lo + iet.length_value(k)
            if x == lo and k != order[0]:
                raise DiscontinuityHit("orbit hit an interval endpoint")
            if lo <= x < hi:
                lab = k
                break
        if lab is None:
            raise DiscontinuityHit("orbit left the unit interval")
        cur = tuple(c + i for c, i in zip(cur, inc[lab]))
        out.append(cur)
        tr = trans[lab]
        x = x + QNum.of(tr.a) + t * tr.b
        pts.append(x)
    return SkewOrbitRecord(x0=x0, psi=out, xs=pts)


# ---------------------------------------------------------------------------
# fast exact induction over integer pairs
# ---------------------------------------------------------------------------


def _int_pair_sign(A: int, B: int, D: int) -> int:
    """Exact sign of A + B*sqrt(D) for integers A, B and D >= 0."""
    if B == 0 or D == 0:
        return (A > 0) - (A < 0)
    if A == 0:
        return (B > 0) - (B < 0)
    if A > 0 and B > 0:
        return 1
    if A < 0 and B < 0:
        return -1
    # mixed signs: compare A^2 with B^2 * D
    lhs = A * A
    rhs = B * B * D
    if lhs == rhs:
        return 0
    big_a = lhs > rhs
    return (1 if big_a else -1) if A > 0 else (-1 if big_a else 1)


class ExactInduction:
    """Rauzy-Veech induction with lengths as integer pairs (A + B*sqrt(D))/Q.

    Additions and subtractions stay in plain integer arithmetic, so long
    exact runs (10^5+ steps) are fast; comparisons fall back to squaring
    only when the two coefficients have mixed signs.  Decorations, return
    times, and holonomies are carried as exact integers throughout."""

    def __init__(self, iet: DecoratedIET):
        if not iet.exact:
            raise ValueError("ExactInduction needs an exact-mode IET")
        t = iet.param
        self.D = t.D
        # t = tp + tq*sqrt(D) with rational tp, tq
        denoms = [t.p.denominator, t.q.denominator]
        for lam in iet.lengths:
            av = lam.a + lam.b * t.p
            bv = lam.b * t.q
            denoms.append(av.denominator)
            denoms.append(bv.denominator)
        from math import lcm

        Q = lcm(*denoms)
        self.Q = Q
        self.A: List[int] = []
        self.B: List[int] = []
        for lam in iet.lengths:
            av = lam.a + lam.b * t.p
            bv = lam.b * t.q
            self.A.append(int(av * Q))
            self.B.append(int(bv * Q))
        self.top = list(iet.top)
        self.bot = list(iet.bot)
        self.xi = [list(x) for x in iet.xi]
        self.tau = list(iet.tau)
        self.model = iet.model
        self.hol = [list(self.model.hol(x)) for x in iet.xi] if iet.model else None
        self.steps = 0

    def length_sign_diff(self, a: int, b: int) -> int:
        return _int_pair_sign(self.A[a] - self.A[b], self.B[a] - self.B[b], self.D)

    def step(self) -> Tuple[int, int]:
        """One induction step; returns (winner, loser)."""
        alpha = self.top[-1]
        beta = self.bot[-1]
        if alpha == beta:
            raise TieBreak("top and bottom end in the same label")
        s = self.length_sign_diff(alpha, beta)
        if s == 0:
            raise TieBreak("equal candidate lengths cannot be certified")
        winner, loser = (alpha, beta) if s > 0 else (beta, alpha)
        self.A[winner] -= self.A[loser]
        self.B[winner] -= self.B[loser]
        xw = self.xi[winner]
        xl = self.xi[loser]
        for i in range(len(xl)):
            xl[i] += xw[i]
        self.tau[loser] += self.tau[winner]
        if self.hol is not None:
            hl, hw = self.hol[loser], self.hol[winner]
            hl[0] += hw[0]
            hl[1] += hw[1]
        if s > 0:
            self.bot.pop()
            self.bot.insert(self.bot.index(alpha) + 1, beta)
        else:
            self.top.pop()
            self.top.insert(self.top.index(beta) + 1, alpha)
        self.steps += 1
        return winner, loser

    def run(self, n_steps: int) -> int:
        for _ in range(n_steps):
            self.step()
        return self.steps

    def holonomy_invariant(self) -> Tuple[int, int, int, int]:
        """Exact (Ax, Bx, Ay, By): Sum lambda*hol = ((Ax+Bx*sqrt(D))/Q, ...)."""
        ax = bx = ay = by = 0
        for k in range(len(self.A)):
            hx, hy = self.hol[k]
            ax += self.A[k] * hx
            bx += self.B[k] * hx
            ay += self.A[k] * hy
            by += self.B[k] * hy
        return ax, bx, ay, by

    def total_length(self) -> Tuple[int, int]:
        return sum(self.A), sum(self.B)

    def gram(self) -> List[List[int]]:
        m = len(self.xi)
        return [
            [self.model.pair(self.xi[a], self.xi[b]) for b in range(m)]
            for a in range(m)
        ]


def omega_pi(top: Sequence[int], bot: Sequence[int]) -> List[List[int]]:
    """Combinatorial intersection matrix of the permutation pair:
    entry [a][b] = +1 if a follows b on top but precedes b on bottom,
    -1 in the reversed case, 0 otherwise."""
    m = len(top)
    pt = {lab: i for i, lab in enumerate(top)}
    pb = {lab: i for i, lab in enumerate(bot)}
    out = [[0] * m for _ in range(m)]
    for a in range(m):
        for b in range(m):
            if pt[a] > pt[b] and pb[a] < pb[b]:
                out[a][b] = 1
            elif pt[a] < pt[b] and pb[a] > pb[b]:
                out[a][b] = -1
    return out

"""Exact lazy continued fractions for direction sampling.

A direction is specified by the continued-fraction digit stream of its
section parameter t in (0, 1).  The head digits are prescribed (taken from
an exact quadratic slope used to build the section); past the head, the
tail is a uniformly random real whose digits are extracted exactly from a
lazily refined binary expansion.  Exactness matters: double-precision
directions exhaust their digits after ~35 quotients, and any deterministic
closed form (e.g. a quadratic irrational) has eventually periodic digits,
so long runs along it sample a single periodic Teichmueller geodesic
instead of a typical one.  Digit-by-digit randomness keeps the direction
Lebesgue-typical at every depth.

The tail extraction keeps the remaining value as an integer Moebius
transform t = (p*xi + q)/(r*xi + s) of the not-yet-drawn randomness
xi in (0, 1); a digit is emitted once floor(1/t) agrees at both endpoints,
otherwise one more random bit of xi is drawn and folded into the transform.
"""

from __future__ import annotations

import random
from typing import Callable, List

from .errors import TieBreak
from .qfield import QNum


class DirectionStream:
    """Lazy exact digit stream [0; a_1, a_2, ...] with a prescribed head."""

    def __init__(self, head: List[int], rng: random.Random):
        if any(a < 1 for a in head):
            raise ValueError("continued-fraction digits must be >= 1")
        self.digits: List[int] = list(head)
        self.rng = rng
        # tail value = (p*xi + q)/(r*xi + s), xi uniform in (0,1), not yet drawn
        self._p, self._q, self._r, self._s = 1, 0, 0, 1
        self.bits_drawn = 0

    def digit(self, i: int) -> int:
        while i >= len(self.digits):
            self.digits.append(self._next_tail_digit())
        return self.digits[i]

    def _next_tail_digit(self) -> int:
        p, q, r, s = self._p, self._q, self._r, self._s
        while True:
            # floor of 1/t = (r*xi + s)/(p*xi + q) at xi = 0 and xi = 1
            if q > 0 and p + q > 0:
                f0 = s // q
                f1 = (r + s) // (p + q)
                if f0 == f1:
                    a = f0
                    if a < 1:
                        raise TieBreak("direction stream left (0,1)")
                    # t' = 1/t - a
                    self._p, self._q = r - a * p, s - a * q
                    self._r, self._s = p, q
                    return a
            # refine: xi = (b + xi')/2 with a fresh random bit b
            b = self.rng.getrandbits(1)
            self.bits_drawn += 1
            q = p * b + 2 * q
            s = r * b + 2 * s
            if not (p & 1 or q & 1 or r & 1 or s & 1):
                p >>= 1
                q >>= 1
                r >>= 1
                s >>= 1
            self._p, self._q, self._r, self._s = p, q, r, s


def head_digits(t: QNum, min_den: int) -> List[int]:
    """Leading digits of t in (0,1), until the convergent denominator
    reaches min_den.  All arithmetic is exact."""
    if not (QNum.of(0) < t < QNum.of(1)):
        raise ValueError("head extraction needs t in (0,1)")
    out: List[int] = []
    k_prev, k_cur = 0, 1
    cur = t
    while k_cur < min_den:
        inv = cur.inverse()
        a = inv.floor()
        if a < 1:
            raise TieBreak("digit extraction left (0,1)")
        out.append(a)
        cur = inv - QNum.of(a)
        k_prev, k_cur = k_cur, a * k_cur + k_prev
        if cur.sign() == 0:
            raise TieBreak("rational direction parameter")
    return out


def cf_compare(n: int, d: int, dig: Callable[[int], int], max_depth: int = 80) -> int:
    """Exact sign of [0; dig(0), dig(1), ...] - n/d for integers n, d > 0."""
    sgn = 1
    j = 0
    while j < max_depth:
        if n <= 0:
            return sgn
        if n >= d:
            return -sgn
        a = dig(j)
        quo, rem = divmod(d, n)
        if a > quo:
            return -sgn
        if a < quo:
            return sgn
        if rem == 0:
            # n/d = 1/(quo) exactly; the stream value is strictly smaller
            return -sgn
        n, d = rem, n
        sgn = -sgn
        j += 1
    raise TieBreak("continued-fraction comparison did not resolve")


def affine_sign(dx: int, dy: int, dig: Callable[[int], int]) -> int:
    """Exact sign of dx + dy*rho where rho = [0; dig(0), dig(1), ...]."""
    if dy == 0:
        return (dx > 0) - (dx < 0)
    if dx == 0:
        return (dy > 0) - (dy < 0)
    if dx > 0 and dy > 0:
        return 1
    if dx < 0 and dy < 0:
        return -1
    if dy > 0:
        # sign(rho - (-dx)/dy)
        return cf_compare(-dx, dy, dig)
    # dx > 0, dy < 0: sign(dx/(-dy) - rho)
    return -cf_compare(dx, -dy, dig)

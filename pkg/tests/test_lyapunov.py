"""Lyapunov-module oracles, frozen before the estimator was run.

Exact formulas:
- [PAPER] the sum rule right-hand side (1/4) sum over odd orders 1/(d+2)
  evaluates to: signature (-1,-1,-1,-1) [genus 0, four poles, sum -4] ->
  (1/4)*4*(1/1) = 1; signature (1,1,1,1) [sum 4] -> (1/4)*4*(1/3) = 1/3;
  signature (2,2) -> 0 (no odd orders).
- [DERIVED] rectangle-census sum rule: census (0,2,0) gives
  2 - 2/3 - 0 = 4/3; census (1,1,1) gives 2 - 1/3 - 1/2 + 0 = 7/6.
- [DERIVED] census triples with m3/3 + m4/2 <= 1 under the Euler identity
  -2*m1 + 2*m3 + 4*m4 = 4: exactly five triples, frozen below.
- [TRIVIAL] InvalidSignature on orders that do not sum to 4g - 4, or
  contain 0 or values below -1.

Direction streams:
- [DERIVED] the continued fraction of (sqrt(5)-1)/2 is [0; 1, 1, 1, ...],
  so head_digits on it returns all ones.
- [TRIVIAL] cf_compare against Fraction arithmetic on finite continued
  fractions; affine_sign is a sign table plus one cf_compare call.
- [DERIVED] digits of a uniform random real follow the Gauss-Kuzmin law;
  P(a = 1) = log2(4/3) ~ 0.415 (checked loosely).

Spectrum estimates (statistical, loose tolerances):
- [DERIVED] one-square torus: the only tracked row is the tautological
  absorber; its windowed rate is the top exponent 1 (tolerance 0.02).
- [PAPER] wind-tree bundle: both leading exponents equal 2/3 and the dual
  (inverse-cocycle) measurement mirrors them; a short run must land within
  0.08 of 2/3 and be symmetric within 2 stderr.
"""

import random
from fractions import Fraction as F

import pytest

from windtree.direction import DirectionStream, affine_sign, cf_compare, head_digits
from windtree.errors import InvalidSignature, WindtreeError
from windtree.geometry import CornerCensus, LatticeBasis, corner_census, make_rectangle
from windtree.homology import HomologyModel, involution_action, splitting
from windtree.lyapunov import (
    LyapunovEstimate,
    Verdict,
    census_triples_with_small_angles,
    ekz_rhs,
    lyapunov_spectrum,
    nonergodicity_verdict,
    sample_direction,
    sum_formula,
)
from windtree.qfield import QNum, qsqrt
from windtree.surface import Origami, unfold


# ---------------------------------------------------------------------------
# exact formulas
# ---------------------------------------------------------------------------


def test_ekz_rhs_frozen_values():
    assert ekz_rhs([-1, -1, -1, -1]) == F(1)             # [PAPER]
    assert ekz_rhs([1, 1, 1, 1]) == F(1, 3)              # [PAPER]
    assert ekz_rhs([2, 2]) == F(0)                       # [TRIVIAL]


def test_ekz_rhs_rejects_bad_signatures():
    with pytest.raises(InvalidSignature):
        ekz_rhs([1, 1, 1])       # sums to 3, not 4g-4
    with pytest.raises(InvalidSignature):
        ekz_rhs([0, 4])          # zero order
    with pytest.raises(InvalidSignature):
        ekz_rhs([-2, 2, 4])      # below -1


def test_sum_formula_rectangle_and_suckered():
    assert sum_formula(CornerCensus(0, 2, 0)) == F(4, 3)     # [DERIVED]
    assert sum_formula(CornerCensus(2, 2, 1)) == F(2) - F(2, 3) - F(1, 2)
    assert sum_formula(CornerCensus(1, 1, 1), F(1, 6)) == F(4, 3)


def test_census_triples_frozen():
    # [DERIVED] m3 = 2 + m1 - 2 m4 from the Euler identity; scanning m1, m4
    # and keeping m3/3 + m4/2 <= 1 leaves exactly these five (hand check)
    assert census_triples_with_small_angles() == [
        (0, 0, 1), (0, 2, 0), (1, 1, 1), (1, 3, 0), (2, 0, 2),
    ]


def test_verdict_census_fires():
    v = nonergodicity_verdict(census=CornerCensus(0, 2, 0))
    assert v.fired == "census"


def test_verdict_square_tiled_fires():
    v = nonergodicity_verdict(g=5, p=2, d=8)
    assert v.fired == "square-tiled"
    v2 = nonergodicity_verdict(g=5, p=2, d=6)
    assert v2.fired is None


def test_verdict_spectrum_fires():
    est = LyapunovEstimate(
        exponents=[0.66, 0.66, -0.66, -0.66], stderr=[0.01] * 4,
        taut_norm=1.0, taut_norm_stderr=0.0, grouped_steps=0, raw_steps=0,
        directions=1, seed=0,
    )
    assert nonergodicity_verdict(estimate=est).fired == "wind-tree-spectrum"


# ---------------------------------------------------------------------------
# direction streams
# ---------------------------------------------------------------------------


def test_head_digits_golden():
    # [DERIVED] (sqrt5 - 1)/2 = [0; 1, 1, 1, ...]
    t = (qsqrt(5) - 1) / 2
    digs = head_digits(t, 1 << 40)
    assert all(a == 1 for a in digs)
    assert len(digs) >= 40


def test_head_digits_match_fraction_expansion():
    # [TRIVIAL] cross-check against Fraction continued-fraction expansion
    t = QNum(F(355, 1130), F(1, 10 ** 12), 2)
    digs = head_digits(t, 10 ** 4)
    n, d = 355, 1130
    for a in digs[:3]:
        assert a == d // n
        n, d = d - (d // n) * n, n


def test_cf_compare_against_fractions():
    rng = random.Random(5)
    for _ in range(200):
        digs = [rng.randrange(1, 9) for _ in range(12)]
        val = F(0)
        for a in reversed(digs):
            val = 1 / (a + val)
        n = rng.randrange(1, 50)
        d = rng.randrange(1, 50)
        if F(n, d) == val:
            continue
        got = cf_compare(n, d, lambda j: digs[j] if j < len(digs) else 10 ** 9)
        assert got == (1 if val > F(n, d) else -1)


def test_affine_sign_table():
    dig = lambda j: 2  # rho = sqrt2 - 1
    assert affine_sign(3, 0, dig) == 1
    assert affine_sign(-3, 0, dig) == -1
    assert affine_sign(0, 2, dig) == 1
    assert affine_sign(1, 1, dig) == 1
    assert affine_sign(-1, -1, dig) == -1
    # sign of -2 + 5*(sqrt2 - 1) = 5 sqrt2 - 7 > 0; of -3 + 7*(sqrt2-1) < 0
    assert affine_sign(-2, 5, dig) == 1
    assert affine_sign(-3, 7, dig) == -1
    assert affine_sign(5, -12, dig) == 1
    assert affine_sign(2, -5, dig) == -1


def test_stream_digits_positive_and_gauss_kuzmin():
    rng = random.Random(11)
    st = DirectionStream([], rng)
    digs = [st.digit(i) for i in range(20000)]
    assert all(a >= 1 for a in digs)
    p1 = digs.count(1) / len(digs)
    assert abs(p1 - 0.4150) < 0.02   # [DERIVED] log2(4/3)


def test_stream_prescribed_head():
    rng = random.Random(3)
    st = DirectionStream([2, 7, 1], rng)
    assert [st.digit(i) for i in range(3)] == [2, 7, 1]


def test_sample_direction_slope_range():
    rng = random.Random(9)
    for _ in range(5):
        s = sample_direction(rng)
        assert QNum.of(1) < s.u < QNum.of(2)
        assert not s.u.is_rational()
        assert len(s.stream.digits) >= 20


# ---------------------------------------------------------------------------
# spectrum estimates
# ---------------------------------------------------------------------------


def _windtree_model():
    z2 = LatticeBasis((F(1), F(0)), (F(0), F(1)))
    surf = unfold(z2, make_rectangle(F(1, 2), F(1, 2)))
    model = HomologyModel(surf.origami, validate=False)
    acts = {w: involution_action(surf, model, w) for w in ("tau", "zeta0", "zeta1")}
    spl = splitting(model, acts, corner_census(surf.polygon))
    return model, acts, spl


def test_torus_tautological_exponent():
    og = Origami(h=[0], v=[0])
    model = HomologyModel(og, validate=False)
    rng = random.Random(123)
    from windtree.lyapunov import run_direction

    s = sample_direction(rng)
    run = run_direction(model, [], s, 30000, rng)
    assert abs(run.forward_rates[0] - 1.0) < 0.02
    assert abs(run.dual_rates[0] - 1.0) < 0.02


@pytest.mark.slow
def test_windtree_bundle_spectrum_short():
    model, acts, spl = _windtree_model()
    classes = [list(g) for g in spl.K1][:2]
    est = lyapunov_spectrum(
        model, classes, n_steps=40000, n_directions=6, seed=77, action=acts["tau"],
    )
    assert 0.95 < est.taut_norm < 1.05
    assert abs(est.exponents[0] - 2 / 3) < 0.08
    assert abs(est.exponents[1] - 2 / 3) < 0.08
    assert est.symmetric_within(2.0)
    assert est.grouped_steps >= 6 * 40000


def test_invariant_subspace_check_rejects_garbage():
    model, acts, spl = _windtree_model()
    from windtree.linal import mat_vec
    from windtree.lyapunov import _check_invariant_subspace

    ok = [list(g) for g in spl.K1][:1]
    _check_invariant_subspace(model, ok, acts["tau"])
    # mix the two eigenspaces: K1 is tau-negated, so adding any tau-fixed
    # basis vector produces a non-eigenvector
    fixed = None
    for i in range(model.rank):
        e = [F(0)] * model.rank
        e[i] = F(1)
        if mat_vec(acts["tau"], e) == e:
            fixed = e
            break
    assert fixed is not None
    bad = [[int(a) + int(b) for a, b in zip(ok[0], fixed)]]
    with pytest.raises(WindtreeError):
        _check_invariant_subspace(model, bad, acts["tau"])

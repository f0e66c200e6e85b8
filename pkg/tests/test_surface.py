"""Unfolding / homology tests.

Oracles and frozen values, fixed before implementation:
- [TRIVIAL] torus facts (genus 1, <sigma, zeta> = +1 by the calibration
  convention), area conservation 4*(covolume - obstacle area).
- [DERIVED] L-origami: 3 squares, one vertex of cone angle 6*pi, genus 2
  (hand-counted sector walk).
- [DERIVED] census formulas: g = 2*m3 + 2*m4 + 1, stratum orders
  0^(2*m1) 1^(4*m4) 2^(2*m3); rectangle (0,2,0) -> g=5, H(2,2,2,2);
  type-a sucker (2,2,1) -> g=7, H(0^4,1^4,2^4).
- [DERIVED] pairing table <h_i, v_j> = 2*delta_ij from two transverse
  crossings per pair of copies; derived class identities and eigenspace
  dimensions (4, 0, 6) for the rectangle case.
"""

from fractions import Fraction

import pytest

from windtree.errors import (
    DimensionMismatch,
    NotCommensurable,
    NotSymmetric,
)
from windtree.geometry import (
    LatticeBasis,
    corner_census,
    make_rectangle,
    make_suckered_rectangle,
)
from windtree.homology import (
    HomologyModel,
    Splitting,
    attach_named_classes,
    involution_action,
    origami_splitting,
    splitting,
)
from windtree.qfield import qsqrt
from windtree.surface import Origami, genus_and_stratum, to_origami, unfold

F = Fraction
Z2 = LatticeBasis((1, 0), (0, 1))


def test_torus_basics():
    og = Origami([0], [0])
    assert og.genus() == 1
    assert og.cone_orders() == [0]
    model = HomologyModel(og)
    assert model.rank == 2
    sigma = model.reduce([1, 0])
    zeta = model.reduce([0, 1])
    assert model.pair(sigma, zeta) == 1  # calibration: <sigma, zeta> = +1
    assert model.hol(sigma) == (1, 0) and model.hol(zeta) == (0, 1)
    sp = origami_splitting(model)
    assert sp["zero"] == []  # g = 1


def test_L_origami():
    og = Origami([1, 0, 2], [2, 1, 0])
    assert og.genus() == 2
    assert sorted(og.cone_orders()) == [2]
    model = HomologyModel(og)
    assert model.rank == 4
    sp = origami_splitting(model)
    assert len(sp["zero"]) == 2
    assert model.hol(sp["sigma"]) == (3, 0)
    assert model.hol(sp["zeta"]) == (0, 3)


def test_unfold_counts_and_area():
    p = make_rectangle(F(1, 2), F(1, 2))
    surf = unfold(Z2, p)
    assert surf.origami.n_squares == 48  # scale 4, 12 free cells, 4 copies
    assert surf.area() == 3  # 4 * (1 - 1/4)
    g, stratum = genus_and_stratum(surf)
    assert (g, stratum) == (5, (2, 2, 2, 2))


def test_to_origami_anchored_counting():
    # corner-anchored half-unit obstacle: 2x2 cell grid minus 1, four copies
    og = to_origami(Z2, make_rectangle(F(1, 2), F(1, 2)), anchor=(F(3, 4), F(3, 4)))
    assert og.n_squares == 12
    assert og.genus() == 5


def test_unfold_sucker_stratum():
    p = make_suckered_rectangle("a", F(1, 2), F(1, 4), F(1, 8))
    surf = unfold(Z2, p)
    c = corner_census(p)
    g, stratum = genus_and_stratum(surf)
    assert g == c.genus() == 7
    assert stratum == c.stratum() == (0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2)


def test_unfold_errors():
    with pytest.raises(NotCommensurable):
        unfold(LatticeBasis((1, qsqrt(2) / 2), (0, 1)), make_rectangle(F(1, 2), F(1, 4)))
    with pytest.raises(NotSymmetric):
        unfold(Z2, make_suckered_rectangle("b", F(1, 2), F(1, 4), F(1, 16), F(1, 8)))


@pytest.fixture(scope="module")
def setup():
    p = make_rectangle(F(1, 2), F(1, 2))
    surf = unfold(Z2, p)
    model = HomologyModel(surf.origami)
    attach_named_classes(model, surf)
    acts = {w: involution_action(surf, model, w) for w in ("tau", "zeta0", "zeta1")}
    return p, surf, model, acts


class TestRectanglePipeline:
    """The full exact pipeline on E(Z^2, 1/2, 1/2)."""

    def test_rank_and_form(self, setup):
        _, _, model, _ = setup
        assert model.rank == 10  # 2g, g = 5

    def test_pairing_table(self, setup):
        _, _, model, _ = setup
        nm = model.named
        for a in range(2):
            for b in range(2):
                expect = 2 if a == b else 0
                assert model.pair(nm[f"h_{a}"], nm[f"v_{b}"]) == expect
                assert model.pair(nm[f"h_{a}"], nm[f"h_{b}"]) == 0
                assert model.pair(nm[f"v_{a}"], nm[f"v_{b}"]) == 0
        assert model.pair(nm["gamma_h"], nm["gamma_v"]) == 0

    def test_distinguished_holonomy(self, setup):
        _, _, model, _ = setup
        assert model.hol(model.named["gamma_v"]) == (0, 0)
        assert model.hol(model.named["gamma_h"]) == (0, 0)

    def test_involutions(self, setup):
        _, _, model, acts = setup
        n = model.rank

        def matmul(A, B):
            return [
                [sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)]
                for i in range(n)
            ]

        ident = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        for w in ("tau", "zeta0", "zeta1"):
            assert matmul(acts[w], acts[w]) == ident
        assert matmul(acts["zeta0"], acts["tau"]) == acts["zeta1"]

    def test_zeta0_negates_core_loops(self, setup):
        _, _, model, acts = setup
        n = model.rank
        M = acts["zeta0"]
        for i in range(2):
            for j in range(2):
                for cname in (f"v{i}{j}", f"h{i}{j}"):
                    c = model.named[cname]
                    img = [sum(M[a][b] * c[b] for b in range(n)) for a in range(n)]
                    assert img == [-x for x in c], cname

    def test_splitting_dims_and_membership(self, setup):
        p, _, model, acts = setup
        sp = splitting(model, acts, corner_census(p))
        assert sp.dims() == (4, 0, 6)
        # gamma_v, gamma_h in K1: projection onto K1 is the identity on them
        for name in ("gamma_v", "gamma_h"):
            c = [Fraction(x) for x in model.named[name]]
            proj = model.project(c, sp.K1)
            assert proj == c

    def test_projector_properties(self, setup):
        p, _, model, acts = setup
        sp = splitting(model, acts, corner_census(p))
        rho = [Fraction((-1) ** i * (i + 2), 3) for i in range(model.rank)]
        prho = model.project(rho, sp.K1)
        assert model.project(prho, sp.K1) == prho  # idempotent
        resid = [a - b for a, b in zip(rho, prho)]
        for b in sp.K1:
            assert model.pair(prho, resid) == 0
            assert model.pair(b, resid) == 0  # residual symplectically orthogonal to K1

import math

import numpy as np
import pytest

from confmom.atlas5d import (
    Branch,
    HyperboloidPoint,
    Region,
    attach,
    classify,
    gauge_shift,
    naive_gauge_q5_sq,
    invert_point,
    lambda_of,
    lambda_of_sq,
    point_of_lambda,
    shell_residual,
    translate_on_shell,
)
from confmom.conformal4d import Dilatation, apply
from confmom.errors import DomainError, LightlikeInversion


def timelike(q_sq):
    return np.array([math.sqrt(q_sq), 0.0, 0.0, 0.0])


def spacelike(q_sq):
    return np.array([0.0, math.sqrt(-q_sq), 0.0, 0.0])


class TestClassify:
    @pytest.mark.parametrize("q_sq, region", [(0.5, Region.I), (2.0, Region.II), (-2.0, Region.III),
                                              (-0.5, Region.IV), (0.0, Region.I), (1.0, Region.I),
                                              (-1.0, Region.IV)])
    def test_probes(self, q_sq, region):
        assert classify(q_sq, 1.0) is region

    def test_scales_with_M(self):
        assert classify(3.0, 2.0) is Region.I
        assert classify(5.0, 2.0) is Region.II

    def test_branches(self):
        assert {r for r in Region if r.branch is Branch.INTERNAL} == {Region.I, Region.III}

    def test_large_M_limit(self):
        q = np.array([3.0, 1.0, 2.0, 0.5])
        for M in (10.0, 100.0, 1e4):
            assert attach(q, M).region in (Region.I, Region.IV)


class TestAttach:
    def test_region_I(self):
        p = attach([0.5, 0, 0, 0], 1.0)
        assert p.q5 ** 2 == pytest.approx(0.75)
        assert p.branch is Branch.INTERNAL

    def test_region_II(self):
        p = attach(timelike(3.0), 1.0)
        assert p.q5 ** 2 == pytest.approx(4.0)
        assert p.branch is Branch.EXTERNAL

    def test_origin(self):
        assert attach(np.zeros(4), 1.0).q5 == 1.0

    def test_point_validation(self):
        with pytest.raises(DomainError):
            HyperboloidPoint(timelike(0.25), 0.1, Branch.INTERNAL, Region.I, 1.0)
        with pytest.raises(ValueError):
            HyperboloidPoint(timelike(0.25), -math.sqrt(0.75), Branch.INTERNAL, Region.I, 1.0)


class TestInvertPoint:
    def test_region_I_to_II(self):
        ip = invert_point(attach(timelike(0.25), 1.0))
        assert ip.q_sq == pytest.approx(4.0)
        assert ip.region is Region.II and ip.branch is Branch.EXTERNAL

    @pytest.mark.parametrize("q", [timelike(0.3), timelike(3.0), spacelike(-3.0), spacelike(-0.3)])
    def test_swap_and_involution(self, q):
        p = attach(q, 1.0)
        ip = invert_point(p)
        assert ip.region is p.region.dual
        np.testing.assert_allclose(invert_point(ip).q, p.q, rtol=1e-14)

    def test_unit_square_fixed(self):
        ip = invert_point(attach(timelike(1.0), 1.0))
        assert ip.q_sq == pytest.approx(1.0)

    def test_lightlike(self):
        with pytest.raises(LightlikeInversion):
            invert_point(attach([1.0, 1.0, 0.0, 0.0], 1.0))


class TestLambda:
    def test_lambda_row_region_I(self):
        q_sq, q5_sq, region = point_of_lambda(math.log(2.0), 1.0)
        assert (q_sq, q5_sq, region) == (0.25, 0.75, Region.I)

    def test_lambda_row_region_II(self):
        assert lambda_of_sq(2.0, 1.0) == -0.5 * math.log(2.0)

    def test_zero(self):
        assert point_of_lambda(0.0, 1.0)[0] == 1.0
        assert point_of_lambda(0.0, 1.0, timelike=False)[0] == -1.0

    def test_undefined_at_origin(self):
        with pytest.raises(DomainError):
            lambda_of_sq(0.0, 1.0)

    @pytest.mark.parametrize("lam", [-3.0, -0.2, 0.7, 4.0])
    def test_lambda_points_on_shell(self, lam):
        for tl in (True, False):
            q_sq, q5_sq, region = point_of_lambda(lam, 1.3, tl)
            assert shell_residual(q_sq, q5_sq, region.branch, 1.3) == pytest.approx(0.0, abs=1e-12)

    def test_dilatation_shifts_lambda(self):
        p = attach(timelike(0.3), 1.0)
        q = apply(Dilatation(0.25), p.q, 1.0)
        assert lambda_of(attach(q, 1.0)) == pytest.approx(lambda_of(p) - 0.25)


class TestTranslateOnShell:
    def test_timelike_shift(self):
        t = translate_on_shell(attach([0.5, 0, 0, 0], 1.0), [0.25, 0, 0, 0])
        assert t.q_sq == pytest.approx(9 / 16)
        assert t.q5_sq == pytest.approx(7 / 16)
        assert t.residual == pytest.approx(0.0, abs=1e-15)

    def test_zero_shift(self):
        p = attach([0.5, 0.1, 0, 0], 1.0)
        t = translate_on_shell(p, np.zeros(4))
        np.testing.assert_array_equal(t.q, p.q)
        assert t.q5 == pytest.approx(p.q5)
        assert not t.transition

    def test_transition_flag(self):
        # internal point pushed to q^2 > M^2 cannot keep a real q5 on its shell
        t = translate_on_shell(attach([0.5, 0, 0, 0], 1.0), [1.5, 0, 0, 0])
        assert t.transition and t.branch is Branch.EXTERNAL
        assert t.residual == pytest.approx(0.0, abs=1e-12)

    def test_external_stays_external(self):
        p = attach(timelike(3.0), 1.0)
        t = translate_on_shell(p, [0.2, 0.1, 0.0, 0.0])
        assert t.branch is Branch.EXTERNAL and not t.transition


class TestGaugeShift:
    def test_zero_charge(self):
        p = attach([0.5, 0.1, 0, 0], 1.0)
        assert gauge_shift(p, [1.0, 2.0, 3.0, 4.0], 0.0) is p

    def test_to_origin(self):
        p = attach([0.5, 0.1, 0, 0], 1.0)
        g = gauge_shift(p, p.q / 2.0, 2.0)
        np.testing.assert_allclose(g.q, 0.0, atol=1e-15)
        assert g.region is Region.I and g.q5 == pytest.approx(1.0)

    def test_naive_formula_breaks_shell(self):
        p = attach([0.5, 0.1, 0, 0], 1.0)
        A = np.array([0.2, 0.0, 0.1, 0.0])
        naive = naive_gauge_q5_sq(p, A, 0.7)
        assert abs(naive - gauge_shift(p, A, 0.7).q5_sq) > 1e-3

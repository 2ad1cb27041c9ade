"""Hypothesis sweeps over the group action, the atlas and the model maps."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from confmom import atlas5d as at
from confmom import cone6d as cn
from confmom.conformal4d import (
    Dilatation,
    Inversion,
    SpecialConformal,
    Translation,
    apply,
    apply_word,
    boost,
    conjugate_by_inversion,
    inverse,
    invert,
    mdot,
    minkowski_sq,
    rotation,
)
from confmom.fifthdim import BranchSpec, l_from_source, plane_wave_source
from confmom.models import HiggsParams, SigmaParams, higgs_L_int, sigma_chi_to_pi, sigma_pi_to_chi

real = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
vec4 = st.tuples(real, real, real, real).map(np.array)
small4 = st.tuples(*[st.floats(-0.5, 0.5)] * 4).map(np.array)
scale = st.floats(0.3, 3.0)

SETTINGS = settings(max_examples=200, deadline=None)


def regular(q, M):
    q2 = minkowski_sq(q)
    return abs(q2) > 1e-3 * (float(q @ q) + M * M)


def sct_regular(q, b, M):
    q2, M2 = minkowski_sq(q), M * M
    den = 1 - 2 * mdot(q, b) / M2 + minkowski_sq(b) * q2 / M2 ** 2
    return abs(den) > 0.05


@st.composite
def elements(draw):
    kind = draw(st.sampled_from(["t", "d", "b", "r", "s", "i"]))
    match kind:
        case "t":
            return Translation(draw(small4))
        case "d":
            return Dilatation(draw(st.floats(-1, 1)))
        case "b":
            return boost(draw(st.floats(-1, 1)), draw(st.sampled_from([1, 2, 3])))
        case "r":
            return rotation(draw(st.floats(-3, 3)), draw(st.sampled_from([1, 2, 3])))
        case "s":
            return SpecialConformal(draw(small4))
    return Inversion()


def action_is_regular(e, q, M):
    if isinstance(e, Inversion):
        return regular(q, M)
    if isinstance(e, SpecialConformal):
        return sct_regular(q, e.b, M)
    return True


class TestGroupProperties:
    @SETTINGS
    @given(vec4, scale)
    def test_inversion_involution(self, q, M):
        assume(regular(q, M))
        np.testing.assert_allclose(invert(invert(q, M), M), q, rtol=1e-10, atol=1e-12)

    @SETTINGS
    @given(vec4, small4, scale)
    def test_special_conformal_is_i_t_i(self, q, b, M):
        assume(regular(q, M) and sct_regular(q, b, M))
        qi = invert(q, M)
        assume(regular(qi + b, M))
        lhs = apply(SpecialConformal(b), q, M)
        rhs = apply_word([Inversion(), Translation(b), Inversion()], q, M)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-8, atol=1e-10 * (1 + np.max(np.abs(lhs))))

    @SETTINGS
    @given(elements(), vec4, scale)
    def test_inverse_undoes(self, e, q, M):
        assume(action_is_regular(e, q, M))
        q1 = apply(e, q, M)
        assume(action_is_regular(inverse(e), q1, M))
        np.testing.assert_allclose(apply(inverse(e), q1, M), q, rtol=1e-8, atol=1e-9)

    @SETTINGS
    @given(elements(), vec4, scale)
    def test_conjugation(self, e, q, M):
        assume(regular(q, M))
        qi = invert(q, M)
        assume(action_is_regular(e, qi, M))
        q2 = apply(e, qi, M)
        assume(regular(q2, M))
        c = conjugate_by_inversion(e)
        assume(action_is_regular(c, q, M))
        lhs = apply(c, q, M)
        np.testing.assert_allclose(lhs, invert(q2, M), rtol=1e-7, atol=1e-9 * (1 + np.max(np.abs(lhs))))

    @SETTINGS
    @given(elements(), vec4, scale, st.floats(0.2, 5.0))
    def test_cone_equivariance(self, e, q, M, kplus):
        assume(action_is_regular(e, q, M))
        expected = apply(e, q, M)
        got = cn.act(e, q, M, kplus)
        np.testing.assert_allclose(got, expected, rtol=1e-8, atol=1e-10 * (1 + np.max(np.abs(expected))))

    @SETTINGS
    @given(elements(), scale)
    def test_six_rotations_pseudo_orthogonal(self, e, M):
        assert cn.pseudo_orthogonality_residual(cn.rotation_matrix(e, M).G) < 1e-10


class TestAtlasProperties:
    @SETTINGS
    @given(vec4, scale)
    def test_attach_on_shell(self, q, M):
        p = at.attach(q, M)
        assert abs(p.residual) <= 1e-10 * max(M * M, abs(p.q_sq))
        assert p.q5 >= 0

    @SETTINGS
    @given(vec4, scale)
    def test_inversion_swaps_regions(self, q, M):
        assume(regular(q, M) and abs(abs(minkowski_sq(q)) - M * M) > 1e-6 * M * M)
        p = at.attach(q, M)
        ip = at.invert_point(p)
        assert ip.region is p.region.dual
        assert ip.q_sq * p.q_sq == pytest.approx(M ** 4, rel=1e-10)

    @SETTINGS
    @given(vec4, small4, scale)
    def test_translation_keeps_shell(self, q, h, M):
        t = at.translate_on_shell(at.attach(q, M), h)
        assert abs(t.residual) <= 1e-10 * max(M * M, abs(t.q_sq))

    @SETTINGS
    @given(vec4, small4, st.floats(-2, 2), scale)
    def test_gauge_shift_keeps_shell(self, q, A, e, M):
        g = at.gauge_shift(at.attach(q, M), A, e)
        assert abs(g.residual) <= 1e-10 * max(M * M, abs(g.q_sq))

    @SETTINGS
    @given(st.floats(-5, 5), scale, st.booleans())
    def test_lambda_round_trip(self, lam, M, timelike):
        q_sq, _, _ = at.point_of_lambda(lam, M, timelike)
        assert at.lambda_of_sq(q_sq, M) == pytest.approx(lam, abs=1e-12)


class TestModelProperties:
    @SETTINGS
    @given(st.sampled_from(list(at.Branch)), st.floats(0, 2), scale, st.floats(-3, 3),
           st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
    def test_plane_wave_round_trip(self, branch, m, M, q5, l):
        spec = BranchSpec(branch, m, M)
        assume(abs(q5 + M * spec.eta) > 1e-3 * M)
        back = l_from_source(plane_wave_source(l, q5, spec), q5, spec)
        assert abs(back - l) <= 1e-12 * max(1.0, abs(l))

    @SETTINGS
    @given(st.tuples(*[st.floats(-0.5, 0.5)] * 3).map(np.array), st.floats(0.5, 100))
    def test_chi_round_trip(self, unit_pi, f):
        p = SigmaParams(1.0, at.Branch.EXTERNAL, f)
        pi = f * unit_pi
        np.testing.assert_allclose(sigma_chi_to_pi(sigma_pi_to_chi(pi, p), p), pi, rtol=1e-12, atol=1e-14 * f)

    @SETTINGS
    @given(st.floats(-5, 5), st.floats(0.1, 3), scale)
    def test_higgs_even_and_branch_odd(self, x, f, M):
        inner, outer = HiggsParams(f, M), HiggsParams(f, M, at.Branch.EXTERNAL)
        assert higgs_L_int(x, inner) == pytest.approx(higgs_L_int(-x, inner))
        assert higgs_L_int(x, outer) == -higgs_L_int(x, inner)
        assume(abs(x) > 1e-6)
        assert math.copysign(1.0, higgs_L_int(x, inner)) == math.copysign(1.0, 0.5 * f * abs(x) - M) or \
            abs(0.5 * f * abs(x) - M) < 1e-9

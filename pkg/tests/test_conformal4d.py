import numpy as np
import pytest
from scipy.linalg import expm

from confmom.conformal4d import (
    METRIC4,
    ConformalWord,
    Dilatation,
    Inversion,
    Lorentz,
    SpecialConformal,
    Translation,
    apply,
    apply_word,
    boost,
    boost_velocity,
    conjugate_by_inversion,
    infinitesimal_variation,
    invariant_split,
    inverse,
    invert,
    is_lightlike,
    mdot,
    minkowski_sq,
    parse_element,
    parse_word,
    rotation,
)
from confmom.errors import LightlikeInversion, NotPseudoOrthogonal, SingularSpecialConformal, StepError


class TestMetric:
    def test_signature(self):
        assert minkowski_sq(np.array([2.0, 1.0, 0.0, 0.0])) == 3.0
        assert minkowski_sq(np.array([0.0, 1.0, 1.0, 1.0])) == -3.0

    def test_mdot_symmetric(self):
        rng = np.random.default_rng(1)
        p, q = rng.normal(size=(2, 4))
        assert mdot(p, q) == pytest.approx(mdot(q, p))

    def test_lightlike_detection(self):
        assert is_lightlike(np.array([1.0, 1.0, 0.0, 0.0]), 1.0)
        assert not is_lightlike(np.array([1.0, 0.5, 0.0, 0.0]), 1.0)


class TestInversion:
    def test_timelike_example(self):
        np.testing.assert_allclose(invert(np.array([2.0, 0, 0, 0]), 1.0), [-0.5, 0, 0, 0])

    def test_product_of_squares(self):
        q = np.array([0.3, 1.2, -0.4, 0.9])
        qi = invert(q, 1.7)
        assert minkowski_sq(qi) * minkowski_sq(q) == pytest.approx(1.7 ** 4)

    def test_involution(self):
        q = np.array([0.3, 1.2, -0.4, 0.9])
        np.testing.assert_allclose(invert(invert(q, 2.0), 2.0), q, rtol=1e-14)

    def test_lightlike_raises(self):
        with pytest.raises(LightlikeInversion):
            invert(np.array([1.0, 0.0, 1.0, 0.0]), 1.0)

    def test_rejects_bad_scale(self):
        with pytest.raises(ValueError):
            invert(np.array([1.0, 0, 0, 0]), 0.0)


class TestLorentz:
    def test_boost_preserves_square(self):
        q = np.array([1.3, 0.2, -0.7, 0.4])
        L = boost(0.8, 2)
        assert minkowski_sq(apply(L, q, 1.0)) == pytest.approx(minkowski_sq(q))

    def test_rotation_composition(self):
        a, b = rotation(0.3, 3), rotation(0.4, 3)
        np.testing.assert_allclose(a.matrix @ b.matrix, rotation(0.7, 3).matrix, atol=1e-14)

    def test_velocity_boost_rest_frame(self):
        m = 2.0
        beta = np.array([0.3, -0.2, 0.1])
        gamma = 1 / np.sqrt(1 - beta @ beta)
        p = m * gamma * np.concatenate([[1.0], beta])
        rest = apply(boost_velocity(beta), p, 1.0)
        np.testing.assert_allclose(rest, [m, 0, 0, 0], atol=1e-12)

    def test_rejects_non_lorentz(self):
        with pytest.raises(NotPseudoOrthogonal):
            Lorentz(np.diag([2.0, 1.0, 1.0, 1.0]))


class TestSpecialConformal:
    def test_zero_parameter_is_identity(self):
        q = np.array([0.4, 0.1, 0.2, 0.3])
        np.testing.assert_allclose(apply(SpecialConformal(np.zeros(4)), q, 1.0), q)

    def test_matches_inversion_translation_inversion(self):
        q = np.array([0.7, 0.1, 0.2, -0.3])
        b = np.array([0.2, -0.1, 0.05, 0.3])
        lhs = apply(SpecialConformal(b), q, 1.3)
        rhs = apply_word([Inversion(), Translation(b), Inversion()], q, 1.3)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12)

    def test_lightlike_input_is_regular(self):
        q = np.array([1.0, 1.0, 0.0, 0.0])
        b = np.array([0.1, 0.0, 0.2, 0.0])
        np.testing.assert_allclose(apply(SpecialConformal(b), q, 1.0), q / (1 - 2 * mdot(q, b)))

    def test_singular_denominator(self):
        # 1 - 2 q.b/M^2 + b^2 q^2/M^4 vanishes when b = q M^2/q^2
        q = np.array([2.0, 0.0, 0.0, 0.0])
        with pytest.raises(SingularSpecialConformal):
            apply(SpecialConformal(q / 4.0), q, 1.0)


class TestWords:
    def test_right_to_left(self):
        q = np.array([1.0, 0.0, 0.0, 0.0])
        w = ConformalWord((Translation([1.0, 0, 0, 0]), Dilatation(np.log(2.0))))
        np.testing.assert_allclose(apply_word(w, q, 1.0), [3.0, 0, 0, 0])

    def test_step_index_reported(self):
        w = [Inversion(), Translation([-1.0, 0.0, 0.0, 0.0]), Dilatation(0.0)]
        with pytest.raises(StepError) as info:
            apply_word(w, np.array([2.0, 1.0, 0.0, 0.0]), 1.0)
        assert info.value.index == 0

    @pytest.mark.parametrize("e", [Translation([0.1, 0.2, 0.3, 0.4]), Dilatation(0.3), boost(0.4, 1),
                                   SpecialConformal([0.1, 0.0, -0.2, 0.1]), Inversion()])
    def test_inverse(self, e):
        q = np.array([0.9, 0.2, -0.1, 0.3])
        np.testing.assert_allclose(apply(inverse(e), apply(e, q, 1.0), 1.0), q, rtol=1e-12)

    @pytest.mark.parametrize("e", [Translation([0.1, 0.2, 0.3, 0.4]), Dilatation(0.3), rotation(0.4, 2),
                                   SpecialConformal([0.1, 0.0, -0.2, 0.1])])
    def test_conjugation_by_inversion(self, e):
        q = np.array([0.9, 0.2, -0.1, 0.3])
        lhs = apply(conjugate_by_inversion(e), q, 1.2)
        rhs = apply_word([Inversion(), e, Inversion()], q, 1.2)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


class TestInfinitesimal:
    q = np.array([0.9, 0.2, -0.1, 0.3])
    eps = 1e-6

    def _tangent(self, make):
        return (apply(make(self.eps), self.q, 1.0) - apply(make(-self.eps), self.q, 1.0)) / (2 * self.eps)

    def test_translation(self):
        dh = np.array([0.1, 0.2, 0.3, 0.4])
        np.testing.assert_allclose(infinitesimal_variation(self.q, dh=dh), self._tangent(lambda t: Translation(t * dh)), rtol=1e-8)

    def test_dilatation(self):
        np.testing.assert_allclose(infinitesimal_variation(self.q, dlam=1.0), self._tangent(Dilatation), rtol=1e-8)

    def test_lorentz(self):
        w = np.zeros((4, 4))
        w[0, 1], w[1, 0] = 0.7, -0.7
        w[2, 3], w[3, 2] = 0.2, -0.2
        tangent = self._tangent(lambda t: Lorentz(expm(t * w @ METRIC4)))
        np.testing.assert_allclose(infinitesimal_variation(self.q, domega=w), tangent, rtol=1e-7, atol=1e-10)

    def test_special_conformal(self):
        db = np.array([0.3, -0.2, 0.1, 0.4])
        tangent = self._tangent(lambda t: SpecialConformal(-t * db))
        np.testing.assert_allclose(infinitesimal_variation(self.q, db=db), tangent, rtol=1e-7)

    def test_rejects_symmetric_omega(self):
        with pytest.raises(ValueError):
            infinitesimal_variation(self.q, domega=np.eye(4))


class TestInvariantSplit:
    def test_even_function(self):
        # q^2 + M^4/q^2 is inversion invariant
        f = lambda q: minkowski_sq(q) + 1.0 / minkowski_sq(q)
        even, odd = invariant_split(f, np.array([2.0, 0.5, 0.0, 0.0]), 1.0)
        assert odd == pytest.approx(0.0, abs=1e-12)
        assert even == pytest.approx(f(np.array([2.0, 0.5, 0.0, 0.0])))


class TestParsing:
    @pytest.mark.parametrize("text, kind", [("inv", Inversion), ("dil:0.5", Dilatation),
                                            ("trans:0,1,0,0", Translation), ("sct:0,0.1,0,0", SpecialConformal),
                                            ("boost:0.3", Lorentz), ("rot:0.2,1", Lorentz)])
    def test_known_specs(self, text, kind):
        assert isinstance(parse_element(text), kind)

    @pytest.mark.parametrize("text", ["", "dil", "trans:1,2", "foo:1", "inv:3"])
    def test_malformed(self, text):
        with pytest.raises(ValueError):
            parse_element(text)

    def test_word(self):
        assert len(parse_word(["inv", "dil:1"])) == 2

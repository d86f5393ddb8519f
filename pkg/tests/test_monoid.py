import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svb.fixtures import bundle_scalar_action, cone_bundle, step_rank_bundle
from svb.grassmann import gap_distance, span
from svb.monoid import (
    MonoidActionSample,
    audit_axioms,
    reconstruct_bundle,
    regularity_check,
    vertical_derivative,
)

R2_SAMPLES = np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 4.0], [-1.0, 0.5],
                       [0.0, 0.0]])
R1_SAMPLES = np.array([[1.0], [-0.5], [2.0], [0.0]])


def action(name, samples):
    return MonoidActionSample.builtin(name, samples.shape[1], samples)


class TestConstruction:
    def test_t_grid_needs_zero_and_one(self):
        with pytest.raises(ValueError, match="0 and 1"):
            MonoidActionSample.builtin("scalar", 1, R1_SAMPLES,
                                       t_grid=(0.5, 1.0))

    def test_unknown_builtin(self):
        with pytest.raises(ValueError, match="builtin"):
            MonoidActionSample.builtin("warp", 1, R1_SAMPLES)

    def test_polynomial_matches_builtin(self):
        # t * e on R^1 as a coefficient table.
        coeffs = [[{"powers": [1, 1], "coef": 1.0}]]
        poly = MonoidActionSample.polynomial(coeffs, 1, R1_SAMPLES)
        ref = action("scalar", R1_SAMPLES)
        for t in (-1.0, 0.0, 0.7, 2.0):
            for e in R1_SAMPLES:
                np.testing.assert_allclose(poly.evaluate(t, e),
                                           ref.evaluate(t, e))


class TestAuditAxioms:
    def test_scalar_multiplication_passes(self):
        assert audit_axioms(action("scalar", R2_SAMPLES), 1e-12).passed

    def test_square_scaling_passes(self):
        # (ts)^2 = t^2 s^2, so the axioms hold even though the action is
        # not scalar multiplication.
        assert audit_axioms(action("square_scale", R1_SAMPLES), 1e-12).passed

    def test_translation_fails_at_composition(self):
        report = audit_axioms(action("translate", R1_SAMPLES), 1e-9)
        assert not report.passed
        assert any(t == 1.0 and s == 1.0
                   for t, s, _, _ in report.composition_violations)
        # Oracle: (x + 1) + 1 differs from x + 1 by exactly 1.
        residuals = {r for t, s, _, r in report.composition_violations
                     if (t, s) == (1.0, 1.0)}
        assert residuals == {1.0}


class TestVerticalDerivative:
    def test_scalar_multiplication_is_identity(self):
        a = action("scalar", R2_SAMPLES)
        phi, err = vertical_derivative(a, np.array([3.0, 4.0]))
        np.testing.assert_allclose(phi, [3.0, 4.0], atol=1e-10)
        assert err <= 1e-10

    def test_square_scaling_has_zero_derivative(self):
        a = action("square_scale", R1_SAMPLES)
        phi, _ = vertical_derivative(a, np.array([5.0]))
        np.testing.assert_allclose(phi, [0.0], atol=1e-10)

    def test_identity_action(self):
        a = action("identity", R2_SAMPLES)
        phi, err = vertical_derivative(a, np.array([1.0, 2.0]))
        np.testing.assert_allclose(phi, np.zeros(2), atol=1e-12)
        assert err <= 1e-12

    def test_bad_step_rejected(self):
        with pytest.raises(ValueError):
            vertical_derivative(action("scalar", R1_SAMPLES), [1.0], step=0.0)


class TestRegularity:
    def test_scalar_multiplication_regular(self):
        assert regularity_check(action("scalar", R2_SAMPLES)).overall == \
            "REGULAR"

    def test_square_scaling_not_regular(self):
        report = regularity_check(action("square_scale", R1_SAMPLES),
                                  tol=1e-6)
        assert report.overall == "NOT_REGULAR"
        # Every nonzero sample violates: phi = 0 but h_0(x) = 0 != x.
        assert set(report.violating_indices) == {0, 1, 2}

    def test_scale_last_regular_with_axis_image(self):
        a = action("scale_last", R2_SAMPLES)
        report = regularity_check(a, tol=1e-8)
        assert report.overall == "REGULAR"
        images = np.array([a.evaluate(0.0, e) for e in a.sample_points])
        np.testing.assert_allclose(images[:, 1], 0.0, atol=1e-12)


class TestReconstructBundle:
    def test_scale_last_recovers_vertical_axis(self):
        # Samples must include points above each base point, otherwise the
        # recovered fiber over it is empty.
        samples = np.array([[1.0, 1.0], [1.0, 0.0], [0.0, 2.0], [3.0, 4.0],
                            [0.0, 0.0]])
        a = action("scale_last", samples)
        frag = reconstruct_bundle(a, [[1.0, 0.0], [0.0, 0.0], [3.0, 0.0]],
                                  cluster_radius=1e-9)
        assert frag.ranks == (1, 1, 1)
        for fiber in frag.fibers:
            assert gap_distance(fiber, span([(0.0, 1.0)], 2)) <= 1e-9

    def test_scalar_over_origin_recovers_everything(self):
        a = action("scalar", R2_SAMPLES)
        frag = reconstruct_bundle(a, [[0.0, 0.0]], cluster_radius=1e-9)
        assert frag.ranks == (2,)

    def test_identity_action_gives_rank_zero(self):
        a = action("identity", R2_SAMPLES)
        frag = reconstruct_bundle(a, R2_SAMPLES, cluster_radius=1e-9)
        assert frag.ranks == tuple([0] * len(R2_SAMPLES))

    def test_not_regular_rejected(self):
        with pytest.raises(ValueError, match="not regular"):
            reconstruct_bundle(action("square_scale", R1_SAMPLES),
                               [[0.0]], tol=1e-6)


@pytest.mark.parametrize("make", [lambda: cone_bundle("pass", depth=12),
                                  step_rank_bundle],
                         ids=["cone", "step_rank"])
class TestBundleScalarAction:
    def test_regular_and_recovered(self, make):
        bundle = make()
        act, base_points, expected = bundle_scalar_action(bundle)
        assert audit_axioms(act, 1e-10).passed
        assert regularity_check(act, tol=1e-8).overall == "REGULAR"
        frag = reconstruct_bundle(act, base_points)
        for fiber, want in zip(frag.fibers, expected):
            assert gap_distance(fiber, want) <= 1e-6


def _random_polynomial_action(rng, ambient, top_degree=5):
    """Polynomial in t with vector coefficients that are monomials in e;
    the exact t-derivative at 0 is the degree-1 coefficient.  Degree 5
    guarantees genuine truncation error, so estimate and error are not
    both rounding noise."""
    coeffs = []
    derivative_terms = []
    for c in range(ambient):
        terms = []
        for t_deg in range(top_degree + 1):
            e_powers = [int(rng.integers(0, 2)) for _ in range(ambient)]
            coef = float(rng.normal())
            terms.append({"powers": [t_deg] + e_powers, "coef": coef})
            if t_deg == 1:
                derivative_terms.append((c, e_powers, coef))
        coeffs.append(terms)

    def exact_derivative(e):
        out = np.zeros(ambient)
        for c, e_powers, coef in derivative_terms:
            value = coef
            for x, p in zip(e, e_powers):
                value *= x ** p
            out[c] += value
        return out

    return coeffs, exact_derivative


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), ambient=st.integers(1, 3))
def test_error_estimate_bounds_true_error(seed, ambient):
    rng = np.random.default_rng(seed)
    coeffs, exact = _random_polynomial_action(rng, ambient)
    samples = rng.uniform(-1.0, 1.0, size=(6, ambient))
    a = MonoidActionSample.polynomial(coeffs, ambient, samples)
    hits = 0
    for e in samples:
        phi, estimate = vertical_derivative(a, e)
        actual = float(np.linalg.norm(phi - exact(e)))
        if estimate + 1e-13 >= actual:
            hits += 1
    assert hits / len(samples) >= 0.95

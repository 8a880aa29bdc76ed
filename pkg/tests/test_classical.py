import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import quad, quad_window, random_transition_model
from weakpointer import ACCURATE, DECOUPLED, ClassicalPath, NormalizationError, PointerConfig
from weakpointer.classical import (
    TransitionModel,
    accurate_outcome_probabilities,
    classical_gaussian,
    control_pointer_density,
    joint_density,
    marginal_density,
    mean_reading,
    path_probability,
    postselection_probability,
    recover_path_probs,
    two_pointer_limit_shifts,
    two_way_density,
    two_way_probabilities,
)


def G(f, w):
    # written out independently of the package
    return math.exp(-f * f / (w * w)) / math.sqrt(math.pi * w * w)


def rho_a3(model, f, widths):
    """Direct transcription of the five-pointer joint density."""
    w = model.input_weights
    total = 0.0
    for i, j, k, l in itertools.product((0, 1), repeat=4):
        p = model.leg3[k, l] * (1.0 if j == k else 0.0) * model.leg1[i, j]
        total += (
            w[i] * p
            * G(f[0] - i, widths[0]) * G(f[1] - j, widths[1]) * G(f[2] - k, widths[2])
            * G(f[3] - l, widths[3]) * G(f[4] + j - 1, widths[4])
        )
    return total


class TestModel:
    def test_rejects_non_stochastic(self):
        with pytest.raises(ValueError):
            TransitionModel([[0.5, 0.6], [0.5, 0.5]], [[1, 0], [0, 1]])
        with pytest.raises(ValueError):
            TransitionModel([[1.2, -0.2], [0.5, 0.5]], [[1, 0], [0, 1]])
        with pytest.raises(ValueError):
            TransitionModel(np.eye(2), np.eye(2), (0.7, 0.7))

    def test_two_way_constructor(self):
        m = TransitionModel.two_way(0.2, 0.4)
        np.testing.assert_allclose(two_way_probabilities(m), (0.2, 0.4), atol=1e-15)


class TestPathProbability:
    def test_disconnected_path_is_zero(self, rng):
        m = random_transition_model(rng)
        assert path_probability(m, ClassicalPath(0, 0, 1, 1)) == 0.0
        assert path_probability(m, ClassicalPath(1, 1, 0, 0)) == 0.0

    def test_half_half_legs(self):
        h = [[0.5, 0.5], [0.5, 0.5]]
        assert path_probability(TransitionModel(h, h), ClassicalPath(0, 1, 1, 1)) == 0.25

    def test_one_to_four_route_ratio_by_enumeration(self):
        m = TransitionModel.two_way(1 / 5 * 0.5, 4 / 5 * 0.5)
        probs = {p: path_probability(m, ClassicalPath(*p)) for p in itertools.product((0, 1), repeat=4)}
        P0, P1 = probs[(0, 0, 0, 1)], probs[(0, 1, 1, 1)]
        assert P0 / (P0 + P1) == pytest.approx(1 / 5, abs=1e-15)
        assert P1 / (P0 + P1) == pytest.approx(4 / 5, abs=1e-15)
        # exactly eight connected routes carry probability
        assert sum(1 for (i, j, k, l) in probs if j != k and probs[(i, j, k, l)] != 0) == 0


class TestJointDensity:
    def test_matches_direct_transcription(self, rng):
        m = random_transition_model(rng)
        widths = (0.7, 1.3, 0.9, 2.0, 0.5)
        dens = joint_density(m, [PointerConfig(s, w) for s, w in zip(range(1, 6), widths)])
        assert len(dens.terms) == 8
        for _ in range(20):
            f = rng.normal(0.5, 1.0, size=5)
            assert dens.pdf(f) == pytest.approx(rho_a3(m, f, widths), rel=1e-12, abs=1e-300)

    def test_two_way_weights(self):
        m = TransitionModel.two_way(0.1, 0.3)
        dens = two_way_density(m, {2: 1.0, 3: 1.0, 5: 1.0})
        assert len(dens.terms) == 2
        np.testing.assert_allclose(sorted(t.weight for t in dens.terms), [0.25, 0.75], atol=1e-15)

    def test_preselection_drops_input_weights(self, rng):
        m = random_transition_model(rng)
        m2 = TransitionModel(m.leg1, m.leg3, (0.99, 0.01))
        ptrs = {2: 1.0, 4: 0.5}
        a = joint_density(m, ptrs, preselect=0)
        b = joint_density(m2, ptrs, preselect=0)
        pts = rng.normal(size=(10, 2))
        np.testing.assert_allclose(a.pdf(pts), b.pdf(pts), rtol=1e-14)

    def test_unreachable_postselection(self):
        m = TransitionModel([[1, 0], [0, 1]], [[1, 0], [1, 0]])
        with pytest.raises(NormalizationError):
            two_way_density(m, {2: 1.0})

    def test_selection_needs_accurate_pointer(self, rng):
        with pytest.raises(ValueError):
            joint_density(random_transition_model(rng), {1: 0.3}, preselect=0)

    def test_duplicate_slot_rejected(self, rng):
        with pytest.raises(ValueError):
            joint_density(random_transition_model(rng), [PointerConfig(2, 1.0), PointerConfig(2, 2.0)])

    def test_decoupled_pointer_absent(self, rng):
        dens = two_way_density(random_transition_model(rng), {2: 1.0, 3: DECOUPLED})
        assert dens.slots == (2,)

    @pytest.mark.parametrize("width", [0.3, 1.0, 4.0])
    def test_normalized_by_quadrature(self, rng, width):
        dens = marginal_density(two_way_density(random_transition_model(rng), {2: width, 5: 2.0}), 2)
        val = quad_window(lambda f: float(dens.pdf(f)), 0.5, width)
        assert val == pytest.approx(1.0, abs=1e-9)


class TestMarginal:
    def test_two_way_marginal_form(self):
        P0, P1 = 0.15, 0.45
        m = TransitionModel.two_way(P0, P1)
        w = 1.7
        dens = marginal_density(two_way_density(m, {2: w, 3: 0.4, 5: 2.5}), 2)
        for f in np.linspace(-3, 4, 15):
            expect = (P0 * G(f, w) + P1 * G(f - 1, w)) / (P0 + P1)
            assert float(dens.pdf(f)) == pytest.approx(expect, rel=1e-13)

    def test_accurate_limit_point_masses(self):
        m = TransitionModel.two_way(0.2, 0.6)
        dens = marginal_density(two_way_density(m, {2: ACCURATE, 5: 3.0}), 2)
        assert dens.slots == ()
        probs = dens.discrete_probabilities()
        assert probs[(0,)] == pytest.approx(0.25, abs=1e-15)
        assert probs[(1,)] == pytest.approx(0.75, abs=1e-15)

    def test_equal_paths_at_half(self):
        w = 3.0
        dens = marginal_density(two_way_density(TransitionModel.two_way(0.3, 0.3), {2: w}), 2)
        assert float(dens.pdf(0.5)) == pytest.approx(0.5 * (G(0.5, w) + G(-0.5, w)), rel=1e-14)

    def test_single_term_is_unchanged_gaussian(self):
        m = TransitionModel([[0, 1], [0.5, 0.5]], [[0.5, 0.5], [0, 1]])
        dens = marginal_density(two_way_density(m, {2: 0.8, 5: 1.1}), 2)
        x = np.linspace(-2, 3, 11)
        np.testing.assert_allclose(dens.pdf(x), classical_gaussian(x - 1, 0.8), rtol=1e-14)

    def test_unknown_slot(self, rng):
        dens = two_way_density(random_transition_model(rng), {2: 1.0})
        with pytest.raises(KeyError):
            marginal_density(dens, 3)

    def test_narrow_pointer_mass_near_0_and_1(self):
        P0, P1 = 0.12, 0.36
        dens = marginal_density(two_way_density(TransitionModel.two_way(P0, P1), {2: 0.01}), 2)
        m0 = quad(lambda f: float(dens.pdf(f)), -0.1, 0.1, points=[0.0])
        m1 = quad(lambda f: float(dens.pdf(f)), 0.9, 1.1, points=[1.0])
        assert m0 + m1 >= 1 - 1e-6
        assert m0 / m1 == pytest.approx(P0 / P1, rel=1e-6)

    def test_broad_pointer_converges_to_shifted_gaussian(self):
        P0, P1 = 0.2, 0.5
        z = P1 / (P0 + P1)
        errs = []
        for w in (5.0, 10.0, 20.0):
            dens = marginal_density(two_way_density(TransitionModel.two_way(P0, P1), {2: w}), 2)
            x = np.linspace(z - 4 * w, z + 4 * w, 2001)
            errs.append(np.max(np.abs(dens.pdf(x) - classical_gaussian(x - z, w))))
        assert errs[0] > errs[1] > errs[2]
        # peak density ~1/w and relative error ~1/w^2 give an absolute error ~w^-3
        slope = np.polyfit(np.log([5, 10, 20]), np.log(errs), 1)[0]
        assert slope == pytest.approx(-3, abs=0.2)


class TestMeanReading:
    def test_symmetric(self):
        dens = two_way_density(TransitionModel.two_way(0.4, 0.4), {2: 2.0})
        assert mean_reading(dens, 2) == pytest.approx(0.5, abs=1e-15)

    def test_one_to_four_route_ratio(self):
        dens = two_way_density(TransitionModel.two_way(0.1, 0.4), {2: 10.0})
        assert mean_reading(dens, 2) == pytest.approx(0.8, abs=1e-15)

    @pytest.mark.parametrize("width", [0.2, 1.0, 10.0])
    def test_matches_quadrature(self, rng, width):
        dens = two_way_density(random_transition_model(rng), {2: width, 3: 1.0})
        marg = marginal_density(dens, 2)
        val = quad_window(lambda f: f * float(marg.pdf(f)), 0.5, width)
        assert mean_reading(dens, 2) == pytest.approx(val, abs=1e-9)

    def test_independent_of_width(self, rng):
        m = random_transition_model(rng)
        means = [mean_reading(two_way_density(m, {2: w}), 2) for w in (0.01, 0.3, 1.0, 7.0, 100.0, ACCURATE)]
        np.testing.assert_allclose(means, means[0], atol=1e-12)

    def test_slot5_mean(self, rng):
        m = random_transition_model(rng)
        dens = two_way_density(m, {2: 3.0, 5: 3.0})
        z2, z5 = two_pointer_limit_shifts(*two_way_probabilities(m))
        assert mean_reading(dens, 2) == pytest.approx(z2, abs=1e-14)
        assert mean_reading(dens, 5) == pytest.approx(z5, abs=1e-14)


class TestLimitShifts:
    def test_examples(self):
        assert two_pointer_limit_shifts(0.3, 0.3) == (0.5, 0.5)
        assert two_pointer_limit_shifts(0.4, 0.0) == (0.0, 1.0)
        with pytest.raises(ValueError):
            two_pointer_limit_shifts(0.0, 0.0)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_sum_rule(self, P0, P1):
        if P0 + P1 == 0:
            return
        z2, z5 = two_pointer_limit_shifts(P0, P1)
        assert z2 + z5 == pytest.approx(1.0, abs=1e-12)


class TestControlPointer:
    def test_fig3b_terms(self):
        dens = control_pointer_density(TransitionModel.two_way(0.5, 0.5), 10.0, 10.0)
        assert dens.discrete_slots == (3,)
        assert dens.discrete_probabilities() == {(0,): 0.5, (1,): 0.5}

    def test_conditional_on_f3_is_single_product(self):
        dens = control_pointer_density(TransitionModel.two_way(0.2, 0.3), 2.0, 3.0)
        cond = dens.conditional((1,))
        assert len(cond.terms) == 1
        assert cond.terms[0].shifts == (1.0, 0.0)

    def test_marginal_over_f3_recovers_two_pointer_density(self, rng):
        m = random_transition_model(rng)
        a = two_way_density(m, {2: 10.0, 5: 10.0})
        b = marginal_density(control_pointer_density(m, 10.0, 10.0), (2, 5))
        pts = rng.uniform(-30, 30, size=(500, 2))
        assert np.max(np.abs(a.pdf(pts) - b.pdf(pts))) < 1e-12
        # and without explicit marginalization
        assert np.max(np.abs(a.pdf(pts) - control_pointer_density(m, 10.0, 10.0).pdf(pts))) < 1e-12


class TestRecovery:
    def test_examples(self):
        r = recover_path_probs(0.8, 0.5)
        assert (r.P0, r.P1, r.valid) == (pytest.approx(0.1), pytest.approx(0.4), True)
        r = recover_path_probs(-1.0, 0.25)
        assert r.P1 == -0.25 and not r.valid
        assert recover_path_probs(0.5, 1.0) == (0.5, 0.5, True)

    def test_roundtrip(self, rng):
        for _ in range(20):
            m = random_transition_model(rng)
            P0, P1 = two_way_probabilities(m)
            z = mean_reading(two_way_density(m, {2: rng.uniform(0.1, 20)}), 2)
            r = recover_path_probs(z, postselection_probability(m))
            assert r.valid
            assert r.P0 == pytest.approx(P0, abs=1e-9)
            assert r.P1 == pytest.approx(P1, abs=1e-9)


class TestAccuratePointers:
    def test_outcomes_enumerate_path_products(self, rng):
        m = random_transition_model(rng)
        probs = accurate_outcome_probabilities(m)
        assert len(probs) == 8
        for (i, j, l) in itertools.product((0, 1), repeat=3):
            key = (i, j, j, l, 1 - j)
            expect = m.input_weights[i] * m.leg1[i, j] * m.leg3[j, l]
            assert probs[key] == pytest.approx(expect, abs=1e-15)
        assert sum(probs.values()) == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(0.01, 0.99),
    st.floats(0.05, 50.0),
)
def test_mean_is_relative_probability(a, b, c, d, width):
    m = TransitionModel([[1 - a, a], [1 - b, b]], [[1 - c, c], [1 - d, d]])
    P0, P1 = two_way_probabilities(m)
    assert mean_reading(two_way_density(m, {2: width}), 2) == pytest.approx(P1 / (P0 + P1), abs=1e-12)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

import instances
from qtrans import (
    ClassicalEffect,
    ClassicalOperation,
    ClassicalSubstate,
    DimensionMismatchError,
    Instrument,
    NormalizationOfZeroError,
    Observable,
    TransitionUndefinedError,
    ValidationError,
    apply_operation,
    compose_operations,
    effect_oplus,
    holevo_instrument,
    holevo_mixed,
    holevo_pure,
    instrument_distribution,
    instrument_joint_distribution,
    instrument_state_transition,
    is_repeatable,
    joint_effect_distribution,
    measured_effect,
    observable_distribution,
    state_eval,
    substate_normalize,
    transition_prob_effect,
    transition_prob_state,
)


def unit_vectors(dim, lo=0.0, hi=1.0):
    return hnp.arrays(
        np.float64, dim, elements=st.floats(lo, hi, allow_nan=False, width=64)
    )


# ---------------------------------------------------------------------------
# effects and the partial sum

class TestEffectOplus:
    def test_complements_sum_to_unit(self):
        a = ClassicalEffect([1, 0])
        b = ClassicalEffect([0, 1])
        out = effect_oplus(a, b)
        assert out is not None
        np.testing.assert_allclose(out.values, [1, 1])

    def test_partiality(self):
        a = ClassicalEffect([0.7, 0.2])
        b = ClassicalEffect([0.5, 0.1])
        assert effect_oplus(a, b) is None

    def test_zero_neutral(self):
        a = ClassicalEffect([0.3, 0.8, 0.1])
        out = effect_oplus(a, ClassicalEffect.zero(3))
        np.testing.assert_array_equal(out.values, a.values)

    def test_dimension_mismatch_is_an_error_not_undefined(self):
        with pytest.raises(DimensionMismatchError):
            effect_oplus(ClassicalEffect([1, 0]), ClassicalEffect([1, 0, 0]))

    @given(unit_vectors(3), unit_vectors(3))
    def test_commutative_where_defined(self, a_vals, b_vals):
        a, b = ClassicalEffect(a_vals), ClassicalEffect(b_vals)
        ab, ba = effect_oplus(a, b), effect_oplus(b, a)
        assert (ab is None) == (ba is None)
        if ab is not None:
            np.testing.assert_array_equal(ab.values, ba.values)

    @given(unit_vectors(3, hi=0.33), unit_vectors(3, hi=0.33), unit_vectors(3, hi=0.33))
    def test_associative_where_defined(self, a_vals, b_vals, c_vals):
        a, b, c = (ClassicalEffect(v) for v in (a_vals, b_vals, c_vals))
        left = effect_oplus(effect_oplus(a, b), c)
        right = effect_oplus(a, effect_oplus(b, c))
        np.testing.assert_allclose(left.values, right.values, atol=1e-12)

    @given(unit_vectors(4))
    def test_complement_exists(self, a_vals):
        a = ClassicalEffect(a_vals)
        out = effect_oplus(a, a.complement())
        np.testing.assert_allclose(out.values, 1.0, atol=1e-12)

    def test_complement_unique(self):
        rng = np.random.default_rng(7)
        a = instances.effect(rng, 4)
        wrong = np.clip(a.complement().values.copy(), 0, 1)
        wrong[0] = min(1.0, wrong[0] + 1e-6)
        out = effect_oplus(a, ClassicalEffect(wrong))
        assert out is None or np.max(np.abs(out.values - 1.0)) > 1e-9

    def test_oplus_unit_forces_zero(self):
        unit = ClassicalEffect.unit(2)
        assert effect_oplus(ClassicalEffect([0.1, 0]), unit) is None
        out = effect_oplus(ClassicalEffect.zero(2), unit)
        np.testing.assert_array_equal(out.values, [1, 1])

    def test_construction_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            ClassicalEffect([0.5, 1.2])
        with pytest.raises(ValidationError):
            ClassicalEffect([-0.1, 0.5])


# ---------------------------------------------------------------------------
# substates and evaluation

class TestStateEval:
    def test_state_at_unit(self):
        s = ClassicalSubstate([0.5, 0.5])
        assert state_eval(s, ClassicalEffect.unit(2)) == 1.0

    def test_dot_product(self):
        s = ClassicalSubstate([0.5, 0.5])
        assert state_eval(s, ClassicalEffect([1, 0])) == pytest.approx(0.5)

    def test_substate_total(self):
        s = ClassicalSubstate([0.3, 0.2])
        assert state_eval(s, ClassicalEffect.unit(2)) == pytest.approx(0.5)
        assert not s.is_state

    @given(unit_vectors(3, hi=0.5), unit_vectors(3, hi=0.5))
    def test_additive_on_defined_sums(self, a_vals, b_vals):
        rng = np.random.default_rng(int(a_vals.sum() * 1e6) + 1)
        s = instances.substate(rng, 3)
        a, b = ClassicalEffect(a_vals), ClassicalEffect(b_vals)
        both = effect_oplus(a, b)
        assert state_eval(s, both) == pytest.approx(
            state_eval(s, a) + state_eval(s, b), abs=1e-12
        )

    def test_substate_validation(self):
        with pytest.raises(ValidationError):
            ClassicalSubstate([0.6, 0.6])
        with pytest.raises(ValidationError):
            ClassicalSubstate([-0.2, 0.3])


class TestNormalize:
    def test_divides_by_total(self):
        out = substate_normalize(ClassicalSubstate([0.3, 0.2]))
        np.testing.assert_allclose(out.weights, [0.6, 0.4])

    def test_state_unchanged(self):
        s = ClassicalSubstate([0.25, 0.75])
        np.testing.assert_allclose(substate_normalize(s).weights, s.weights)

    def test_zero_substate_rejected(self):
        with pytest.raises(NormalizationOfZeroError):
            substate_normalize(ClassicalSubstate([0.0, 0.0]))


# ---------------------------------------------------------------------------
# operations

class TestApplyCompose:
    def test_identity(self):
        s = ClassicalSubstate([0.2, 0.3, 0.5])
        out = apply_operation(ClassicalOperation.identity(3), s)
        np.testing.assert_array_equal(out.weights, s.weights)

    def test_holevo_rank_one_action(self):
        # H maps s to s(a)*alpha: here s(a)=0.5, alpha=(0,1)
        h = holevo_pure(ClassicalEffect([1, 0]), ClassicalSubstate([0, 1]))
        out = apply_operation(h, ClassicalSubstate([0.5, 0.5]))
        np.testing.assert_allclose(out.weights, [0.0, 0.5])

    def test_zero_operation(self):
        out = apply_operation(ClassicalOperation.zero(2), ClassicalSubstate([0.5, 0.5]))
        np.testing.assert_array_equal(out.weights, [0, 0])

    def test_compose_with_identity(self):
        rng = np.random.default_rng(0)
        op = instances.operation(rng, 3)
        out = compose_operations(op, ClassicalOperation.identity(3))
        np.testing.assert_allclose(out.matrix, op.matrix)

    def test_double_holevo_shrinks(self):
        # applying H twice gives s(a)*alpha(a)*alpha, not s(a)*alpha
        a = ClassicalEffect([1, 0.5])
        alpha = ClassicalSubstate([0.25, 0.75])
        s = ClassicalSubstate([0.5, 0.5])
        h = holevo_pure(a, alpha)
        out = apply_operation(compose_operations(h, h), s)
        # s(a)=0.75, alpha(a)=0.625
        np.testing.assert_allclose(out.weights, 0.75 * 0.625 * alpha.weights)
        single = apply_operation(h, s)
        assert np.max(np.abs(out.weights - single.weights)) > 0.1

    def test_channels_closed_under_composition(self):
        rng = np.random.default_rng(1)
        ch = compose_operations(instances.channel(rng, 4), instances.channel(rng, 4))
        assert ch.is_channel

    def test_apply_matches_composition(self):
        rng = np.random.default_rng(2)
        j1, j2 = instances.operation(rng, 4), instances.operation(rng, 4)
        s = instances.substate(rng, 4)
        via_compose = apply_operation(compose_operations(j1, j2), s)
        via_sequential = apply_operation(j1, apply_operation(j2, s))
        np.testing.assert_allclose(via_compose.weights, via_sequential.weights, atol=1e-14)

    def test_operation_validation(self):
        with pytest.raises(ValidationError):
            ClassicalOperation([[0.8, 0.5], [0.5, 0.6]])  # column sum 1.3
        with pytest.raises(ValidationError):
            ClassicalOperation([[-0.1, 0], [0, 0.5]])


class TestMeasuredEffect:
    def test_identity_channel_measures_unit(self):
        np.testing.assert_array_equal(
            measured_effect(ClassicalOperation.identity(3)).values, np.ones(3)
        )

    def test_holevo_measures_its_effect(self):
        a = ClassicalEffect([0.3, 0.9])
        h = holevo_pure(a, ClassicalSubstate([0.5, 0.5]))
        np.testing.assert_allclose(measured_effect(h).values, a.values)

    def test_zero_measures_zero(self):
        np.testing.assert_array_equal(measured_effect(ClassicalOperation.zero(2)).values, [0, 0])

    @pytest.mark.parametrize("seed", range(5))
    def test_soundness_on_basis_states(self, seed):
        rng = np.random.default_rng(seed)
        op = instances.operation(rng, 4)
        eff = measured_effect(op)
        for i in range(4):
            basis = ClassicalSubstate(np.eye(4)[i])
            assert state_eval(basis, eff) == pytest.approx(
                apply_operation(op, basis).total(), abs=1e-12
            )


# ---------------------------------------------------------------------------
# transition probabilities

class TestTransitionEffect:
    def test_second_effect_unit_recovers_state_eval(self):
        rng = np.random.default_rng(3)
        s = instances.state(rng, 3)
        a = instances.effect(rng, 3)
        ch = instances.channel(rng, 3)
        val = transition_prob_effect(s, ch, a, ClassicalEffect.unit(3))
        assert val == pytest.approx(state_eval(s, a), abs=1e-12)

    def test_identity_channel_frozen_value(self):
        s = ClassicalSubstate([0.5, 0.5])
        val = transition_prob_effect(
            s, ClassicalOperation.identity(2), ClassicalEffect([1, 0]), ClassicalEffect([0, 1])
        )
        assert val == pytest.approx(0.25)

    def test_holevo_independent_of_measured_effect(self):
        s = ClassicalSubstate([0.5, 0.5])
        alpha = ClassicalSubstate([0.25, 0.75])
        b, c = ClassicalEffect([0.2, 0.6]), ClassicalEffect([1, 0])
        for a_vals in ([1, 0.5], [0.4, 0.8], [1, 1]):
            h = holevo_pure(ClassicalEffect(a_vals), alpha)
            # s(b)*alpha(c) = 0.4 * 0.25
            assert transition_prob_effect(s, h, b, c) == pytest.approx(0.1, abs=1e-12)

    def test_annihilated_state_is_undefined(self):
        s = ClassicalSubstate([1, 0])
        h = holevo_pure(ClassicalEffect([0, 1]), ClassicalSubstate([0.5, 0.5]))
        with pytest.raises(TransitionUndefinedError):
            transition_prob_effect(s, h, ClassicalEffect.unit(2), ClassicalEffect.unit(2))

    def test_unit_unit_is_one_for_states(self):
        rng = np.random.default_rng(4)
        s = instances.state(rng, 3)
        op = instances.operation(rng, 3)
        unit = ClassicalEffect.unit(3)
        assert transition_prob_effect(s, op, unit, unit) == pytest.approx(1.0, abs=1e-12)


class TestTransitionState:
    def test_channel_gives_one(self):
        rng = np.random.default_rng(5)
        ch = instances.channel(rng, 3)
        s1, s2 = instances.state(rng, 3), instances.state(rng, 3)
        assert transition_prob_state(ch, s1, s2) == pytest.approx(1.0, abs=1e-12)

    def test_holevo_closed_form_frozen(self):
        a = ClassicalEffect([1, 0.5])
        alpha = ClassicalSubstate([0.25, 0.75])
        s1, s2 = ClassicalSubstate([0.5, 0.5]), ClassicalSubstate([0.25, 0.75])
        # s1(a)=0.75, s2(a)=0.625, alpha(a)=0.625
        val = transition_prob_state(holevo_pure(a, alpha), s1, s2)
        assert val == pytest.approx(0.75 * 0.625 * 0.625, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_repeatable_implies_symmetric(self, seed):
        rng = np.random.default_rng(seed)
        diag = ClassicalOperation(np.diag(rng.integers(0, 2, size=4).astype(float)))
        assert is_repeatable(diag)
        s1, s2 = instances.state(rng, 4), instances.state(rng, 4)
        assert transition_prob_state(diag, s1, s2) == pytest.approx(
            transition_prob_state(diag, s2, s1), abs=1e-10
        )

    def test_requires_states(self):
        rng = np.random.default_rng(6)
        op = instances.operation(rng, 3)
        sub = ClassicalSubstate([0.1, 0.1, 0.1])
        with pytest.raises(ValidationError):
            transition_prob_state(op, sub, instances.state(rng, 3))


class TestLemma21:
    @pytest.mark.parametrize("seed", range(20))
    def test_state_transition_factorizes(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 5))
        op = instances.operation(rng, dim)
        s1, s2 = instances.state(rng, dim), instances.state(rng, dim)
        if apply_operation(op, s2).total() < 1e-6:
            pytest.skip("operation annihilates s2")
        unit = ClassicalEffect.unit(dim)
        j_hat = measured_effect(op)
        lhs = transition_prob_state(op, s1, s2)
        rhs = transition_prob_effect(s1, op, j_hat, unit) * transition_prob_effect(
            apply_operation(op, s2), op, j_hat, unit
        )
        assert lhs == pytest.approx(rhs, abs=1e-10)


# ---------------------------------------------------------------------------
# joint distributions

class TestJointEffectDistribution:
    def test_identity_point_mass_table(self):
        obs = Observable({"x0": ClassicalEffect([1, 0]), "x1": ClassicalEffect([0, 1])})
        table = joint_effect_distribution(
            ClassicalSubstate([1, 0]), ClassicalOperation.identity(2), obs, obs
        )
        np.testing.assert_allclose(table.values, [[1, 0], [0, 0]], atol=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_lemma22_marginals(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 5))
        s = instances.state(rng, dim)
        op = instances.operation(rng, dim)
        obs_a = instances.observable(rng, dim, int(rng.integers(2, 5)))
        obs_b = instances.observable(rng, dim, int(rng.integers(2, 5)))
        table = joint_effect_distribution(s, op, obs_a, obs_b)
        assert table.total() == pytest.approx(1.0, abs=1e-10)
        rows = table.marginal(0)
        np.testing.assert_allclose(
            rows.values, observable_distribution(s, obs_a).values, atol=1e-10
        )
        updated = substate_normalize(apply_operation(op, s))
        cols = table.marginal(1)
        np.testing.assert_allclose(
            cols.values, observable_distribution(updated, obs_b).values, atol=1e-10
        )


class TestInstrumentJoint:
    @pytest.mark.parametrize("seed", range(10))
    def test_three_way_measure_and_marginals(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 5))
        s = instances.state(rng, dim)
        inst = instances.instrument(rng, dim, int(rng.integers(2, 4)))
        obs_a = instances.observable(rng, dim, 2)
        obs_b = instances.observable(rng, dim, 3)
        q = instrument_joint_distribution(s, inst, obs_a, obs_b)
        assert q.total() == pytest.approx(1.0, abs=1e-10)
        np.testing.assert_allclose(
            q.marginal(0).values, instrument_distribution(s, inst).values, atol=1e-10
        )
        np.testing.assert_allclose(
            q.marginal(1).values, observable_distribution(s, obs_a).values, atol=1e-10
        )
        pushed = apply_operation(inst.total_operation(), s)
        np.testing.assert_allclose(
            q.marginal(2).values, observable_distribution(pushed, obs_b).values, atol=1e-10
        )


class TestInstrumentStateTransition:
    @pytest.mark.parametrize("seed", range(10))
    def test_totals_one(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 5))
        inst = instances.instrument(rng, dim, int(rng.integers(2, 4)))
        table = instrument_state_transition(
            inst, instances.state(rng, dim), instances.state(rng, dim)
        )
        assert table.total() == pytest.approx(1.0, abs=1e-10)

    def test_holevo_diagonal_outcome_closed_form(self):
        # transition probability of the x-th instrument operation itself
        rng = np.random.default_rng(11)
        obs = instances.observable(rng, 3, 3)
        alphas = {x: instances.state(rng, 3) for x in obs.outcomes}
        inst = holevo_instrument(obs, alphas)
        s1, s2 = instances.state(rng, 3), instances.state(rng, 3)
        for x in obs.outcomes:
            expected = (
                state_eval(s1, obs[x])
                * state_eval(s2, obs[x])
                * state_eval(alphas[x], obs[x])
            )
            assert transition_prob_state(inst[x], s1, s2) == pytest.approx(
                expected, abs=1e-12
            )

    def test_single_outcome_instrument(self):
        rng = np.random.default_rng(12)
        ch = instances.channel(rng, 2)
        inst = Instrument({"only": ch})
        table = instrument_state_transition(
            inst, instances.state(rng, 2), instances.state(rng, 2)
        )
        np.testing.assert_allclose(table.values, [[1.0]], atol=1e-12)


# ---------------------------------------------------------------------------
# Holevo constructions

class TestHolevo:
    def test_unit_effect_gives_constant_channel(self):
        alpha = ClassicalSubstate([0.25, 0.75])
        h = holevo_pure(ClassicalEffect.unit(2), alpha)
        assert h.is_channel
        rng = np.random.default_rng(13)
        out = apply_operation(h, instances.state(rng, 2))
        np.testing.assert_allclose(out.weights, alpha.weights)

    def test_zero_effect_gives_zero_operation(self):
        h = holevo_pure(ClassicalEffect.zero(2), ClassicalSubstate([0.5, 0.5]))
        np.testing.assert_array_equal(h.matrix, np.zeros((2, 2)))

    def test_requires_state_target(self):
        with pytest.raises(ValidationError):
            holevo_pure(ClassicalEffect([1, 0]), ClassicalSubstate([0.3, 0.2]))

    def test_mixed_is_channel(self):
        rng = np.random.default_rng(14)
        obs = instances.observable(rng, 3, 3)
        h = holevo_mixed(obs, {x: instances.state(rng, 3) for x in obs.outcomes})
        assert h.is_channel

    def test_mixed_single_outcome_constant(self):
        obs = Observable({"only": ClassicalEffect.unit(2)})
        alpha = ClassicalSubstate([0.9, 0.1])
        h = holevo_mixed(obs, {"only": alpha})
        out = apply_operation(h, ClassicalSubstate([0.4, 0.6]))
        np.testing.assert_allclose(out.weights, alpha.weights)

    def test_mixed_point_mass_sum(self):
        obs = Observable({"x0": ClassicalEffect([1, 0]), "x1": ClassicalEffect([0, 1])})
        alphas = {
            "x0": ClassicalSubstate([0.25, 0.75]),
            "x1": ClassicalSubstate([0.6, 0.4]),
        }
        h = holevo_mixed(obs, alphas)
        s = ClassicalSubstate([0.3, 0.7])
        expected = 0.3 * alphas["x0"].weights + 0.7 * alphas["x1"].weights
        np.testing.assert_allclose(apply_operation(h, s).weights, expected, atol=1e-15)

    def test_instrument_measures_observable(self):
        rng = np.random.default_rng(15)
        obs = instances.observable(rng, 3, 3)
        inst = holevo_instrument(obs, {x: instances.state(rng, 3) for x in obs.outcomes})
        s = instances.state(rng, 3)
        total = sum(apply_operation(inst[x], s).total() for x in inst.outcomes)
        assert total == pytest.approx(1.0, abs=1e-12)
        for x in inst.outcomes:
            assert apply_operation(inst[x], s).total() == pytest.approx(
                state_eval(s, obs[x]), abs=1e-12
            )

    def test_instrument_transition_closed_form(self):
        rng = np.random.default_rng(16)
        obs = instances.observable(rng, 3, 2)
        alphas = {x: instances.state(rng, 3) for x in obs.outcomes}
        inst = holevo_instrument(obs, alphas)
        s = instances.state(rng, 3)
        b, c = instances.effect(rng, 3), instances.effect(rng, 3)
        for x in inst.outcomes:
            expected = state_eval(s, b) * state_eval(alphas[x], c)
            assert transition_prob_effect(s, inst[x], b, c) == pytest.approx(
                expected, abs=1e-12
            )

    def test_single_outcome_instrument_is_constant_channel(self):
        obs = Observable({"only": ClassicalEffect.unit(2)})
        alpha = ClassicalSubstate([0.2, 0.8])
        inst = holevo_instrument(obs, {"only": alpha})
        assert inst["only"].is_channel

    def test_outcome_label_mismatch(self):
        obs = Observable({"x0": ClassicalEffect([1, 0]), "x1": ClassicalEffect([0, 1])})
        with pytest.raises(ValidationError):
            holevo_mixed(obs, {"x0": ClassicalSubstate([1, 0])})


class TestRepeatable:
    def test_identity(self):
        assert is_repeatable(ClassicalOperation.identity(3))

    def test_diagonal_projection_like(self):
        assert is_repeatable(ClassicalOperation(np.diag([1.0, 0.0, 1.0])))

    def test_holevo_condition(self):
        alpha = ClassicalSubstate([0.5, 0.5, 0.0])
        absorbed = ClassicalEffect([1, 1, 0.3])  # alpha(a) = 1
        assert is_repeatable(holevo_pure(absorbed, alpha))
        leaky = ClassicalEffect([1, 0.5, 0.3])  # alpha(a) = 0.75
        assert not is_repeatable(holevo_pure(leaky, alpha))
        assert is_repeatable(holevo_pure(ClassicalEffect.zero(3), alpha))


class TestDistributions:
    def test_trivial_observable(self):
        obs = Observable({"only": ClassicalEffect.unit(2)})
        table = observable_distribution(ClassicalSubstate([0.5, 0.5]), obs)
        np.testing.assert_allclose(table.values, [1.0])

    def test_point_mass_observable(self):
        obs = Observable({"x0": ClassicalEffect([1, 0]), "x1": ClassicalEffect([0, 1])})
        table = observable_distribution(ClassicalSubstate([0.25, 0.75]), obs)
        np.testing.assert_allclose(table.values, [0.25, 0.75])

    def test_holevo_instrument_distribution_matches_observable(self):
        rng = np.random.default_rng(17)
        obs = instances.observable(rng, 3, 3)
        inst = holevo_instrument(obs, {x: instances.state(rng, 3) for x in obs.outcomes})
        s = instances.state(rng, 3)
        np.testing.assert_allclose(
            instrument_distribution(s, inst).values,
            observable_distribution(s, obs).values,
            atol=1e-12,
        )

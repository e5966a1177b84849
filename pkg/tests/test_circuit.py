"""Circuit solver: frozen examples, oracle comparisons, exactness properties."""

from fractions import Fraction

import pytest
from hypothesis import given, settings

from kexlab import (
    BothDeltasNonzero,
    BothDeltasZero,
    Voltage,
    ZeroCurrentDelta,
    differential_slope,
    loop_params,
    observe_with_noise,
    perturbed_pair,
    solve_loop,
)
from kexlab.circuit import Resistance

from conftest import loop_params_st, nodal_oracle, nonzero_rationals


class TestSolveLoop:
    def test_worked_example_frozen(self, e1_params):
        obs = solve_loop(e1_params)
        assert obs.u_c.value == Fraction(23, 7)
        assert obs.i_c.value == Fraction(1, 1750)
        # cross-check the Bob-side relation: u_b + 4000 * i_c == u_c
        assert Fraction(1) + 4000 * Fraction(1, 1750) == Fraction(23, 7)

    def test_worked_example_matches_nodal_oracle(self, e1_params):
        obs = solve_loop(e1_params)
        u_c, i_c = nodal_oracle(1000, 2000, 3000, 5, 1)
        assert (obs.u_c.value, obs.i_c.value) == (u_c, i_c)

    def test_hand_kirchhoff_example(self):
        # total loop resistance 4, one volt of drop per ohm
        obs = solve_loop(loop_params(1, 1, 1, 4, 0))
        assert obs.u_c.value == 2
        assert obs.i_c.value == 1

    def test_symmetric_sources_drive_no_current(self):
        obs = solve_loop(loop_params(17, 23, 5, "7/3", "7/3"))
        assert obs.i_c.value == 0
        assert obs.u_c.value == Fraction(7, 3)

    @given(params=loop_params_st())
    @settings(max_examples=200)
    def test_matches_nodal_oracle(self, params):
        obs = solve_loop(params)
        u_c, i_c = nodal_oracle(
            params.r_s.value, params.r_a.value, params.r_b.value,
            params.u_a.value, params.u_b.value,
        )
        assert (obs.u_c.value, obs.i_c.value) == (u_c, i_c)

    @given(params=loop_params_st())
    @settings(max_examples=200)
    def test_constitutive_consistency(self, params):
        obs = solve_loop(params)
        lhs_a = params.u_a.value - (params.r_a.value + params.r_s.value) * obs.i_c.value
        lhs_b = params.u_b.value + (params.r_s.value + params.r_b.value) * obs.i_c.value
        assert obs.u_c.value == lhs_a == lhs_b

    @given(params=loop_params_st())
    @settings(max_examples=100)
    def test_zero_current_iff_equal_sources(self, params):
        obs = solve_loop(params)
        assert (obs.i_c.value == 0) == (params.u_a.value == params.u_b.value)

    def test_exactness_is_preserved(self, e1_params):
        obs = solve_loop(e1_params)
        assert isinstance(obs.u_c.value, Fraction)
        assert isinstance(obs.i_c.value, Fraction)

    def test_resistance_must_be_positive(self):
        with pytest.raises(ValueError):
            Resistance(0)
        with pytest.raises(ValueError):
            Resistance(-5)

    def test_floats_are_rejected_on_the_exact_path(self):
        with pytest.raises(TypeError):
            Resistance(1000.0)


class TestPerturbedPair:
    def test_alice_shift_frozen_deltas(self, e1_params):
        baseline, after = perturbed_pair(e1_params, Voltage(1), Voltage(0))
        assert after.i_c.value - baseline.i_c.value == Fraction(1, 7000)
        assert after.u_c.value - baseline.u_c.value == Fraction(4, 7)

    def test_bob_shift_frozen_deltas(self, e1_params):
        baseline, after = perturbed_pair(e1_params, Voltage(0), Voltage(1))
        assert after.i_c.value - baseline.i_c.value == Fraction(-1, 7000)
        assert after.u_c.value - baseline.u_c.value == Fraction(3, 7)

    def test_both_zero_rejected(self, e1_params):
        with pytest.raises(BothDeltasZero):
            perturbed_pair(e1_params, Voltage(0), Voltage(0))

    def test_both_nonzero_rejected(self, e1_params):
        with pytest.raises(BothDeltasNonzero):
            perturbed_pair(e1_params, Voltage(1), Voltage(1))

    def test_params_not_modified(self, e1_params):
        perturbed_pair(e1_params, Voltage(1), Voltage(0))
        assert e1_params.u_a.value == 5


class TestDifferentialSlope:
    def test_alice_driven_magnitude(self, e1_params):
        baseline, after = perturbed_pair(e1_params, Voltage(1), Voltage(0))
        assert differential_slope(baseline, after) == 4000  # r_s + r_b

    def test_bob_driven_magnitude(self, e1_params):
        baseline, after = perturbed_pair(e1_params, Voltage(0), Voltage(1))
        assert differential_slope(baseline, after) == 3000  # r_s + r_a

    def test_identical_observations_rejected(self, e1_params):
        obs = solve_loop(e1_params)
        with pytest.raises(ZeroCurrentDelta):
            differential_slope(obs, obs)

    @given(params=loop_params_st(), da=nonzero_rationals)
    @settings(max_examples=200)
    def test_slope_identities_signed(self, params, da):
        baseline, after = perturbed_pair(params, Voltage(da), Voltage(0))
        du = after.u_c.value - baseline.u_c.value
        di = after.i_c.value - baseline.i_c.value
        assert du / di == params.r_s.value + params.r_b.value
        baseline, after = perturbed_pair(params, Voltage(0), Voltage(da))
        du = after.u_c.value - baseline.u_c.value
        di = after.i_c.value - baseline.i_c.value
        assert du / di == -(params.r_s.value + params.r_a.value)

    @given(params=loop_params_st(), da=nonzero_rationals, db=nonzero_rationals)
    @settings(max_examples=100)
    def test_superposition_slopes_independent_of_operating_point(self, params, da, db):
        # shift the operating point by db on Bob's side, keep Alice's delta;
        # an affine system gives the same differential response everywhere
        from kexlab import LoopParams

        moved = LoopParams(
            r_s=params.r_s, r_a=params.r_a, r_b=params.r_b,
            u_a=params.u_a, u_b=Voltage(params.u_b.value + db),
        )
        b1, p1 = perturbed_pair(params, Voltage(da), Voltage(0))
        b2, p2 = perturbed_pair(moved, Voltage(da), Voltage(0))
        assert p1.i_c.value - b1.i_c.value == p2.i_c.value - b2.i_c.value
        assert p1.u_c.value - b1.u_c.value == p2.u_c.value - b2.u_c.value


class TestObserveWithNoise:
    def test_zero_noise_is_exact_identity(self, e1_params):
        obs = solve_loop(e1_params)
        noisy = observe_with_noise(obs, 0.0, 0.0, 123)
        assert noisy.u_c == float(Fraction(23, 7))
        assert noisy.i_c == float(Fraction(1, 1750))

    def test_deterministic_for_fixed_seed(self, e1_params):
        obs = solve_loop(e1_params)
        n1 = observe_with_noise(obs, 1e-6, 1e-6, 42)
        n2 = observe_with_noise(obs, 1e-6, 1e-6, 42)
        assert (n1.u_c, n1.i_c) == (n2.u_c, n2.i_c)

    def test_six_sigma_bound(self, e1_params):
        obs = solve_loop(e1_params)
        exact = float(Fraction(23, 7))
        for seed in range(200):
            noisy = observe_with_noise(obs, 1e-6, 0.0, seed)
            assert abs(noisy.u_c - exact) <= 6e-6

    def test_negative_sigma_rejected(self, e1_params):
        obs = solve_loop(e1_params)
        with pytest.raises(ValueError):
            observe_with_noise(obs, -1e-6, 0.0, 1)

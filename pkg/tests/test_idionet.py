import math

import numpy as np
import pytest

from ais_kit.affinity import MatchConfig
from ais_kit.errors import ConfigError
from ais_kit.idionet import (
    AntigenPattern,
    FarmerParams,
    MatchMatrices,
    NetworkAntibody,
    NetworkState,
    build_match_matrix,
    farmer_derivative,
    pairing_weights,
    select_antigenic,
    select_by_activation,
    select_by_concentration,
    squash,
    step,
    stimulation,
    suppression,
    update_affinity,
)
from oracles import ref_total_reaction


def two_antibody_system():
    antibodies = [
        NetworkAntibody(paratope="1100", idiotope="0011", concentration=0.3, action_label="a"),
        NetworkAntibody(paratope="0011", idiotope="1100", concentration=0.6, action_label="b"),
    ]
    antigens = [AntigenPattern(epitope="0101", concentration=0.8)]
    cfg = MatchConfig(s=2)
    m = build_match_matrix(antibodies, antigens, cfg)
    return antibodies, antigens, m


class TestMatchMatrix:
    def test_zero_complementarity_gives_zero_matrix(self):
        antibodies = [
            NetworkAntibody(paratope="0000", idiotope="0000", concentration=0.5),
            NetworkAntibody(paratope="0000", idiotope="0000", concentration=0.5),
        ]
        m = build_match_matrix(antibodies, [], MatchConfig(s=1))
        assert not m.antibody.any()

    def test_mutually_complementary_pair_scores_one_on_cross(self):
        antibodies = [
            NetworkAntibody(paratope="1111", idiotope="1111", concentration=0.5),
            NetworkAntibody(paratope="0000", idiotope="0000", concentration=0.5),
        ]
        m = build_match_matrix(antibodies, [], MatchConfig(s=4))
        np.testing.assert_array_equal(m.antibody, [[0, 1], [1, 0]])

    def test_random_system_matches_bruteforce(self):
        rng = np.random.default_rng(9)
        antibodies = [
            NetworkAntibody(
                paratope=rng.integers(0, 2, 8),
                idiotope=rng.integers(0, 2, 8),
                concentration=0.5,
            )
            for _ in range(4)
        ]
        antigens = [AntigenPattern(epitope=rng.integers(0, 2, 8)) for _ in range(2)]
        cfg = MatchConfig(s=3)
        m = build_match_matrix(antibodies, antigens, cfg)
        for j, abj in enumerate(antibodies):
            for i, abi in enumerate(antibodies):
                assert m.antibody[j, i] == ref_total_reaction(abi.paratope, abj.idiotope, s=3)
        for j, ag in enumerate(antigens):
            for i, abi in enumerate(antibodies):
                assert m.antigen[j, i] == ref_total_reaction(abi.paratope, ag.epitope, s=3)

    def test_mixed_lengths_rejected(self):
        with pytest.raises(ConfigError):
            build_match_matrix(
                [NetworkAntibody(paratope="111", idiotope="000", concentration=0.5)],
                [AntigenPattern(epitope="0000")],
                MatchConfig(s=1),
            )


class TestFarmerDerivative:
    def test_pure_damping_without_interactions(self):
        m = MatchMatrices(antibody=np.zeros((1, 1)), antigen=np.zeros((0, 1)))
        x = np.array([0.4])
        params = FarmerParams(c=1.0, k1=0.5, k2=0.25, dt=0.1)
        np.testing.assert_allclose(
            farmer_derivative(x, np.zeros(0), m, params), [-0.25 * 0.4], rtol=0, atol=0
        )

    def test_zero_concentration_is_absorbing(self):
        _, _, m = two_antibody_system()
        params = FarmerParams(c=1.0, k1=0.5, k2=0.1, dt=0.1)
        dx = farmer_derivative(np.array([0.0, 0.5]), np.array([0.8]), m, params)
        assert dx[0] == 0.0

    def test_hand_computed_three_term_derivative(self):
        _, _, m = two_antibody_system()
        x, y = [0.3, 0.6], [0.8]
        c, k1, k2 = 1.0, 0.5, 0.1
        params = FarmerParams(c=c, k1=k1, k2=k2, dt=0.1)
        expected = []
        for i in range(2):
            antigen_stim = sum(m.antigen[j, i] * x[i] * y[j] for j in range(1))
            suppress = sum(m.antibody[i, j] * x[i] * x[j] for j in range(2))
            stimulate = sum(m.antibody[j, i] * x[i] * x[j] for j in range(2))
            expected.append(c * (antigen_stim - k1 * suppress + stimulate) - k2 * x[i])
        np.testing.assert_allclose(
            farmer_derivative(np.array(x), np.array(y), m, params), expected, atol=1e-15
        )

    def test_agrees_with_central_difference_of_integrated_trajectory(self):
        scipy_integrate = pytest.importorskip("scipy.integrate")
        _, _, m = two_antibody_system()
        # suppression-dominant parameters keep the raw trajectory bounded
        params = FarmerParams(c=0.3, k1=2.0, k2=0.5, dt=0.1)
        y = np.array([0.8])

        sol = scipy_integrate.solve_ivp(
            lambda _t, x: farmer_derivative(x, y, m, params),
            (0.0, 1.0),
            np.array([0.3, 0.6]),
            rtol=1e-12,
            atol=1e-14,
            dense_output=True,
        )
        h = 1e-4
        mid = 0.5
        numeric = (sol.sol(mid + h) - sol.sol(mid - h)) / (2 * h)
        analytic = farmer_derivative(sol.sol(mid), y, m, params)
        np.testing.assert_allclose(numeric, analytic, rtol=1e-6)

    def test_dimension_mismatch(self):
        _, _, m = two_antibody_system()
        with pytest.raises(ConfigError):
            farmer_derivative(np.array([0.5]), np.array([0.8]), m, FarmerParams(1, 0, 0, 0.1))


class TestSquashAndStep:
    def test_logistic_midpoint_and_saturation(self):
        assert squash(0.5, 0.5) == 0.5
        assert squash(60.0, 0.5) == pytest.approx(1.0, abs=1e-12)
        assert squash(-60.0, 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_direct_value(self):
        assert squash(1.5, 0.5) == pytest.approx(1.0 / (1.0 + math.exp(-1.0)), abs=1e-15)

    def test_zero_dt_still_squashes(self):
        _, _, m = two_antibody_system()
        state = NetworkState(x=np.array([0.3, 0.6]), y=np.array([0.8]), m=m)
        params = FarmerParams(c=1.0, k1=0.5, k2=0.1, dt=0.0)
        out = step(state, params)
        np.testing.assert_allclose(out.x, squash(state.x, 0.5), atol=0)

    def test_pure_damping_pre_squash_sequence_decreases(self):
        m = MatchMatrices(antibody=np.zeros((1, 1)), antigen=np.zeros((0, 1)))
        params = FarmerParams(c=1.0, k1=0.0, k2=0.2, dt=0.5)
        state = NetworkState(x=np.array([0.9]), y=np.zeros(0), m=m)
        raws = []
        for _ in range(20):
            raw = state.x + params.dt * farmer_derivative(state.x, state.y, state.m, params)
            raws.append(float(raw[0]))
            state = step(state, params)
        assert all(b < a for a, b in zip(raws, raws[1:]))

    def test_three_step_trajectory_matches_hand_recomputation(self):
        """Spreadsheet-style scalar recomputation of three Euler+squash steps."""
        _, _, m = two_antibody_system()
        c, k1, k2, dt, theta = 1.0, 0.5, 0.1, 0.1, 0.5
        params = FarmerParams(c=c, k1=k1, k2=k2, dt=dt, squash_theta=theta)
        # cross-check the match matrix entries feeding the trace
        assert m.antigen.tolist() == [
            [ref_total_reaction("1100", "0101", s=2), ref_total_reaction("0011", "0101", s=2)]
        ]
        state = NetworkState(x=np.array([0.3, 0.6]), y=np.array([0.8]), m=m)
        x = [0.3, 0.6]
        y = [0.8]
        for _ in range(3):
            state = step(state, params)
            nxt = []
            for i in range(2):
                antigen_stim = sum(m.antigen[j, i] * x[i] * y[j] for j in range(1))
                suppress = sum(m.antibody[i, j] * x[i] * x[j] for j in range(2))
                stimulate = sum(m.antibody[j, i] * x[i] * x[j] for j in range(2))
                deriv = c * (antigen_stim - k1 * suppress + stimulate) - k2 * x[i]
                raw = x[i] + dt * deriv
                nxt.append(1.0 / (1.0 + math.exp(theta - raw)))
            x = nxt
            np.testing.assert_allclose(state.x, x, rtol=0, atol=1e-12)

    def test_concentrations_stay_in_unit_interval(self):
        rng = np.random.default_rng(31)
        for trial in range(3):
            n = 5
            antibodies = [
                NetworkAntibody(
                    paratope=rng.integers(0, 2, 6),
                    idiotope=rng.integers(0, 2, 6),
                    concentration=float(rng.uniform(0.05, 0.95)),
                )
                for _ in range(n)
            ]
            antigens = [AntigenPattern(epitope=rng.integers(0, 2, 6))]
            m = build_match_matrix(antibodies, antigens, MatchConfig(s=2))
            state = NetworkState(
                x=np.array([ab.concentration for ab in antibodies]),
                y=np.array([1.0]),
                m=m,
            )
            params = FarmerParams(c=0.5, k1=0.8, k2=0.2, dt=0.05)
            for _ in range(10_000):
                state = step(state, params)
            assert ((state.x > 0.0) & (state.x < 1.0)).all()

    def test_suppression_dominant_sum_non_increasing_without_antigen(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            n = 4
            sym = rng.integers(0, 5, size=(n, n))
            sym = (sym + sym.T).astype(float)
            m = MatchMatrices(antibody=sym, antigen=np.zeros((0, n)))
            x = rng.uniform(0.1, 0.9, size=n)
            params = FarmerParams(c=1.0, k1=1.5, k2=0.1, dt=0.05)
            raw = x + params.dt * farmer_derivative(x, np.zeros(0), m, params)
            assert raw.sum() <= x.sum()

    def test_non_finite_intermediate_raises(self):
        m = MatchMatrices(antibody=np.array([[1e300]]), antigen=np.zeros((0, 1)))
        state = NetworkState(x=np.array([0.9]), y=np.zeros(0), m=m)
        params = FarmerParams(c=1.0, k1=0.0, k2=0.0, dt=1e10)
        with np.errstate(over="ignore"), pytest.raises(ValueError):
            step(state, params)


P_FIXTURE = [[0.2, 0.7], [0.5, 0.1], [0.9, 0.4]]
I_FIXTURE = [[0.3, 0.6], [0.8, 0.2], [0.1, 0.5]]
X_FIXTURE = [[0.4, 0.4], [0.6, 0.6], [0.5, 0.5]]


class TestStimulationSuppression:
    def test_saturated_paratope_matrix_gives_zero_stimulation(self):
        eps = stimulation(np.ones((3, 2)), I_FIXTURE, X_FIXTURE, r=0)
        np.testing.assert_array_equal(eps, np.zeros(3))

    def test_zero_idiotope_row_gives_zero_stimulation(self):
        I = np.array(I_FIXTURE, dtype=float)
        I[2] = 0.0
        eps = stimulation(P_FIXTURE, I, X_FIXTURE, r=2)
        np.testing.assert_array_equal(eps, np.zeros(3))

    def test_zero_k1_or_zero_antigenic_paratope_gives_zero_suppression(self):
        np.testing.assert_array_equal(
            suppression(P_FIXTURE, I_FIXTURE, X_FIXTURE, r=2, k1=0.0), np.zeros(3)
        )
        P = np.array(P_FIXTURE, dtype=float)
        P[2] = 0.0
        np.testing.assert_array_equal(
            suppression(P, I_FIXTURE, X_FIXTURE, r=2, k1=0.5), np.zeros(3)
        )

    def test_fixture_matches_componentwise_hand_computation(self):
        r, v, k1 = 2, 1, 0.5
        P, I, X = P_FIXTURE, I_FIXTURE, X_FIXTURE
        eps_expected = []
        delta_expected = []
        for i in range(3):
            eps_expected.append(
                sum((1.0 - P[i][j]) * I[r][j] * X[i][j] * X[r][j] for j in range(2))
            )
            delta_expected.append(
                k1 * sum(P[r][j] * I[i][j] * X[i][j] * X[r][j] for j in range(2))
            )
        eps = stimulation(P, I, X, r=r)
        delta = suppression(P, I, X, r=r, k1=k1)
        assert eps.tolist() == eps_expected
        assert delta.tolist() == delta_expected
        updated = update_affinity(P, eps, delta, v)
        for i in range(3):
            assert updated[i][v] == min(1.0, max(0.0, P[i][v] + (eps[i] - delta[i])))
            assert updated[i][0] == P[i][0]

    def test_own_idiotope_variant(self):
        eps = stimulation(P_FIXTURE, I_FIXTURE, X_FIXTURE, r=2, idiotope_source="own")
        expected = [
            sum(
                (1.0 - P_FIXTURE[i][j]) * I_FIXTURE[i][j] * X_FIXTURE[i][j] * X_FIXTURE[2][j]
                for j in range(2)
            )
            for i in range(3)
        ]
        np.testing.assert_allclose(eps, expected, atol=0)

    def test_nonnegative_for_in_range_matrices(self):
        rng = np.random.default_rng(14)
        for _ in range(40):
            P = rng.uniform(0, 1, size=(4, 3))
            I = rng.uniform(0, 1, size=(4, 3))
            X = rng.uniform(0, 1, size=(4, 3))
            assert (stimulation(P, I, X, r=1) >= 0).all()
            assert (suppression(P, I, X, r=1, k1=0.7) >= 0).all()

    def test_update_touches_only_selected_column(self):
        eps = np.array([0.3, 0.0, 0.9])
        delta = np.array([0.1, 0.0, 0.0])
        updated = update_affinity(P_FIXTURE, eps, delta, v=0)
        np.testing.assert_array_equal(np.asarray(updated)[:, 1], np.asarray(P_FIXTURE)[:, 1])
        assert updated[2][0] == 1.0  # 0.9 + 0.9 clamps

    def test_equal_eps_delta_is_identity(self):
        eps = np.array([0.2, 0.3, 0.4])
        updated = update_affinity(P_FIXTURE, eps, eps, v=1)
        np.testing.assert_array_equal(updated, np.asarray(P_FIXTURE, dtype=float))


class TestSelection:
    def test_concentration_identity_and_tie(self):
        assert select_by_concentration(np.array([0.4])) == 0
        assert select_by_concentration(np.array([0.5, 0.5])) == 0
        rng = np.random.default_rng(2)
        x = rng.uniform(size=6)
        assert select_by_concentration(x) == int(max(range(6), key=lambda i: x[i]))

    def test_antigenic_column_argmax(self):
        P = np.array(P_FIXTURE)
        assert select_antigenic(P, 0) == 2
        assert select_antigenic(np.full((4, 2), 0.3), 1) == 0  # tie -> lowest
        rng = np.random.default_rng(4)
        Q = rng.uniform(size=(5, 4))
        for v in range(4):
            assert select_antigenic(Q, v) == int(max(range(5), key=lambda i: Q[i, v]))
        with pytest.raises(ConfigError):
            select_antigenic(P, 2)

    def test_activation_reduces_to_antigenic_for_equal_concentrations(self):
        x = np.full(3, 0.5)
        selected, diff = select_by_activation(x, P_FIXTURE, v=1)
        assert selected == select_antigenic(P_FIXTURE, 1)
        assert diff is False

    def test_activation_flags_idiotypic_difference(self):
        x = np.array([0.9, 0.9, 1e-9])  # antigenic antibody for v=0 is index 2
        selected, diff = select_by_activation(x, P_FIXTURE, v=0)
        assert selected != 2
        assert diff is True

    def test_activation_scale_invariant(self):
        rng = np.random.default_rng(6)
        x = rng.uniform(0.1, 1.0, size=3)
        a = select_by_activation(x, P_FIXTURE, v=1)
        b = select_by_activation(x * 7.3, P_FIXTURE, v=1)
        assert a == b

    def test_pairing_weights_repeat_concentrations(self):
        X = pairing_weights(np.array([0.2, 0.7]), 3)
        np.testing.assert_array_equal(X, [[0.2, 0.2, 0.2], [0.7, 0.7, 0.7]])


class TestValidation:
    def test_antibody_concentration_range(self):
        with pytest.raises(ConfigError):
            NetworkAntibody(paratope="10", idiotope="01", concentration=1.0)
        with pytest.raises(ConfigError):
            NetworkAntibody(paratope="10", idiotope="01", concentration=0.0)

    def test_params_validation(self):
        with pytest.raises(ConfigError):
            FarmerParams(c=0.0, k1=0.0, k2=0.0, dt=0.1)
        with pytest.raises(ConfigError):
            FarmerParams(c=1.0, k1=-0.1, k2=0.0, dt=0.1)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from malacert.errors import InvalidParamError, NonFiniteError
from malacert.kernels import (
    ChainState,
    NoiseStream,
    accept_from_log_u,
    mala_step,
    proposal_log_density,
    run_chain,
    tau_direct,
    ula_step,
)
from malacert.verify import detailed_balance_integral

from conftest import assert_rel, batch_se

finite_floats = st.floats(-5, 5, allow_nan=False)


class TestNoiseStream:
    def test_bitwise_reproducible(self):
        a = NoiseStream(123, 4)
        b = NoiseStream(123, 4)
        za, zb = a.normal((64,)), b.normal((64,))
        assert np.array_equal(za, zb)
        assert np.array_equal(a.uniform((16,)), b.uniform((16,)))
        assert a.counter == b.counter

    def test_distinct_streams_differ(self):
        assert not np.array_equal(
            NoiseStream(123, 0).normal((32,)), NoiseStream(123, 1).normal((32,))
        )
        assert not np.array_equal(
            NoiseStream(123, 0).normal((32,)), NoiseStream(124, 0).normal((32,))
        )

    def test_normal_moments(self):
        z = NoiseStream(9, 0).normal((200_000,))
        assert abs(z.mean()) < 0.01
        assert abs(z.std() - 1.0) < 0.01
        assert abs((z**4).mean() - 3.0) < 0.1

    def test_counter_tracks_consumption(self):
        s = NoiseStream(1, 0)
        s.normal((3,))  # two pairs = 4 uniforms
        assert s.counter == 4
        s.uniform((5,))
        assert s.counter == 9


class TestUlaStep:
    def test_deterministic_drift(self, gaussian1):
        y = ula_step(np.array([1.0]), gaussian1, 0.1, np.array([0.0]))
        assert_rel(y[0], 0.9)

    def test_zero_gradient_at_origin(self, gaussian2):
        y = ula_step(np.zeros(2), gaussian2, 0.25, np.array([1.0, 0.0]))
        np.testing.assert_allclose(y, [math.sqrt(0.5), 0.0])

    def test_direct_arithmetic(self, gaussian1):
        y = ula_step(np.array([2.0]), gaussian1, 0.5, np.array([1.0]))
        assert_rel(y[0], 2.0)  # 2 - 1 + 1


class TestProposalLogDensity:
    def test_normalizer_cancels(self, gaussian1):
        g = 1.0 / (4.0 * math.pi)
        assert abs(proposal_log_density(np.array([0.0]), np.array([0.0]), g, gaussian1)) < 1e-14

    def test_mean_shift(self, gaussian1):
        # proposal mean from x=1 at gamma=0.1 is 0.9, so the exponent vanishes
        val = proposal_log_density(np.array([1.0]), np.array([0.9]), 0.1, gaussian1)
        assert_rel(val, -0.5 * math.log(0.4 * math.pi))

    def test_langevin_drift_breaks_symmetry(self, gaussian1):
        x, y = np.array([1.0]), np.array([0.0])
        assert proposal_log_density(x, y, 0.1, gaussian1) != proposal_log_density(
            y, x, 0.1, gaussian1
        )


class TestTauDirect:
    def test_closed_form_at_origin(self, gaussian1):
        # for the standard gaussian at x=0, tau = gamma^2 ||z||^2 / 2
        assert_rel(
            tau_direct(np.array([0.0]), np.array([1.0]), 0.1, gaussian1), 0.005, 1e-12
        )

    def test_hand_evaluation(self, gaussian1):
        assert_rel(
            tau_direct(np.array([1.0]), np.array([0.0]), 0.1, gaussian1), -0.00475, 1e-12
        )

    def test_vanishes_with_stepsize(self, bump1):
        x, z = np.array([2.0]), np.array([1.5])
        taus = [abs(tau_direct(x, z, g, bump1)) for g in (1e-2, 1e-4, 1e-6)]
        assert taus[0] < 0.1
        # |tau| = O(gamma) at worst
        assert taus[1] <= 1.5 * taus[0] * 1e-2
        assert taus[2] <= 1.5 * taus[1] * 1e-2

    @settings(max_examples=60, deadline=None)
    @given(finite_floats, finite_floats, st.floats(1e-3, 0.9))
    def test_two_route_consistency_gaussian(self, x, z, gamma):
        spec = spec_holder["g1"]
        xv, zv = np.array([x]), np.array([z])
        tau = tau_direct(xv, zv, gamma, spec)
        y = ula_step(xv, spec, gamma, zv)
        via_ratio = (
            float(spec.value(y))
            - proposal_log_density(y, xv, gamma, spec)
            - float(spec.value(xv))
            + proposal_log_density(xv, y, gamma, spec)
        )
        assert abs(tau - via_ratio) <= 1e-9

    @settings(max_examples=60, deadline=None)
    @given(finite_floats, finite_floats, st.floats(1e-3, 0.9))
    def test_two_route_consistency_bump(self, x, z, gamma):
        spec = spec_holder["b1"]
        xv, zv = np.array([x]), np.array([z])
        tau = tau_direct(xv, zv, gamma, spec)
        y = ula_step(xv, spec, gamma, zv)
        via_ratio = (
            float(spec.value(y))
            - proposal_log_density(y, xv, gamma, spec)
            - float(spec.value(xv))
            + proposal_log_density(xv, y, gamma, spec)
        )
        assert abs(tau - via_ratio) <= 1e-9


spec_holder = {}


@pytest.fixture(autouse=True)
def _fill_specs(gaussian1, bump1):
    spec_holder["g1"] = gaussian1
    spec_holder["b1"] = bump1


class TestMalaStep:
    def test_negative_tau_always_accepts(self, gaussian1):
        # from x=1 with z=0 tau is negative, so any u accepts
        state = ChainState(np.array([1.0]))
        new, accepted, tau = mala_step(state, gaussian1, 0.1, np.array([0.0]), 0.999999)
        assert tau < 0 and accepted
        assert new.accepted_count == 1 and new.step_index == 1

    def test_reject_when_u_exceeds_acceptance(self, gaussian1):
        # tau = 0.005, acceptance = exp(-0.005) ~ 0.99501 < 0.999
        state = ChainState(np.array([0.0]))
        new, accepted, tau = mala_step(state, gaussian1, 0.1, np.array([1.0]), 0.999)
        assert_rel(tau, 0.005, 1e-12)
        assert not accepted
        assert new.x[0] == 0.0 and new.accepted_count == 0 and new.step_index == 1

    def test_u_zero_always_accepts(self, gaussian1):
        state = ChainState(np.array([0.0]))
        new, accepted, _ = mala_step(state, gaussian1, 0.1, np.array([4.0]), 0.0)
        assert accepted

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-50, 50))
    def test_acceptance_probability_in_unit_interval(self, tau):
        p = math.exp(-max(0.0, tau))
        assert 0.0 <= p <= 1.0
        # log-space test agrees with the linear-space comparison
        for u in (1e-12, 0.3, 0.999999):
            assert accept_from_log_u(math.log(u), tau) == (u <= p)


class TestRunChain:
    def test_bookkeeping(self, gaussian1):
        with pytest.raises(InvalidParamError):
            run_chain("mala", gaussian1, np.zeros(1), 0.1, 0, NoiseStream(0, 0))
        traj = run_chain("mala", gaussian1, np.zeros(1), 0.1, 1, NoiseStream(0, 0))
        assert len(traj.steps) == 1 and traj.steps[0] == 1

    def test_determinism(self, gaussian1):
        a = run_chain("mala", gaussian1, np.zeros(1), 0.5, 500, NoiseStream(11, 2))
        b = run_chain("mala", gaussian1, np.zeros(1), 0.5, 500, NoiseStream(11, 2))
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.accepted, b.accepted)

    def test_mala_matches_target_second_moment(self, gaussian1):
        # MALA leaves the target invariant; oracle scale set by i.i.d. sampling
        traj = run_chain(
            "mala", gaussian1, np.zeros(1), 0.5, 100_000, NoiseStream(2024, 0)
        )
        x2 = traj.positions[:, 0] ** 2
        se = batch_se(x2)
        assert abs(traj.second_moment[0] - 1.0) <= 3.0 * se

    def test_nonfinite_reports_step(self):
        from malacert.potential import PotentialSpec

        exploding = PotentialSpec(
            d=1,
            value=lambda x: -float(np.sum(x**4)),
            gradient=lambda x: -4.0 * x**3,
            name="unstable",
        )
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(NonFiniteError) as err:
                run_chain("ula", exploding, np.array([2.0]), 0.5, 1000, NoiseStream(1, 0))
        assert err.value.step_index is not None

    def test_csv_round_trip(self, gaussian1, tmp_path):
        traj = run_chain("mala", gaussian1, np.zeros(1), 0.5, 50, NoiseStream(3, 0), thin=5)
        path = tmp_path / "traj.csv"
        traj.write_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "step,accepted,x_0"
        assert len(lines) == 1 + len(traj.steps)
        step, acc, x0 = lines[1].split(",")
        assert int(step) == 5 and acc in ("0", "1")
        assert_rel(float(x0), traj.positions[0, 0], 0)

    def test_ula_csv_accept_column_empty(self, gaussian1, tmp_path):
        traj = run_chain("ula", gaussian1, np.zeros(1), 0.5, 10, NoiseStream(3, 0))
        path = tmp_path / "traj.csv"
        traj.write_csv(path)
        line = path.read_text().strip().splitlines()[1]
        assert line.split(",")[1] == ""


def test_detailed_balance_integral(gaussian1):
    assert detailed_balance_integral(gaussian1, 0.1) <= 1e-6

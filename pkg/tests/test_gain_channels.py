import math

import numpy as np
import pytest

from errors import DegeneratePostselectionError, InvalidParameterError
from models.channel import ChannelMode, FailureWeighting, GainChannel
from models.fock import DensityMatrix
from models.spin import SpinVector
from physics.fock_core import coherent_state, thermal_state
from physics.gain_channels import (
    channel_outcomes,
    conditioned_branch_map,
    eta,
    first_order_amplification,
    gain_map,
    post_state_for_probability,
    spin_overlap_probability,
    weak_value,
)
from physics.observables import mean_phonons

LAM = 0.001
NBAR0 = 0.1
DIM = 26


@pytest.fixture
def thermal():
    return thermal_state(NBAR0, DIM)


@pytest.fixture
def weak_pre():
    return SpinVector.from_amplitudes(0.4, 0.6)


@pytest.fixture
def weak_post():
    return SpinVector.from_amplitudes(0.9, -0.1)


def test_eta_values():
    assert eta(math.pi) == pytest.approx(2.0)
    assert abs(eta(2 * math.pi)) < 1e-15
    assert eta(math.pi / 2) == pytest.approx(1 + 1j)


class TestSpinAlgebra:
    def test_success_probability(self, weak_pre, weak_post):
        ps = spin_overlap_probability(weak_pre, weak_post)
        assert ps == pytest.approx(0.09 / (0.52 * 0.82), rel=1e-12)
        assert round(ps, 2) == 0.21

    def test_weak_value(self, weak_pre, weak_post):
        assert weak_value(weak_pre, weak_post) == pytest.approx(1.4)

    def test_weak_value_of_orthogonal_states(self):
        with pytest.raises(DegeneratePostselectionError):
            weak_value(SpinVector.up(), SpinVector.down())

    def test_unnormalized_spin_rejected(self):
        with pytest.raises(InvalidParameterError):
            SpinVector(1.0, 1.0)
        with pytest.raises(InvalidParameterError):
            SpinVector.from_amplitudes(0, 0)

    def test_normalization_tolerance(self):
        SpinVector(0.6, 0.8 + 1e-13)
        with pytest.raises(InvalidParameterError):
            SpinVector(0.6, 0.8 + 1e-9)

    def test_orthogonal_state(self, weak_pre):
        assert abs(weak_pre.overlap(weak_pre.orthogonal())) < 1e-15

    @pytest.mark.parametrize("probability", [0.08, 0.3, 0.75])
    def test_post_state_for_probability(self, probability):
        pre = SpinVector.plus()
        post = post_state_for_probability(pre, probability)
        assert spin_overlap_probability(pre, post) == pytest.approx(probability, abs=1e-12)
        assert weak_value(pre, post).real >= 0

    def test_post_state_probability_range(self):
        with pytest.raises(InvalidParameterError):
            post_state_for_probability(SpinVector.plus(), 0.0)


class TestChannelModel:
    def test_trace_takes_no_post_state(self):
        with pytest.raises(InvalidParameterError):
            GainChannel(ChannelMode.TRACE, SpinVector.up(), SpinVector.down(), math.pi, LAM)

    def test_heralding_needs_post_state(self):
        with pytest.raises(InvalidParameterError):
            GainChannel(ChannelMode.HERALDED, SpinVector.up(), None, math.pi, LAM)

    def test_tau_must_be_positive(self):
        with pytest.raises(InvalidParameterError):
            GainChannel(ChannelMode.TRACE, SpinVector.up(), None, 0.0, LAM)

    def test_linearity(self, weak_pre, weak_post):
        assert not GainChannel(ChannelMode.HERALDED, weak_pre, weak_post, math.pi, LAM).is_linear
        assert GainChannel(ChannelMode.HERALDED, SpinVector.plus(), SpinVector.down(), math.pi, LAM).is_linear
        assert GainChannel(ChannelMode.TRACE, weak_pre, None, math.pi, LAM).is_linear

    def test_dict_round_trip(self, weak_pre, weak_post):
        channel = GainChannel(ChannelMode.FAILURES, weak_pre, weak_post, math.pi, LAM, FailureWeighting.FIXED)
        restored = GainChannel.from_dict(channel.to_dict())
        assert restored.mode == channel.mode
        assert restored.failure_weighting == FailureWeighting.FIXED
        assert restored.post.up_amplitude == pytest.approx(weak_post.up_amplitude)


class TestBranchMap:
    def test_up_branch_displaces_by_two_lambda(self, thermal):
        out = conditioned_branch_map(1, math.pi, LAM, thermal)
        assert np.real(np.trace(out)) == pytest.approx(1.0, abs=1e-12)
        mean = float(np.real(np.sum(np.arange(DIM) * np.diag(out))))
        assert mean == pytest.approx(0.100004, rel=1e-9)

    def test_branches_displace_in_opposite_directions(self, thermal):
        b = np.diag(np.sqrt(np.arange(1, DIM)), k=1)
        up = np.trace(b @ conditioned_branch_map(1, math.pi, LAM, thermal))
        down = np.trace(b @ conditioned_branch_map(-1, math.pi, LAM, thermal))
        assert up == pytest.approx(2 * LAM, abs=1e-12)
        assert down == pytest.approx(-2 * LAM, abs=1e-12)

    def test_invalid_sign(self, thermal):
        with pytest.raises(InvalidParameterError):
            conditioned_branch_map(0, math.pi, LAM, thermal)


class TestGainMap:
    def test_full_period_is_identity(self, thermal, weak_pre, weak_post):
        channel = GainChannel(ChannelMode.HERALDED, weak_pre, weak_post, 2 * math.pi, LAM)
        out, _ = gain_map(channel, thermal)
        np.testing.assert_allclose(out.entries, thermal.entries, atol=1e-12)

    def test_heralded_plus_to_down(self, thermal):
        channel = GainChannel(ChannelMode.HERALDED, SpinVector.plus(), SpinVector.down(), math.pi, LAM)
        out, weight = gain_map(channel, thermal)
        assert weight == pytest.approx(0.5, abs=1e-12)
        assert mean_phonons(out) == pytest.approx(0.100004, rel=1e-9)

    def test_trace_of_eigenstate_is_single_branch(self, thermal):
        channel = GainChannel(ChannelMode.TRACE, SpinVector.up(), None, math.pi, LAM)
        out, weight = gain_map(channel, thermal)
        assert weight == 1.0
        np.testing.assert_allclose(out.entries, conditioned_branch_map(1, math.pi, LAM, thermal), atol=1e-14)

    def test_trace_of_superposition_gives_no_net_displacement(self, thermal):
        channel = GainChannel(ChannelMode.TRACE, SpinVector.plus(), None, math.pi, LAM)
        out, _ = gain_map(channel, thermal)
        b = np.diag(np.sqrt(np.arange(1, DIM)), k=1)
        assert abs(np.trace(b @ out.entries)) < 1e-14
        assert mean_phonons(out) == pytest.approx(0.100004, rel=1e-9)

    def test_weak_value_amplifies_the_kick(self, thermal, weak_pre, weak_post):
        channel = GainChannel(ChannelMode.HERALDED, weak_pre, weak_post, math.pi, LAM)
        out, weight = gain_map(channel, thermal)
        b = np.diag(np.sqrt(np.arange(1, DIM)), k=1)
        assert np.real(np.trace(b @ out.entries)) == pytest.approx(2 * LAM * 1.4, rel=1e-3)
        assert weight == pytest.approx(spin_overlap_probability(weak_pre, weak_post), rel=1e-3)

    def test_orthogonal_post_selection_is_degenerate(self, thermal):
        channel = GainChannel(ChannelMode.HERALDED, SpinVector.up(), SpinVector.down(), math.pi, LAM)
        with pytest.raises(DegeneratePostselectionError):
            gain_map(channel, thermal)

    def test_joint_failures_equal_tracing(self, thermal, weak_pre, weak_post):
        joint = GainChannel(ChannelMode.FAILURES, weak_pre, weak_post, math.pi, LAM, FailureWeighting.JOINT)
        traced = GainChannel(ChannelMode.TRACE, weak_pre, None, math.pi, LAM)
        out_joint, ps = gain_map(joint, thermal)
        out_trace, _ = gain_map(traced, thermal)
        np.testing.assert_allclose(out_joint.entries, out_trace.entries, atol=1e-14)
        assert ps == pytest.approx(spin_overlap_probability(weak_pre, weak_post))

    @pytest.mark.parametrize("weighting", list(FailureWeighting))
    def test_failure_weightings_give_valid_states(self, thermal, weak_pre, weak_post, weighting):
        channel = GainChannel(ChannelMode.FAILURES, weak_pre, weak_post, math.pi, LAM, weighting)
        out, _ = gain_map(channel, thermal)
        assert out.satisfies_invariants()


    @pytest.mark.parametrize("mode, weighting", [
        (ChannelMode.HERALDED, FailureWeighting.PROJECTOR),
        (ChannelMode.FAILURES, FailureWeighting.PROJECTOR),
        (ChannelMode.FAILURES, FailureWeighting.FIXED),
        (ChannelMode.FAILURES, FailureWeighting.JOINT),
    ])
    def test_eigenstate_pre_makes_channels_agree(self, thermal, weak_post, mode, weighting):
        reference, _ = gain_map(GainChannel(ChannelMode.TRACE, SpinVector.up(), None, math.pi, LAM), thermal)
        channel = GainChannel(mode, SpinVector.up(), weak_post, math.pi, LAM, weighting)
        out, _ = gain_map(channel, thermal)
        np.testing.assert_allclose(out.entries, reference.entries, atol=1e-12)

    def test_heralded_plus_to_down_keeps_pure_states_pure(self):
        channel = GainChannel(ChannelMode.HERALDED, SpinVector.plus(), SpinVector.down(), math.pi, 0.05)
        out, _ = gain_map(channel, coherent_state(0.7, DIM))
        assert out.purity() == pytest.approx(1.0, abs=1e-10)

    def test_trace_channel_is_linear(self, thermal, weak_pre):
        channel = GainChannel(ChannelMode.TRACE, weak_pre, None, math.pi, 0.05)
        coherent = coherent_state(0.5 - 0.3j, DIM)
        mixture = DensityMatrix.from_matrix(0.3 * thermal.entries + 0.7 * coherent.entries)
        out_mix, _ = gain_map(channel, mixture)
        out_thermal, _ = gain_map(channel, thermal)
        out_coherent, _ = gain_map(channel, coherent)
        np.testing.assert_allclose(
            out_mix.entries, 0.3 * out_thermal.entries + 0.7 * out_coherent.entries, atol=1e-12
        )

class TestFirstOrder:
    def test_eigenstate(self):
        channel = GainChannel(ChannelMode.TRACE, SpinVector.up(), None, math.pi, LAM)
        assert first_order_amplification(channel) == pytest.approx(1.0)

    def test_heralded_is_real_weak_value(self, weak_pre, weak_post):
        channel = GainChannel(ChannelMode.HERALDED, weak_pre, weak_post, math.pi, LAM)
        assert first_order_amplification(channel) == pytest.approx(1.4)

    def test_trace_is_sigma_z_expectation(self, weak_pre):
        channel = GainChannel(ChannelMode.TRACE, weak_pre, None, math.pi, LAM)
        assert first_order_amplification(channel) == pytest.approx((0.16 - 0.36) / 0.52)

    def test_outcomes_sum_to_one(self, weak_pre, weak_post):
        for channel in (
            GainChannel(ChannelMode.TRACE, weak_pre, None, math.pi, LAM),
            GainChannel(ChannelMode.FAILURES, weak_pre, weak_post, math.pi, LAM),
        ):
            assert sum(o.probability for o in channel_outcomes(channel)) == pytest.approx(1.0)

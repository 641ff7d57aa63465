"""
SPA-MAP Test Suite
Prior moments, Tikhonov likelihood parameters, forward/backward message
recursions and the joint-symbol posterior
"""

import math

import numpy as np
import pytest
from loguru import logger

from phasenoise.beliefs import SymbolPriors, candidate_set
from phasenoise.diagnostics import DetectorDiagnostics
from phasenoise.channel import (
    PilotPattern,
    apply_channel,
    build_frame,
    sample_phase_trajectories,
    unit_gains,
)
from phasenoise.errors import DomainError, NumericalError
from phasenoise.spa import (
    MessageTrack,
    PriorMoments,
    SpaParams,
    TikhonovMessageState,
    backward_step,
    forward_step,
    joint_symbol_posterior,
    pd_params,
    posterior_log_weights,
    prior_moments,
    run_recursions,
    spa_map_run,
)

pytestmark = pytest.mark.receivers

SIGMA2 = math.radians(4.0) ** 2


class TestPriorMoments:
    """
    Test suite for moment matching and likelihood parameters
    """

    def test_uniform_and_delta_moments(self, bpsk):
        """
        Test Case 1: Moments of uniform and delta priors

        Verify zero mean under uniform BPSK priors and gamma = N0 under known symbols
        """
        logger.info("=== Test Case 1: Prior Moments ===")

        uniform = prior_moments(SymbolPriors.uniform(4, 2, 2), bpsk, n0=0.1)
        np.testing.assert_allclose(uniform.alpha, 0.0)
        np.testing.assert_allclose(uniform.beta, 1.0)
        np.testing.assert_allclose(uniform.gamma, 2.1)

        known = prior_moments(SymbolPriors.delta(np.array([[0, 1]]), 2), bpsk, n0=0.1, gains=unit_gains(2, 3))
        np.testing.assert_allclose(known.alpha, [[1.0, -1.0]])
        assert known.gamma.shape == (1, 3), f"Gamma must carry an N_r axis, got {known.gamma.shape}"
        np.testing.assert_allclose(known.gamma, 0.1)

        logger.info("✅ Moments matched")

    def test_zero_mean_gives_uniform_parameters(self, bpsk):
        """
        Test Case 2: Zero mean symbol

        Verify a zero mean symbol produces exactly zero Tikhonov parameters
        """
        logger.info("=== Test Case 2: Zero Mean Parameters ===")

        moments = prior_moments(SymbolPriors.uniform(1, 2, 2).pmf[0], bpsk, n0=0.5)
        params = pd_params(np.array([0.3 + 0.4j]), moments)
        np.testing.assert_array_equal(params.link, 0.0)
        np.testing.assert_array_equal(params.cross, 0.0)

        logger.info("✅ Zero mean gives uniform direction")

    def test_bivariate_form(self, bpsk):
        """
        Test Case 3: Two-transmit likelihood

        Verify the 2x1 parameters satisfy the coupling-angle constraint
        """
        logger.info("=== Test Case 3: Bivariate Form ===")

        moments = prior_moments(np.array([[0.9, 0.1], [0.3, 0.7]]), bpsk, n0=0.2)
        params = pd_params(np.array([0.8 - 0.5j]), moments, gains=np.array([[1.0], [0.5j]]))
        triple = params.bivariate()
        assert abs(triple.z3) == pytest.approx(abs(params.cross[0, 1])), "Coupling magnitude mismatch"

        logger.info("✅ Bivariate parameters consistent")


class TestMessageRecursions:
    """
    Test suite for the forward and backward message recursions
    """

    @pytest.fixture(autouse=True)
    def setup(self, qpsk):
        """Build a noisy 2x1 QPSK frame with pilot-only priors"""
        rng = np.random.default_rng(5)
        self.pattern = PilotPattern.from_name('1/20')
        self.frame = build_frame(None, qpsk, self.pattern, 60, 2, rng=rng)
        trajectory = sample_phase_trajectories(60, 2, 1, SIGMA2, SIGMA2, rng)
        self.received = apply_channel(self.frame, trajectory, unit_gains(2, 1), 0.05, rng)
        self.priors = SymbolPriors.with_pilots(None, self.frame.pilot_mask, self.frame.symbol_indices, qpsk.size)
        self.moments = prior_moments(self.priors, qpsk, 0.05, unit_gains(2, 1))
        self.candidates = candidate_set(qpsk, 2)
        yield

    def test_boundary_messages_uniform(self):
        """
        Test Case 1: Boundary messages

        Verify the first forward and last backward messages are uniform
        """
        logger.info("=== Test Case 1: Boundary Messages ===")

        track = run_recursions(self.received.samples, self.moments, SIGMA2, SIGMA2)
        np.testing.assert_array_equal(track.forward_a[0], 0.0)
        np.testing.assert_array_equal(track.backward_a[-1], 0.0)
        assert np.abs(track.forward_a[20]).min() > 0, "Preamble must inform the forward message"

        logger.info("✅ Boundary messages uniform")

    def test_step_matches_pass(self):
        """
        Test Case 2: Single steps against the vectorized pass

        Verify repeated forward_step calls reproduce the frame recursion
        """
        logger.info("=== Test Case 2: Step vs Pass ===")

        track = run_recursions(self.received.samples, self.moments, SIGMA2, SIGMA2)
        state = TikhonovMessageState.uniform(2, 1)
        for k in range(1, 15):
            prev = PriorMoments(self.moments.alpha[k - 1], self.moments.beta[k - 1], self.moments.gamma[k - 1])
            state = forward_step(state, self.received.samples[k - 1], prev, SIGMA2, SIGMA2)
            np.testing.assert_allclose(state.a, track.forward_a[k], rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(state.a_cross, track.forward_cross[k], rtol=1e-10, atol=1e-12)

        logger.info("✅ Single steps reproduce the pass")

    def test_backward_step_matches_pass(self):
        """
        Test Case 3: Backward steps against the reversed pass

        Verify backward_step from the last index reproduces the backward messages
        and flags a non-finite sample as a backward failure
        """
        logger.info("=== Test Case 3: Backward Step vs Pass ===")

        track = run_recursions(self.received.samples, self.moments, SIGMA2, SIGMA2)
        length = self.received.samples.shape[0]
        state = TikhonovMessageState.uniform(2, 1)
        for k in range(length - 2, length - 16, -1):
            nxt = PriorMoments(self.moments.alpha[k + 1], self.moments.beta[k + 1], self.moments.gamma[k + 1])
            state = backward_step(state, self.received.samples[k + 1], nxt, SIGMA2, SIGMA2)
            np.testing.assert_allclose(state.a, track.backward_a[k], rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(state.a_cross, track.backward_cross[k], rtol=1e-10, atol=1e-12)

        bad = self.received.samples[-1].copy()
        bad[0] = np.nan
        last = PriorMoments(self.moments.alpha[-1], self.moments.beta[-1], self.moments.gamma[-1])
        with pytest.raises(NumericalError, match="backward"):
            backward_step(TikhonovMessageState.uniform(2, 1), bad, last, SIGMA2, SIGMA2)

        logger.info("✅ Backward steps reproduce the reversed pass")

    def test_coupling_angle_constraint(self):
        """
        Test Case 4: Coupling-angle constraint

        Verify a message built from one pilot observation satisfies angle(a_cross) = angle(a_1) - angle(a_2)
        """
        logger.info("=== Test Case 4: Coupling Angle ===")

        track = run_recursions(self.received.samples, self.moments, SIGMA2, SIGMA2)
        residual = track.forward(1).constraint_residual()
        assert residual < 1e-9, f"Constraint residual {residual}"
        assert TikhonovMessageState.uniform(2, 1).constraint_residual() == 0.0, "Uniform state has no constraint"

        logger.info(f"✅ Constraint residual {residual:.2e}")

    def test_non_finite_input(self):
        """
        Test Case 5: Non-finite messages

        Verify a NaN sample raises NumericalError carrying the frame and step
        """
        logger.info("=== Test Case 5: Non-finite Input ===")

        samples = self.received.samples.copy()
        samples[0, 0] = np.nan
        with pytest.raises(NumericalError) as exc:
            run_recursions(samples, self.moments, SIGMA2, SIGMA2, frame_index=7)
        assert exc.value.frame_index == 7, "Frame index must be attached"
        assert exc.value.step == 1, f"Expected step 1, got {exc.value.step}"

        logger.info("✅ NumericalError raised with location")


class TestSymbolPosterior:
    """
    Test suite for the joint-symbol posterior and the SPA-MAP pass
    """

    def test_uniform_messages_are_ambiguous(self, bpsk):
        """
        Test Case 1: Phase ambiguity

        Verify BPSK beliefs are uniform when both phase messages are uniform
        """
        logger.info("=== Test Case 1: Uniform Messages ===")

        candidates = candidate_set(bpsk, 1)
        uniform = TikhonovMessageState.uniform(1, 1)
        log_pmf = joint_symbol_posterior(uniform, uniform, np.array([0.9 + 0.2j]), 0.5, candidates)
        np.testing.assert_allclose(np.exp(log_pmf), 0.5, atol=1e-12)

        logger.info("✅ Uniform messages leave BPSK ambiguous")

    def test_informed_message_resolves(self, bpsk):
        """
        Test Case 2: Informed phase message

        Verify a concentrated message at phase 0 decides the sign of the sample
        """
        logger.info("=== Test Case 2: Informed Message ===")

        candidates = candidate_set(bpsk, 1)
        informed = TikhonovMessageState(np.array([[50.0 + 0j]]), np.zeros((1, 1), dtype=complex))
        uniform = TikhonovMessageState.uniform(1, 1)
        log_pmf = joint_symbol_posterior(informed, uniform, np.array([0.9]), 0.5, candidates)
        assert np.exp(log_pmf[0]) > 0.99, f"P(+1) = {np.exp(log_pmf[0])}"

        literal = joint_symbol_posterior(informed, uniform, np.array([0.9]), 0.5, candidates, cross_term='literal')
        np.testing.assert_allclose(literal, log_pmf)

        logger.info("✅ Informed message resolves the symbol")

    def test_invalid_evaluation(self, bpsk):
        """
        Test Case 3: Invalid evaluation settings

        Verify an unknown cross-term mode and a zero N0 are rejected
        """
        logger.info("=== Test Case 3: Invalid Evaluation ===")

        candidates = candidate_set(bpsk, 1)
        uniform = TikhonovMessageState.uniform(1, 1)
        with pytest.raises(DomainError):
            joint_symbol_posterior(uniform, uniform, np.array([1.0]), 0.5, candidates, cross_term='halved')
        with pytest.raises(DomainError):
            joint_symbol_posterior(uniform, uniform, np.array([1.0]), 0.0, candidates)

        logger.info("✅ Invalid evaluation rejected")

    @pytest.mark.parametrize("gains", [
        [[1.0]],
        [[1.0], [0.5]],
        [[1.0, 0.5], [0.5, 1.0]],
    ], ids=['1x1', '2x1', '2x2'])
    def test_spa_map_high_snr(self, qpsk, gains):
        """
        Test Case 4: SPA-MAP at high SNR

        Verify hard decisions at N0 = 0.002 and 1 degree phase noise are error free
        """
        gains = np.asarray(gains, dtype=complex)
        n_tx, n_rx = gains.shape
        logger.info(f"=== Test Case 4: SPA-MAP {n_tx}x{n_rx} ===")

        rng = np.random.default_rng(17)
        sigma2 = math.radians(1.0) ** 2
        n0 = 0.002
        frame = build_frame(None, qpsk, PilotPattern.from_name('1/20'), 200, n_tx, rng=rng)
        trajectory = sample_phase_trajectories(200, n_tx, n_rx, sigma2, sigma2, rng)
        received = apply_channel(frame, trajectory, gains, n0, rng)
        candidates = candidate_set(qpsk, n_tx)
        priors = SymbolPriors.with_pilots(None, frame.pilot_mask, frame.symbol_indices, qpsk.size)

        beliefs = spa_map_run(received.samples, n0, priors, candidates, SpaParams(sigma2, sigma2), gains)
        decisions = beliefs.combine(priors.joint_log_prior(candidates)).hard_decisions()
        data = frame.data_positions
        errors = int(np.count_nonzero(decisions[data] != frame.symbol_indices[data]))
        assert errors == 0, f"{errors} symbol errors at high SNR"
        np.testing.assert_allclose(beliefs.pmf.sum(axis=1), 1.0)

        logger.info("✅ SPA-MAP error free at high SNR")

    def test_posterior_chunks_consistent(self, bpsk):
        """
        Test Case 5: Chunked evaluation

        Verify frame-wide log-weights agree with per-index evaluation
        """
        logger.info("=== Test Case 5: Chunked Posterior ===")

        rng = np.random.default_rng(23)
        frame = build_frame(None, bpsk, PilotPattern.from_name('1/20'), 300, 2, rng=rng)
        trajectory = sample_phase_trajectories(300, 2, 1, SIGMA2, SIGMA2, rng)
        received = apply_channel(frame, trajectory, unit_gains(2, 1), 0.1, rng)
        priors = SymbolPriors.with_pilots(None, frame.pilot_mask, frame.symbol_indices, 2)
        candidates = candidate_set(bpsk, 2)
        track = run_recursions(received.samples, prior_moments(priors, bpsk, 0.1, unit_gains(2, 1)), SIGMA2, SIGMA2)

        weights = posterior_log_weights(track, received.samples, 0.1, candidates)
        for k in (0, 137, 299):
            single = joint_symbol_posterior(track.forward(k), track.backward(k), received.samples[k], 0.1, candidates)
            np.testing.assert_allclose(single, weights[k] - np.logaddexp.reduce(weights[k]), atol=1e-10)

        logger.info("✅ Chunked posterior consistent")

    def test_overflow_rescale_keeps_decisions(self, qpsk):
        """
        Test Case 6: Overflow guard

        Verify parameters far above 1e8 are rescaled per index, stay finite and keep the hard decisions
        """
        logger.info("=== Test Case 6: Overflow Rescale ===")

        candidates = candidate_set(qpsk, 1)
        sent = np.array([0, 1, 2, 3, 2, 0])
        length = sent.size
        samples = qpsk.points[sent][:, None]
        reference = np.full((length, 1, 1), 1e6 + 0j)
        track = MessageTrack(
            reference, np.zeros((length, 1, 1), dtype=complex),
            np.zeros((length, 1, 1), dtype=complex), np.zeros((length, 1, 1), dtype=complex),
        )

        diagnostics = DetectorDiagnostics()
        weights = posterior_log_weights(track, samples, 1e-10, candidates, diagnostics=diagnostics)
        assert np.all(np.isfinite(weights)), "Rescaled log-weights must stay finite"
        assert diagnostics.overflow_rescales == length, f"Expected {length} rescaled indices"
        decisions = candidates.indices[np.argmax(weights, axis=1), 0]
        np.testing.assert_array_equal(decisions, sent)

        moderate = DetectorDiagnostics()
        posterior_log_weights(track, samples, 0.1, candidates, diagnostics=moderate)
        assert moderate.overflow_rescales == 0, "No rescale below the threshold"

        logger.info("✅ Overflow rescale keeps decisions")

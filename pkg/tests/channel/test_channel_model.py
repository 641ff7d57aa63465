"""
Channel Model Test Suite
Constellations, pilot layouts, Wiener phase paths, frame assembly and the
noisy MIMO channel
"""

import math

import numpy as np
import pytest
from loguru import logger

from phasenoise.channel import (
    Constellation,
    PilotPattern,
    PhaseTrajectory,
    apply_channel,
    build_frame,
    ebn0_to_n0,
    get_constellation,
    pilot_sequence,
    sample_phase_trajectories,
    unit_gains,
)
from phasenoise.errors import ConfigError, DomainError, FrameLayoutError

pytestmark = pytest.mark.channel


class TestConstellations:
    """
    Test suite for the signal sets and their Gray labels
    """

    @pytest.mark.smoke
    @pytest.mark.parametrize("name,size", [("bpsk", 2), ("qpsk", 4), ("16qam", 16)])
    def test_unit_energy(self, name, size):
        """
        Test Case 1: Unit average energy

        Verify every constellation has unit average energy and the expected size
        """
        logger.info(f"=== Test Case 1: Unit Energy ({name}) ===")

        constellation = get_constellation(name)
        assert constellation.size == size, f"Expected {size} points, got {constellation.size}"
        assert constellation.bits_per_symbol == int(math.log2(size)), "Bits per symbol mismatch"
        assert np.mean(constellation.energies) == pytest.approx(1.0), "Average energy must be 1"

        logger.info(f"✅ {constellation} has unit energy")

    @pytest.mark.parametrize("name", ["qpsk", "16qam"])
    def test_gray_labels(self, name):
        """
        Test Case 2: Gray labelling

        Verify nearest-neighbour points differ in exactly one bit
        """
        logger.info(f"=== Test Case 2: Gray Labels ({name}) ===")

        constellation = get_constellation(name)
        points = constellation.points
        distance = np.abs(points[:, None] - points[None, :])
        np.fill_diagonal(distance, np.inf)
        nearest = distance.min()
        labels = constellation.labels
        pairs = np.argwhere(np.isclose(distance, nearest))
        assert pairs.size, "No neighbour pairs found"
        for i, j in pairs:
            flips = int(np.sum(labels[i] != labels[j]))
            assert flips == 1, f"Neighbours {i} and {j} differ in {flips} bits"

        logger.info(f"✅ {len(pairs)} neighbour pairs are Gray labelled")

    def test_bit_mapping_consistent(self, qam16):
        """
        Test Case 3: Bits to indices

        Verify labels and the bit-to-index map agree for every point
        """
        logger.info("=== Test Case 3: Bit Mapping ===")

        indices = np.arange(qam16.size)
        np.testing.assert_array_equal(qam16.bits_to_indices(qam16.indices_to_bits(indices)), indices)
        assert list(get_constellation('bpsk').labels[:, 0]) == [0, 1], "BPSK +1 carries bit 0"

        logger.info("✅ Bit mapping consistent")

    def test_invalid_constellations(self):
        """
        Test Case 4: Invalid signal sets

        Verify non-power-of-two sizes, non-unit energy and unknown names are rejected
        """
        logger.info("=== Test Case 4: Invalid Constellations ===")

        with pytest.raises(DomainError):
            Constellation('three', np.array([1.0, -1.0, 1.0j]))
        with pytest.raises(DomainError):
            Constellation('loud', np.array([2.0, -2.0]))
        with pytest.raises(ConfigError):
            get_constellation('8psk')

        logger.info("✅ Invalid constellations rejected")


class TestPilotPatterns:
    """
    Test suite for pilot layouts and the fixed pilot sequence
    """

    def test_one_in_twenty_layout(self):
        """
        Test Case 1: '1/20' layout

        Verify a 10-symbol preamble followed by one pilot every 21 symbols
        """
        logger.info("=== Test Case 1: 1/20 Layout ===")

        pattern = PilotPattern.from_name('1/20')
        mask = pattern.mask(52)
        assert list(np.flatnonzero(mask)) == list(range(10)) + [30, 51], f"Pilot positions {np.flatnonzero(mask)}"
        assert pattern.density(52) == pytest.approx(mask.mean()), "Closed-form density mismatch"
        assert pattern.data_length_for(40) == 52, "40 data symbols need a 52-symbol frame"

        logger.info("✅ 1/20 layout correct")

    def test_burst_layout(self):
        """
        Test Case 2: '5/100' layout

        Verify bursts of five pilots close every 100-symbol cycle
        """
        logger.info("=== Test Case 2: 5/100 Layout ===")

        mask = PilotPattern.from_name('5/100').mask(220)
        assert list(np.flatnonzero(mask)) == list(range(10)) + list(range(105, 110)) + list(range(205, 210)), \
            "Burst positions mismatch"

        logger.info("✅ Burst layout correct")

    def test_degenerate_layouts(self):
        """
        Test Case 3: Preamble-only, none and all

        Verify the degenerate named layouts and their data capacity
        """
        logger.info("=== Test Case 3: Degenerate Layouts ===")

        assert PilotPattern.from_name('preamble-only').mask(100).sum() == 10, "Preamble-only has 10 pilots"
        assert not PilotPattern.from_name('none').mask(100).any(), "'none' has no pilots"
        everything = PilotPattern.from_name('all')
        assert everything.mask(100).all(), "'all' marks every symbol"
        assert everything.density(100) == 1.0, "'all' has density 1"
        with pytest.raises(FrameLayoutError):
            everything.data_length_for(10)

        logger.info("✅ Degenerate layouts correct")

    def test_invalid_layouts(self):
        """
        Test Case 4: Invalid layouts

        Verify inconsistent period and burst settings and unknown names are rejected
        """
        logger.info("=== Test Case 4: Invalid Layouts ===")

        with pytest.raises(ConfigError):
            PilotPattern(preamble_len=10, period=5, burst_len=5)
        with pytest.raises(ConfigError):
            PilotPattern(preamble_len=-1)
        with pytest.raises(ConfigError):
            PilotPattern.from_name('2/20')
        with pytest.raises(FrameLayoutError):
            PilotPattern().mask(0)
        assert PilotPattern.parse({'preamble_len': 4, 'period': 8, 'burst_len': 2}).mask(20).sum() == 8, \
            "A mapping must build a custom layout"

        logger.info("✅ Invalid layouts rejected")

    def test_pilot_sequence_fixed_and_full_rank(self, bpsk):
        """
        Test Case 5: Pilot sequence

        Verify the sequence depends only on its seed and the 2-antenna preamble has full rank
        """
        logger.info("=== Test Case 5: Pilot Sequence ===")

        first = pilot_sequence(bpsk, 30, 2, preamble_len=10, seed=99)
        second = pilot_sequence(bpsk, 30, 2, preamble_len=10, seed=99)
        np.testing.assert_array_equal(first, second)
        assert np.linalg.matrix_rank(bpsk.points[first[:10]]) == 2, "Preamble must have full column rank"

        logger.info("✅ Pilot sequence fixed and identifiable")


class TestPhaseNoise:
    """
    Test suite for Wiener phase trajectories
    """

    def test_increment_variance(self, rng):
        """
        Test Case 1: Increment statistics

        Verify the sample increment variance over 10^6 steps is within 1% of sigma^2 at 4 degrees
        """
        logger.info("=== Test Case 1: Increment Variance ===")

        sigma2 = math.radians(4.0) ** 2
        trajectory = sample_phase_trajectories(1_000_001, 1, 1, sigma2, sigma2, rng)
        for path in (trajectory.theta_t[:, 0], trajectory.theta_r[:, 0]):
            measured = np.var(np.diff(path))
            assert measured == pytest.approx(sigma2, rel=0.01), f"Variance {measured} vs {sigma2}"

        logger.info("✅ Increment variance matches")

    def test_shapes_and_initial_phase(self, rng):
        """
        Test Case 2: Shapes and initial phases

        Verify trajectory shapes, link-phase sums and uniform initial phases
        """
        logger.info("=== Test Case 2: Trajectory Shapes ===")

        trajectory = sample_phase_trajectories(50, 2, 3, 0.0, 0.0, rng)
        assert trajectory.theta_t.shape == (50, 2) and trajectory.theta_r.shape == (50, 3), "Path shapes"
        assert trajectory.link_phases.shape == (50, 2, 3), "Link phase shape"
        np.testing.assert_allclose(
            trajectory.link_phases[7, 1, 2], trajectory.theta_t[7, 1] + trajectory.theta_r[7, 2],
        )
        assert np.all(trajectory.theta_t[0] >= 0) and np.all(trajectory.theta_t[0] < 2 * math.pi), "Initial phase range"
        assert np.ptp(trajectory.theta_t, axis=0).max() == 0.0, "Zero variance must give constant paths"

        logger.info("✅ Trajectory shapes correct")

    def test_invalid_parameters(self, rng):
        """
        Test Case 3: Invalid parameters

        Verify negative variances and empty frames are rejected
        """
        logger.info("=== Test Case 3: Invalid Phase Parameters ===")

        with pytest.raises(DomainError):
            sample_phase_trajectories(10, 1, 1, -1e-3, 0.0, rng)
        with pytest.raises(DomainError):
            sample_phase_trajectories(0, 1, 1, 0.0, 0.0, rng)

        logger.info("✅ Invalid phase parameters rejected")


class TestFramesAndChannel:
    """
    Test suite for frame assembly, the channel model and the E_b/N_0 convention
    """

    def test_build_frame(self, bpsk, rng):
        """
        Test Case 1: Frame assembly

        Verify data symbols carry the payload and pilots carry the fixed sequence
        """
        logger.info("=== Test Case 1: Build Frame ===")

        pattern = PilotPattern.from_name('1/20')
        frame = build_frame(None, bpsk, pattern, 52, 2, rng=rng)
        assert frame.n_data == 40 and frame.bits.shape == (40, 2, 1), "Data capacity mismatch"
        np.testing.assert_array_equal(
            frame.symbol_indices[frame.data_positions], bpsk.bits_to_indices(frame.bits),
        )
        pilots = pilot_sequence(bpsk, 12, 2, pattern.preamble_len)
        np.testing.assert_array_equal(frame.symbol_indices[frame.pilot_mask], pilots)

        logger.info("✅ Frame assembled")

    def test_build_frame_errors(self, qpsk):
        """
        Test Case 2: Frame layout errors

        Verify a wrong bit count and a missing payload source are rejected
        """
        logger.info("=== Test Case 2: Frame Layout Errors ===")

        pattern = PilotPattern.from_name('preamble-only')
        with pytest.raises(FrameLayoutError):
            build_frame(np.zeros(7, dtype=np.uint8), qpsk, pattern, 20, 1)
        with pytest.raises(FrameLayoutError):
            build_frame(None, qpsk, pattern, 20, 1)

        logger.info("✅ Frame layout errors raised")

    def test_noiseless_channel(self, qpsk, rng):
        """
        Test Case 3: Noiseless channel

        Verify zero noise and zero phase reproduce sum of gain times symbol
        """
        logger.info("=== Test Case 3: Noiseless Channel ===")

        frame = build_frame(None, qpsk, PilotPattern.from_name('1/20'), 40, 2, rng=rng)
        gains = np.array([[1.0, 0.5j], [-0.3, 2.0]])
        received = apply_channel(frame, PhaseTrajectory.constant(40, 2, 2), gains, 0.0, rng)
        np.testing.assert_allclose(received.samples, frame.symbols @ gains, atol=1e-12)
        assert received.n_tx == 2 and received.n_rx == 2, "Dimensions mismatch"

        logger.info("✅ Noiseless channel exact")

    def test_noise_power(self, bpsk, rng):
        """
        Test Case 4: Noise power

        Verify the measured SNR matches the configured one within 0.05 dB
        """
        logger.info("=== Test Case 4: Noise Power ===")

        n0 = 0.2
        frame = build_frame(None, bpsk, PilotPattern.from_name('none'), 200_000, 1, rng=rng)
        trajectory = PhaseTrajectory.constant(frame.length, 1, 1)
        received = apply_channel(frame, trajectory, unit_gains(1, 1), n0, rng)
        noise = received.samples[:, 0] - frame.symbols[:, 0]
        error_db = 10.0 * math.log10(np.mean(np.abs(noise) ** 2) / n0)
        assert abs(error_db) < 0.05, f"Noise power off by {error_db:.3f} dB"

        logger.info(f"✅ Noise power within {abs(error_db):.4f} dB")

    def test_channel_dimension_errors(self, bpsk, rng):
        """
        Test Case 5: Channel dimension checks

        Verify mismatched gains and trajectories and negative N0 are rejected
        """
        logger.info("=== Test Case 5: Channel Dimension Errors ===")

        frame = build_frame(None, bpsk, PilotPattern.from_name('none'), 10, 2, rng=rng)
        trajectory = PhaseTrajectory.constant(10, 2, 1)
        with pytest.raises(FrameLayoutError):
            apply_channel(frame, trajectory, unit_gains(1, 1), 0.1, rng)
        with pytest.raises(FrameLayoutError):
            apply_channel(frame, PhaseTrajectory.constant(9, 2, 1), unit_gains(2, 1), 0.1, rng)
        with pytest.raises(DomainError):
            apply_channel(frame, trajectory, unit_gains(2, 1), -0.1, rng)

        logger.info("✅ Channel dimension errors raised")

    def test_ebn0_convention(self):
        """
        Test Case 6: E_b/N_0 to N_0

        Verify the conversion accounts for bits per symbol, code rate and pilot overhead
        """
        logger.info("=== Test Case 6: Eb/N0 Convention ===")

        assert ebn0_to_n0(0.0, 1) == pytest.approx(1.0), "BPSK at 0 dB"
        assert ebn0_to_n0(10.0, 2) == pytest.approx(0.05), "QPSK at 10 dB"
        assert ebn0_to_n0(0.0, 1, code_rate=0.5, data_fraction=0.8) == pytest.approx(2.5), "Rate and overhead"
        with pytest.raises(DomainError):
            ebn0_to_n0(0.0, 1, code_rate=0.0)

        logger.info("✅ Eb/N0 convention applied")

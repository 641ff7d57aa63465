"""
LDPC Test Suite
alist interchange, GF(2) encoding, sum-product decoding and seeded code
construction
"""

import numpy as np
import pytest
from loguru import logger

from phasenoise.coding import ldpc
from phasenoise.coding import (
    LdpcCode,
    ParityCheckMatrix,
    bp_decode,
    generate_regular_code,
    load_alist,
    load_code,
    parse_alist,
    serialize_alist,
)
from phasenoise.errors import AlistParseError, ConfigError, FrameLayoutError

pytestmark = pytest.mark.coding


class TestAlist:
    """
    Test suite for alist parsing and serialization
    """

    @pytest.mark.smoke
    def test_parse_hamming(self, hamming_alist):
        """
        Test Case 1: Parse a known matrix

        Verify the Hamming(7,4) file gives three weight-4 checks and dimension 4
        """
        logger.info("=== Test Case 1: Parse Hamming ===")

        matrix = load_alist(hamming_alist)
        assert (matrix.n, matrix.m) == (7, 3), f"Unexpected size {(matrix.n, matrix.m)}"
        np.testing.assert_array_equal(matrix.row_weights, [4, 4, 4])
        np.testing.assert_array_equal(matrix.col_weights, [1, 1, 2, 1, 2, 2, 3])
        assert matrix.rank() == 3, "Hamming checks are independent"
        assert matrix.k == 4, f"Expected k = 4, got {matrix.k}"

        logger.info("✅ Hamming matrix parsed")

    def test_serialize_round_trip(self, hamming_alist):
        """
        Test Case 2: Canonical text

        Verify serialization reproduces the canonical file exactly
        """
        logger.info("=== Test Case 2: Serialize ===")

        text = hamming_alist.read_text()
        matrix = parse_alist(text)
        assert serialize_alist(matrix) == text, "Serialized text differs from the file"
        assert ParityCheckMatrix.from_dense(matrix.dense()) == matrix, "Dense round trip"

        logger.info("✅ Text reproduced")

    def test_out_of_range_line(self, hamming_alist):
        """
        Test Case 3: Out-of-range index

        Verify the error names the line holding the bad index
        """
        logger.info("=== Test Case 3: Out-of-range Index ===")

        lines = hamming_alist.read_text().splitlines()
        lines[4] = "9 0 0"
        with pytest.raises(AlistParseError) as error:
            parse_alist("\n".join(lines) + "\n")
        assert error.value.line_number == 5, f"Reported line {error.value.line_number}"

        logger.info("✅ Line 5 reported")

    def test_truncated_file(self, hamming_alist):
        """
        Test Case 4: Truncation

        Verify a missing final row is reported one line past the end
        """
        logger.info("=== Test Case 4: Truncated File ===")

        lines = hamming_alist.read_text().splitlines()[:-1]
        with pytest.raises(AlistParseError) as error:
            parse_alist("\n".join(lines) + "\n")
        assert error.value.line_number == len(lines) + 1, f"Reported line {error.value.line_number}"

        with pytest.raises(AlistParseError):
            parse_alist("7 3\n3 4\n1 1 x 1 2 2 3\n")

        logger.info("✅ Truncation reported")

    def test_missing_file(self, tmp_path):
        """
        Test Case 5: Missing file

        Verify loading a nonexistent path is a configuration error
        """
        logger.info("=== Test Case 5: Missing File ===")

        with pytest.raises(ConfigError):
            load_alist(tmp_path / 'absent.alist')

        logger.info("✅ Missing file rejected")


class TestEncodingDecoding:
    """
    Test suite for encoding and belief-propagation decoding
    """

    def test_codewords_satisfy_checks(self, hamming_code):
        """
        Test Case 6: Encoding

        Verify every information word encodes to a zero-syndrome codeword carrying the info bits
        """
        logger.info("=== Test Case 6: Encoding ===")

        assert hamming_code.rate == pytest.approx(4 / 7), f"Rate {hamming_code.rate}"
        for word in range(16):
            info = np.array([(word >> shift) & 1 for shift in range(3, -1, -1)], dtype=np.uint8)
            codeword = hamming_code.encode(info)
            assert not np.any(hamming_code.matrix.syndrome(codeword)), f"Nonzero syndrome for {info}"
            np.testing.assert_array_equal(hamming_code.extract_info(codeword), info)
        with pytest.raises(FrameLayoutError):
            hamming_code.encode(np.zeros(5))

        logger.info("✅ All 16 codewords valid")

    def test_valid_input_returns_immediately(self, hamming_code):
        """
        Test Case 7: Valid input

        Verify a confident codeword decodes in zero iterations
        """
        logger.info("=== Test Case 7: Valid Input ===")

        codeword = hamming_code.encode(np.array([1, 0, 1, 1]))
        result = bp_decode(4.0 * (1.0 - 2.0 * codeword), hamming_code.matrix)
        assert result.converged and result.iterations == 0, f"Got {result}"
        np.testing.assert_array_equal(result.bits, codeword)
        np.testing.assert_allclose(result.extrinsic(4.0 * (1.0 - 2.0 * codeword)), 0.0)

        logger.info("✅ Zero iterations")

    @pytest.mark.parametrize("flipped", range(7))
    def test_single_error_corrected(self, hamming_code, flipped):
        """
        Test Case 8: Single weak error

        Verify one weakly wrong bit among confident bits is corrected
        """
        logger.info(f"=== Test Case 8: Flip bit {flipped} ===")

        codeword = hamming_code.encode(np.array([0, 1, 1, 0]))
        llrs = 6.0 * (1.0 - 2.0 * codeword)
        llrs[flipped] = -llrs[flipped] / 6.0
        result = bp_decode(llrs, hamming_code.matrix, max_iters=20)
        assert result.converged, f"No convergence after {result.iterations} iterations"
        np.testing.assert_array_equal(result.bits, codeword)
        assert np.all(np.abs(result.posterior_llrs) <= ldpc.LLR_CLAMP), "Posterior exceeds the clamp"

        logger.info(f"✅ Bit {flipped} corrected in {result.iterations} iteration(s)")

    def test_erasures_never_converge(self, hamming_code):
        """
        Test Case 9: All erasures

        Verify zero LLRs run to the iteration cap without converging
        """
        logger.info("=== Test Case 9: Erasures ===")

        result = bp_decode(np.zeros(7), hamming_code.matrix, max_iters=12)
        assert not result.converged, "Erasures cannot satisfy the checks"
        assert result.iterations == 12, f"Expected 12 iterations, got {result.iterations}"
        with pytest.raises(FrameLayoutError):
            bp_decode(np.zeros(6), hamming_code.matrix)

        logger.info("✅ Erasures handled")


class TestCodeConstruction:
    """
    Test suite for seeded regular codes and the code cache
    """

    def test_regular_code_is_seeded(self):
        """
        Test Case 10: Seeded construction

        Verify the same seed gives the same matrix and the column degrees are exact
        """
        logger.info("=== Test Case 10: Seeded Construction ===")

        first = generate_regular_code(96, 3, 6, seed=5)
        second = generate_regular_code(96, 3, 6, seed=5)
        other = generate_regular_code(96, 3, 6, seed=6)
        assert first == second, "Same seed must reproduce the matrix"
        assert first != other, "Different seeds should give different matrices"
        np.testing.assert_array_equal(first.col_weights, 3)
        assert first.m == 48 and int(first.row_weights.sum()) == 288, "Edge count"
        assert LdpcCode(first).k >= 48, "Dimension at least n - m"

        logger.info("✅ Construction reproducible")

    @pytest.mark.parametrize("n,dv,dc", [(96, 3, 3), (100, 3, 7)])
    def test_invalid_parameters(self, n, dv, dc):
        """
        Test Case 11: Invalid degrees

        Verify impossible degree combinations are rejected
        """
        logger.info(f"=== Test Case 11: Invalid ({n}, {dv}, {dc}) ===")

        with pytest.raises(ConfigError):
            generate_regular_code(n, dv, dc, seed=1)

        logger.info("✅ Parameters rejected")

    def test_code_cache(self, tmp_path, monkeypatch, hamming_alist):
        """
        Test Case 12: Code cache

        Verify standard codes are generated once, cached as alist and reloaded identically
        """
        logger.info("=== Test Case 12: Code Cache ===")

        monkeypatch.setitem(ldpc.STANDARD_CODES, 'regular-3-6-n96', (96, 3, 6, 9))
        generated = load_code('regular-3-6-n96', tmp_path)
        cached = tmp_path / 'regular-3-6-n96.alist'
        assert cached.exists(), "Generated code not cached"
        assert load_code('regular-3-6-n96', tmp_path) == generated, "Cached matrix differs"

        assert load_code(str(hamming_alist), tmp_path).n == 7, "Explicit alist path"
        with pytest.raises(ConfigError):
            load_code('regular-9-9-n1', tmp_path)

        logger.info("✅ Code cached and reloaded")

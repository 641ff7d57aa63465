"""
Oracle Self-Check Test Suite
Brute-force references against the fast numerical paths
"""

import inspect
import math

import pytest
from loguru import logger

from phasenoise.errors import ConfigError
from phasenoise.harness import ORACLES, OracleCheck, OracleReport, oracle_check
from phasenoise.harness.oracles import check_gaussmap_vs_grid, check_spa_vs_grid

pytestmark = [pytest.mark.harness, pytest.mark.oracle]

FAST_ORACLES = ['tikhonov-norm', 'i0-accuracy', 'utilde-residual', 'eks-vs-kalman', 'vb-vs-quadrature', 'smear-vs-grid']
GRID_ORACLES = ['spa-vs-grid', 'gaussmap-vs-grid']


class TestOracleChecks:
    """
    Test suite for the oracle registry and each self-check
    """

    @pytest.mark.smoke
    def test_registry(self):
        """
        Test Case 1: Oracle registry

        Verify every oracle is registered and unknown names are rejected
        """
        logger.info("=== Test Case 1: Oracle Registry ===")

        assert sorted(ORACLES) == sorted(FAST_ORACLES + GRID_ORACLES), f"Registered: {sorted(ORACLES)}"
        with pytest.raises(ConfigError):
            oracle_check('grid-everything')

        logger.info("✅ Registry complete")

    def test_check_semantics(self):
        """
        Test Case 2: Pass criteria

        Verify non-finite measurements fail and an empty report does not pass
        """
        logger.info("=== Test Case 2: Pass Criteria ===")

        assert OracleCheck('x', 1e-10, 1e-9).passed, "Within tolerance"
        assert not OracleCheck('x', math.nan, 1e-9).passed, "NaN never passes"
        assert not OracleCheck('x', 2e-9, 1e-9).passed, "Above tolerance"
        assert not OracleReport('empty').passed, "A report needs at least one check"
        report = OracleReport('one')
        report.add('x', 0.5, 1.0)
        assert report.passed and report.lines()[0] == '[PASS] one', report.lines()

        logger.info("✅ Pass criteria applied")

    @pytest.mark.parametrize("name", FAST_ORACLES)
    def test_fast_oracle(self, name):
        """
        Test Case 3: Fast oracles

        Verify each closed-form and quadrature oracle passes
        """
        logger.info(f"=== Test Case 3: {name} ===")

        report, = oracle_check(name, seed=0)
        assert report.passed, "\n".join(report.lines())

        logger.info(f"✅ {name} passed")

    @pytest.mark.slow
    @pytest.mark.parametrize("name", GRID_ORACLES)
    def test_grid_oracle(self, name, oracle_grid):
        """
        Test Case 4: Grid oracles

        Verify message passing and Gauss-MAP agree with brute-force grid integration on ten random frames or draws
        """
        logger.info(f"=== Test Case 4: {name} (grid {oracle_grid}) ===")

        report, = oracle_check(name, seed=0, grid_size=oracle_grid, trials=10)
        assert report.passed, "\n".join(report.lines())

        logger.info(f"✅ {name} passed")

    def test_trial_counts(self):
        """
        Test Case 5: Trial counts

        Verify the grid oracles default to 50 frames and 100 draws and that trials overrides them
        """
        logger.info("=== Test Case 5: Trial Counts ===")

        assert inspect.signature(check_spa_vs_grid).parameters['n_frames'].default == 50, "spa-vs-grid frames"
        assert inspect.signature(check_gaussmap_vs_grid).parameters['n_draws'].default == 100, "gaussmap-vs-grid draws"
        report, = oracle_check('utilde-residual', seed=1, trials=200)
        assert 'over 200 draws' in report.checks[0].quantity, report.checks[0].quantity

        logger.info("✅ Trial counts forwarded")

    def test_vb_linearization_gap(self):
        """
        Test Case 6: VB expectation

        Verify VB beliefs match the linearized expectation tightly and the exact phase expectation loosely
        """
        logger.info("=== Test Case 6: VB Linearization Gap ===")

        report, = oracle_check('vb-vs-quadrature', seed=3, trials=20)
        linearized, exact = report.checks
        assert 'linearized' in linearized.quantity and linearized.tolerance == 1e-3, linearized
        assert 'exact' in exact.quantity and exact.tolerance > linearized.tolerance, exact
        assert report.passed, "\n".join(report.lines())

        logger.info(f"✅ Linearization gap {exact.measured:.3e}")

# Test suites for the phase-noise link simulator

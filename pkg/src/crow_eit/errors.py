"""Exceptions and warnings raised by crow_eit."""


class DegenerateRootsWarning(RuntimeWarning):
    """Two eigenvalues nearly coincide; the iterative eigensolver was used instead."""


class BothCouplingsZero(ValueError):
    """The dark-state mixing angle is undefined when G1 = g2 = 0."""


class SingularSteadyState(ArithmeticError):
    """The steady-state denominator vanishes (undamped double resonance)."""


class NoWindowFound(ValueError):
    """No transparency dip could be located in a susceptibility scan."""


class StepSizeUnderflow(ArithmeticError):
    """Step halving did not reach the requested accuracy before the step became negligible."""


class ConfigError(ValueError):
    """Invalid run configuration."""

"""Exception hierarchy. The CLI maps each branch to its own exit status."""


class WaterSpinError(Exception):
    pass


class ConfigError(WaterSpinError, ValueError):
    """Malformed or inconsistent run configuration."""


class NumericalError(WaterSpinError, RuntimeError):
    """A numerical consistency check failed."""


class ClassificationError(NumericalError):
    """An eigenvector is not an eigenfunction of the D2 rotation operators."""


class KickIntegrationError(NumericalError):
    """Fixed-step kick integration drifted off the unit sphere."""


class ConvergenceError(NumericalError):
    """Basis-size ladder hit its cap before reaching the tolerance."""

"""Exception types shared across the package.

The CLI maps these onto its exit codes, so keep the hierarchy flat.
"""


class ConfigError(ValueError):
    """Invalid protocol, simulation or sweep configuration."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of a formula."""


class NumericalError(ArithmeticError):
    """A formula diverges or an iterative method failed to converge."""


class SolverError(NumericalError):
    """The fixed-point solver could not bracket or isolate a root."""


class StateSpaceError(ValueError):
    """The explicit transition matrix would exceed the state cap."""

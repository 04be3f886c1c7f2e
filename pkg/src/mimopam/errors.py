"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A scenario or sweep configuration violates a validity constraint."""


class InfeasibleError(ValueError):
    """A closed-form predictor was evaluated outside its feasible region."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its required tolerance."""


class DegenerateThresholdError(ValueError):
    """The box threshold sits on a decision-boundary lattice point where the
    asymptotic symbol-error expression is discontinuous."""

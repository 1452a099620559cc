"""Exception types shared across the package."""


class KerrCavityError(Exception):
    pass


class OutOfRangeError(KerrCavityError, ValueError):
    """A Fock level or index lies outside the truncated space."""


class ContractViolation(KerrCavityError, ValueError):
    """An input does not satisfy a documented precondition."""


class DimensionError(KerrCavityError, ValueError):
    """Objects built under different truncations were combined."""


class StabilityError(KerrCavityError, ValueError):
    """The fixed-step integrator was asked to take steps that are too large."""

    def __init__(self, message, required_steps):
        super().__init__(message)
        self.required_steps = required_steps


class MemoryGuardError(KerrCavityError, ValueError):
    pass


class UnsupportedStateError(KerrCavityError, ValueError):
    pass


class SolverError(KerrCavityError, RuntimeError):
    """Wraps a failure from one of the solvers, keeping the solver name."""

    def __init__(self, solver, cause):
        super().__init__(f"{solver}: {cause}")
        self.solver = solver
        self.cause = cause


class ConfigError(KerrCavityError, ValueError):
    """Invalid run configuration. ``field`` names the offending key if known."""

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line

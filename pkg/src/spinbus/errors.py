"""Exception hierarchy for the spinbus package.

Input/configuration problems and physics-constraint failures are kept on
separate branches so the CLI can map them to distinct exit codes.
"""


class SpinBusError(Exception):
    """Base class for all package errors."""


class InputError(SpinBusError):
    """Bad user input: malformed config, unknown keys, out-of-range values."""


class UnitError(InputError):
    """Arithmetic or construction mixing incompatible unit tags."""


class ParameterError(InputError):
    """Unknown parameter key or value outside its physical range."""


class DomainError(InputError):
    """Numeric argument outside the domain of a physics operation."""


class TableError(InputError):
    """Malformed cross-section table or wavelength outside its range."""


class UndefinedFidelityError(TableError):
    """Both cross-sections vanish at the requested wavelength."""


class DegenerateGeometryError(DomainError):
    """Hyperfine misalignment angle undefined (zero denominator)."""


class UnsupportedIsotopeError(DomainError):
    """Operation not defined for the requested donor isotope."""


class GridError(InputError):
    """Injector/capturer off the grid or grid too coarse for the setup."""


class TimelineError(InputError):
    """Structurally malformed protocol timeline."""


class ConstraintError(SpinBusError):
    """A physics constraint failed (distinct from bad input)."""


class CFLViolationError(ConstraintError):
    """Requested time step exceeds the stability limit."""


class NegativeDensityError(ConstraintError):
    """Scheme-bug guard: density fell below -1e-12."""


class GateTooSlowError(ConstraintError):
    """Dipolar coupling below the configured minimum for two-qubit gates."""

"""Exception and warning types shared across the package."""


class GridQecError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(GridQecError):
    """Operator/state dimensions are incompatible."""


class NotHermitian(GridQecError):
    """Operator expected to be Hermitian is not."""


class TruncationError(GridQecError):
    """Fock-space truncation too small for the requested object."""


class StepTooLarge(GridQecError):
    """Noise discretization step exceeds its validity range."""


class ZeroNormBranch(GridQecError):
    """All Kraus branches have vanishing probability."""


class ConfigMismatch(GridQecError):
    """Cycle configuration inconsistent with the requested operation."""


class PairingAmbiguous(GridQecError):
    """Eigenvalue degeneracy structure does not split into clean pairs."""


class OutOfRange(GridQecError):
    """Parameter outside its allowed range."""


class InvalidParams(GridQecError):
    """Parameter vector violates declared bounds."""


class Divergence(GridQecError):
    """Policy parameters diverged during training."""


class InsufficientData(GridQecError):
    """Dataset too small for the requested estimator."""


class FitFailure(GridQecError):
    """Fit did not converge or the model does not apply."""


class ZeroVariance(GridQecError):
    """A column with zero variance where variance is required."""


class NoLeakage(GridQecError):
    """No leakage outcomes present in the dataset."""


class EmptySelection(GridQecError):
    """Post-selection rejected every shot."""


class ConfigError(GridQecError):
    """Experiment configuration file invalid."""


class TruncationWarning(UserWarning):
    """State or operator support reaches into the untrusted Fock band."""

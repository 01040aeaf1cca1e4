"""Exception types shared across the package."""


class AnosovLabError(Exception):
    """Base class for all package errors."""


class ModelValidationError(AnosovLabError):
    """A flow model failed one of its build-time checks."""


class ConfigError(AnosovLabError):
    """A configuration file or value is malformed."""


class HorizonError(AnosovLabError):
    """A requested integration time exceeds the configured horizon."""


class StepSizeError(AnosovLabError):
    """A single integration step left the reachable neighbourhood of the
    fundamental polygon, which means the step size is too large."""


class RiccatiBlowupError(AnosovLabError):
    """The unstable Riccati solution left its positive trapping region;
    the model is most likely not Anosov."""


class InversionError(AnosovLabError):
    """Harmonic inversion was asked for more than the data can support."""

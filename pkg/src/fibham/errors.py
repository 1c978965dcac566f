"""Exception types raised by fibham."""


class FibhamError(Exception):
    """Base class for all library errors."""

    #: short machine-readable tag used in CLI error documents
    code = "error"


class NegativeInvariant(FibhamError, ValueError):
    """Point has Fricke-Vogt value below zero, so it lies on no surface S_V with real V."""

    code = "negative_invariant"


class ResolutionTooCoarse(FibhamError):
    """Two band edges could not be separated at the requested resolution."""

    code = "resolution_too_coarse"


class EmptyWindow(FibhamError):
    """An energy window contained no eigenvalues; system size too small for the scale."""

    code = "empty_window"


class ContinuationLost(FibhamError):
    """Periodic-orbit continuation left the basin of the root finder."""

    code = "continuation_lost"


class DegenerateSpectrum(FibhamError):
    """The two leading multipliers of an orbit are numerically indistinguishable."""

    code = "degenerate_spectrum"


class EmptyEnsemble(FibhamError):
    """No converged orbits were available for an ensemble average."""

    code = "empty_ensemble"


class InsufficientScales(FibhamError):
    """Too few stable box-counting scales for a regression."""

    code = "insufficient_scales"


class ConfigError(FibhamError, ValueError):
    """Experiment configuration failed validation."""

    code = "invalid_config"

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))

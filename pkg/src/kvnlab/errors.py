"""Exception types shared across the library."""


class KvnLabError(Exception):
    """Base class for all library errors."""


class InvalidParams(KvnLabError):
    """One or more system parameters violate their invariants.

    Carries the list of violated fields in ``violations``.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SingularInput(KvnLabError):
    """Evaluation requested at the potential singularity (r = 0 with eps = 0)."""


class StepSizeUnderflow(KvnLabError):
    """Adaptive step controller could not meet the tolerance."""


class GridTooCoarse(KvnLabError):
    """Grid cannot represent the state (spectral tail or boundary resolution)."""


class NotEnoughStates(KvnLabError):
    """Fewer bound states resolvable than requested."""


class EnsembleDegenerate(KvnLabError):
    """Capture-rejected weight of a characteristics ensemble exceeds its budget."""


class EnergyShellSingular(KvnLabError):
    """Phase-space point too close to the H = 0 shell for the closed form."""


class AsymptoticsNotReached(KvnLabError):
    """Outer radius too small to isolate the decaying branch."""


class QuadratureError(KvnLabError):
    """Quadrature failed to converge to the requested tolerance."""


class ConfigError(KvnLabError):
    """Scenario configuration is malformed (parse error or unknown key)."""

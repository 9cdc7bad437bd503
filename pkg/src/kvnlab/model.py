"""Shared domain types, units and regularization conventions.

Units are hbar = m = 1 throughout.  The potential is the attractive
inverse square V(r) = -g / (2 r^2), optionally smoothed by replacing
r^2 -> r^2 + eps^2.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParams, SingularInput

HBAR = 1.0


@dataclass(frozen=True)
class SystemParams:
    """Coupling and regularization parameters of the model.

    g        : coupling strength of V = -g/(2 r^2), must be positive
    dim      : spatial dimension, 1 or 3
    epsilon  : smooth regularization length (r^2 -> r^2 + epsilon^2), >= 0
    cutoff_a : quantum short-distance cutoff radius, > 0
    box_R    : outer box radius, > cutoff_a
    """

    g: float = 0.5
    dim: int = 3
    epsilon: float = 0.0
    cutoff_a: float = 0.01
    box_R: float = 50.0
    hbar: float = field(default=HBAR, repr=False)

    @property
    def strong_coupling(self) -> bool:
        """True when g > 1/4 (s-wave fall-to-center regime)."""
        return self.g > 0.25


@dataclass(frozen=True)
class PhasePoint:
    """Classical phase-space point (r, p) as length-dim arrays."""

    r: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))


@dataclass(frozen=True)
class DilationParams:
    """Finite dilation parameter alpha and the time origin for charges."""

    alpha: float
    t0: float = 0.0


@dataclass(frozen=True)
class ChargeRecord:
    """One row of a charge time series."""

    t: float
    energy: float
    dilation: float
    norm: float = 1.0
    stat_err: float = 0.0


def validate(params: SystemParams) -> SystemParams:
    """Return params unchanged if every invariant holds.

    Raises InvalidParams listing every violated field, not just the first.
    """
    bad = []
    if not np.isfinite(params.g) or params.g <= 0:
        bad.append(f"g must be > 0, got {params.g}")
    if params.dim not in (1, 3):
        bad.append(f"dim must be 1 or 3, got {params.dim}")
    if not np.isfinite(params.epsilon) or params.epsilon < 0:
        bad.append(f"epsilon must be >= 0, got {params.epsilon}")
    if not np.isfinite(params.cutoff_a) or params.cutoff_a <= 0:
        bad.append(f"cutoff_a must be > 0, got {params.cutoff_a}")
    if not np.isfinite(params.box_R) or params.box_R <= params.cutoff_a:
        bad.append(
            f"box_R must exceed cutoff_a, got box_R={params.box_R}, cutoff_a={params.cutoff_a}"
        )
    if params.hbar != HBAR:
        bad.append(f"hbar is fixed at 1, got {params.hbar}")
    if bad:
        raise InvalidParams(bad)
    return params


def with_overrides(params: SystemParams, **kw) -> SystemParams:
    """Copy params with selected fields replaced, then validate."""
    return validate(replace(params, **kw))


def regularized_potential(r, params: SystemParams) -> float:
    """V(r) = -g / (2 (|r|^2 + eps^2)); the bare potential when eps = 0."""
    r = np.asarray(r, dtype=float)
    r2 = float(np.dot(r.ravel(), r.ravel()))
    d = r2 + params.epsilon**2
    if d == 0.0:
        raise SingularInput("potential evaluated at the origin with epsilon = 0")
    return -params.g / (2.0 * d)

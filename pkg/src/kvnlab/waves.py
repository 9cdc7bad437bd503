"""Closed-form initial KvN waves on phase space.

Two separable families, both with unit L2 norm and analytic gradients:

* Gaussian wavepackets
      psi0(r, y) = N exp(-(r-rb)^2/4sr^2 - (y-yb)^2/4sy^2 + i(kr.r + ky.y))
* a singular radial profile (3D only)
      psi0(r, y) = c |r|^{-1/2} chi(|r|) h(y),   chi, h Gaussian, chi(0) = 1.

The second slot ``y`` is the ordinary momentum p for the characteristics
ensemble and the auxiliary lambda_p variable for pairings evaluated in the
(r, lambda_p) representation; the algebra is identical.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularInput


def _as_vec(v, dim):
    a = np.zeros(dim) + np.asarray(v, dtype=float)
    if a.shape != (dim,):
        raise ValueError(f"expected length-{dim} vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class GaussianWaveSpec:
    """Separable complex Gaussian on (r, y) phase space."""

    dim: int = 3
    r_center: np.ndarray = 0.0
    y_center: np.ndarray = 0.0
    sigma_r: float = 1.0
    sigma_y: float = 1.0
    phase_r: np.ndarray = 0.0     # plane-wave phase vector multiplying r
    phase_y: np.ndarray = 0.0     # plane-wave phase vector multiplying y

    def __post_init__(self):
        for name in ("r_center", "y_center", "phase_r", "phase_y"):
            object.__setattr__(self, name, _as_vec(getattr(self, name), self.dim))

    @property
    def norm_constant(self) -> float:
        return float(
            (2.0 * np.pi * self.sigma_r**2) ** (-self.dim / 4.0)
            * (2.0 * np.pi * self.sigma_y**2) ** (-self.dim / 4.0)
        )

    def value(self, r, y):
        r = np.asarray(r, dtype=float)
        y = np.asarray(y, dtype=float)
        dr = r - self.r_center
        dy = y - self.y_center
        expo = (
            -np.sum(dr * dr, axis=-1) / (4.0 * self.sigma_r**2)
            - np.sum(dy * dy, axis=-1) / (4.0 * self.sigma_y**2)
            + 1j * (r @ self.phase_r + y @ self.phase_y)
        )
        return self.norm_constant * np.exp(expo)

    def density(self, r, y):
        return np.abs(self.value(r, y)) ** 2

    def log_gradient(self, r, y):
        """(d/dr ln psi, d/dy ln psi), each shaped like its argument."""
        r = np.asarray(r, dtype=float)
        y = np.asarray(y, dtype=float)
        gr = -(r - self.r_center) / (2.0 * self.sigma_r**2) + 1j * self.phase_r
        gy = -(y - self.y_center) / (2.0 * self.sigma_y**2) + 1j * self.phase_y
        return gr, gy

    def sample(self, rng, n):
        """Draw n points from |psi0|^2 (independent Gaussians)."""
        r = self.r_center + self.sigma_r * rng.standard_normal((n, self.dim))
        y = self.y_center + self.sigma_y * rng.standard_normal((n, self.dim))
        return r, y


@dataclass(frozen=True)
class SingularWaveSpec:
    """c |r|^{-1/2} chi(|r|) h(y) with chi(r) = exp(-r^2/2w^2), 3D only.

    chi(0) = 1, so the pair (c, chi(0)) entering anomaly pairings is
    (norm_c, 1).  h is a normalized Gaussian in y.
    """

    w: float = 1.0
    sigma_y: float = 1.0
    y_center: np.ndarray = 0.0
    dim: int = field(default=3, init=False)

    def __post_init__(self):
        object.__setattr__(self, "y_center", _as_vec(self.y_center, 3))

    @property
    def norm_c(self) -> float:
        # int |psi|^2 d3r = 4 pi c^2 int r chi^2 dr = 2 pi c^2 w^2
        return float(1.0 / np.sqrt(2.0 * np.pi * self.w**2))

    @property
    def chi0(self) -> float:
        return 1.0

    def chi(self, rad):
        return np.exp(-np.asarray(rad, dtype=float) ** 2 / (2.0 * self.w**2))

    def value(self, r, y):
        r = np.asarray(r, dtype=float)
        y = np.asarray(y, dtype=float)
        rad = np.sqrt(np.sum(r * r, axis=-1))
        if np.any(rad == 0.0):
            raise SingularInput("singular profile evaluated at r = 0")
        hy = (2.0 * np.pi * self.sigma_y**2) ** (-3.0 / 4.0) * np.exp(
            -np.sum((y - self.y_center) ** 2, axis=-1) / (4.0 * self.sigma_y**2)
        )
        return self.norm_c * self.chi(rad) / np.sqrt(rad) * hy

    def density(self, r, y):
        return np.abs(self.value(r, y)) ** 2

    def log_gradient(self, r, y):
        r = np.asarray(r, dtype=float)
        y = np.asarray(y, dtype=float)
        rad2 = np.sum(r * r, axis=-1, keepdims=True)
        if np.any(rad2 == 0.0):
            raise SingularInput("singular profile gradient at r = 0")
        gr = -r / (2.0 * rad2) - r / self.w**2
        gy = -(y - self.y_center) / (2.0 * self.sigma_y**2)
        return gr, gy

    def sample(self, rng, n):
        # radial density prop. to r chi^2(r): inverse-transform closed form
        u = rng.random(n)
        rad = self.w * np.sqrt(-np.log1p(-u))
        v = rng.standard_normal((n, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        r = rad[:, None] * v
        y = self.y_center + self.sigma_y * rng.standard_normal((n, 3))
        return r, y


def gradient_selftest(spec, rng, n_probe: int = 20, step: float = 1e-6) -> float:
    """Max abs deviation of analytic log-gradients from central differences."""
    r, y = spec.sample(rng, n_probe)
    gr, gy = spec.log_gradient(r, y)
    worst = 0.0
    for slot in range(2):
        for i in range(spec.dim if slot == 0 else y.shape[1]):
            rp, rm = r.copy(), r.copy()
            yp, ym = y.copy(), y.copy()
            if slot == 0:
                rp[:, i] += step
                rm[:, i] -= step
            else:
                yp[:, i] += step
                ym[:, i] -= step
            num = (np.log(spec.value(rp, yp)) - np.log(spec.value(rm, ym))) / (2 * step)
            ana = gr[:, i] if slot == 0 else gy[:, i]
            worst = max(worst, float(np.max(np.abs(num - ana))))
    return worst

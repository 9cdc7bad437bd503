"""Regularized quantum radial dynamics for V = -g/(2 r^2), s-wave.

The reduced wavefunction u = r psi lives on a log-spaced grid over
[a, R] with Dirichlet walls at both ends (the hard cutoff a is what makes
the strong-coupling Hamiltonian self-adjoint here, at the price of a
geometric bound tower and a dilation-charge drift: the anomaly).

In s = ln r with u = e^{s/2} v the eigenproblem becomes

    -(1/2) v'' + (1/8 - g/2) v = E e^{2s} v,

discretized by the compact (4th order) Numerov scheme: A v = E M W v with

    A = -(6/h^2) K + ((1/4 - g)/2) M,   K = tridiag(1,-2,1),
    M = K + 12 I,                        W = diag(e^{2s}) = diag(r^2).

K and M commute, so H_eff = W^{-1/2} M^{-1} A W^{-1/2} is symmetric: the
discretization is Hermitian in the measure-absorbed variable y = sqrt(r) u
(plain l2 norm, h sum|y|^2 = int |u|^2 dr).  Crank-Nicolson on y is a
Cayley transform of a Hermitian matrix, unitary to round-off, and reduces
to tridiagonal solves

    (M W + i dt/2 A) v_{n+1} = (M W - i dt/2 A) v_n.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import GridTooCoarse, NotEnoughStates
from .model import ChargeRecord, SystemParams


@dataclass(frozen=True)
class RadialGrid:
    """Interior log-spaced nodes of [a, R]; Dirichlet values at a, R implied."""

    a: float
    R: float
    n: int

    def __post_init__(self):
        if not (0 < self.a < self.R):
            raise ValueError("need 0 < a < R")
        if self.n < 8:
            raise ValueError("grid too small")

    @property
    def h(self) -> float:
        return (np.log(self.R) - np.log(self.a)) / (self.n + 1)

    @property
    def s(self) -> np.ndarray:
        return np.log(self.a) + self.h * (1.0 + np.arange(self.n))

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.s)


@dataclass
class RadialWavefunction:
    """u = r psi on the interior nodes; u(a) = u(R) = 0 by construction."""

    grid: RadialGrid
    u: np.ndarray
    t: float = 0.0

    @property
    def y(self) -> np.ndarray:
        """Measure-absorbed amplitudes sqrt(r) u; h sum |y|^2 = int |u|^2 dr."""
        return np.sqrt(self.grid.r) * self.u

    def norm2(self) -> float:
        return float(self.grid.h * np.sum(np.abs(self.y) ** 2))

    def normalized(self) -> "RadialWavefunction":
        return RadialWavefunction(self.grid, self.u / np.sqrt(self.norm2()), self.t)

    def boundary_resolution_defect(self) -> float:
        """Sawtooth content of y near the inner wall; large => under-resolved."""
        y = self.y
        seg = y[: min(32, y.size)]
        curv = np.abs(seg[2:] - 2.0 * seg[1:-1] + seg[:-2])
        return float(np.max(curv) / (4.0 * np.max(np.abs(y)) + 1e-300))


def _numerov_mats(grid: RadialGrid, g: float):
    """Banded (ab-form) K, M and A = -(6/h^2) K + ((1/4-g)/2) M."""
    n, h = grid.n, grid.h
    K = np.zeros((3, n))
    K[0, 1:] = 1.0
    K[1, :] = -2.0
    K[2, :-1] = 1.0
    M = K.copy()
    M[1, :] += 12.0
    A = -(6.0 / h**2) * K + 0.5 * (0.25 - g) * M
    return K, M, A


def _banded_mul(ab, v):
    """Tridiagonal (ab-form) matrix times vector."""
    out = ab[1] * v
    out[:-1] = out[:-1] + ab[0, 1:] * v[1:]
    out[1:] = out[1:] + ab[2, :-1] * v[:-1]
    return out


def radial_apply(wave: RadialWavefunction, params: SystemParams,
                 check_resolution: bool = True) -> RadialWavefunction:
    """H u = -(1/2)u'' - (g/2r^2)u via the compact Numerov operators.

    In v = u/sqrt(r):  (H u) = r^{-3/2} M^{-1} A v  (sampled as a u-array).
    """
    if check_resolution and wave.boundary_resolution_defect() > 0.5:
        raise GridTooCoarse("wave under-resolved near the inner cutoff")
    grid = wave.grid
    _, M, A = _numerov_mats(grid, params.g)
    r = grid.r
    v = wave.u / np.sqrt(r)
    MiAv = solve_banded((1, 1), M, _banded_mul(A, v))
    return RadialWavefunction(grid, MiAv / r**1.5, wave.t)


def dense_heff(grid: RadialGrid, g: float) -> np.ndarray:
    """Dense H_eff = W^{-1/2} M^{-1} A W^{-1/2} acting on y = sqrt(r) u."""
    _, M, A = _numerov_mats(grid, g)
    n = grid.n
    Adense = np.zeros((n, n))
    idx = np.arange(n)
    Adense[idx, idx] = A[1]
    Adense[idx[:-1], idx[1:]] = A[0, 1:]
    Adense[idx[1:], idx[:-1]] = A[2, :-1]
    MiA = solve_banded((1, 1), M, Adense)
    rinv = 1.0 / grid.r
    return rinv[:, None] * MiA * rinv[None, :]


def hamiltonian_expectation(wave: RadialWavefunction, params: SystemParams) -> float:
    Hu = radial_apply(wave, params, check_resolution=False)
    return float(np.real(wave.grid.h * np.sum(np.conj(wave.y) * Hu.y)))


# ---------------------------------------------------------------------------
# Bound spectrum by Numerov shooting + node-count bisection.
# ---------------------------------------------------------------------------

def _shoot_nodes(E: float, g: float, grid: RadialGrid) -> int:
    """Interior node count of the Numerov shot of v'' = f v from the inner wall.

    f = (1/4 - g) - 2 E e^{2s}.  Once f > 0 and |v| grows monotonically no
    further sign change is possible (v'' has the sign of v), so the march
    stops early; this keeps deep-energy scans stable and fast.
    """
    n, h = grid.n + 1, grid.h
    s = np.log(grid.a) + h * np.arange(n + 1)
    f = (0.25 - g) - 2.0 * E * np.exp(2.0 * s)
    w = (h * h / 12.0) * f
    v0, v1 = 0.0, h
    nodes = 0
    for j in range(1, n):
        v2 = ((2.0 + 10.0 * w[j]) * v1 - (1.0 - w[j - 1]) * v0) / (1.0 - w[j + 1])
        if v2 != 0.0 and v1 != 0.0 and (v2 > 0) != (v1 > 0):
            nodes += 1
        if f[j + 1] > 0.0 and ((v2 > v1 > 0.0) or (v2 < v1 < 0.0)):
            return nodes
        if abs(v2) > 1e250:
            v1 *= 1e-200
            v2 *= 1e-200
        v0, v1 = v1, v2
    return nodes


def _bisect_eigenvalue(k: int, g: float, grid: RadialGrid, E_lo: float, E_hi: float,
                       max_iter: int = 240) -> float:
    """Pinch the k-th (deepest-first) eigenvalue by node-count bisection."""
    lo, hi = E_lo, E_hi
    for _ in range(max_iter):
        # geometric midpoint while the bracket spans magnitudes, arithmetic after
        mid = -np.sqrt(lo * hi) if (hi < 0 and lo / hi > 4.0) else 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        if _shoot_nodes(mid, g, grid) >= k + 1:
            hi = mid
        else:
            lo = mid
        if abs(hi - lo) <= 1e-15 * min(abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BoundStateTower:
    """Negative-energy spectrum on [a, R], deepest first (E0 < E1 < ... < 0)."""

    params: SystemParams
    energies: np.ndarray
    residuals: np.ndarray
    grid: RadialGrid

    def adjacent_ratios(self) -> np.ndarray:
        return self.energies[1:] / self.energies[:-1]


def eigenstate(grid: RadialGrid, g: float, E: float, sweeps: int = 3) -> RadialWavefunction:
    """Eigenvector by inverse iteration on the (A - E M W) pencil."""
    _, M, A = _numerov_mats(grid, g)
    w = grid.r**2
    # banded product (M W)[i, j] = M[i, j] w[j]: scale each band by column index
    MW = np.zeros_like(M)
    MW[0, 1:] = M[0, 1:] * w[1:]
    MW[1, :] = M[1, :] * w
    MW[2, :-1] = M[2, :-1] * w[:-1]
    shifted = A - E * MW
    rng = np.random.Generator(np.random.Philox(1234))
    v = rng.standard_normal(grid.n)
    for _ in range(sweeps):
        v = solve_banded((1, 1), shifted, _banded_mul(MW, v))
        v /= np.linalg.norm(v)
    u = np.sqrt(grid.r) * v
    return RadialWavefunction(grid, u).normalized()


def bound_spectrum(params: SystemParams, n_states: int, n_grid: int = 3000) -> BoundStateTower:
    """Shooting + bisection spectrum of the cutoff problem on [a, R].

    Counts all negative-energy states first; raises NotEnoughStates when
    fewer than n_states exist on this grid.  Of the available tower the
    n_states least-negative members are returned, deepest first.
    """
    grid = RadialGrid(params.cutoff_a, params.box_R, n_grid)
    g = params.g
    E_floor = -0.5 * g / params.cutoff_a**2    # below min of the effective potential
    E_top = -1e-300
    m = _shoot_nodes(E_top, g, grid)
    if m < n_states:
        raise NotEnoughStates(f"only {m} bound states resolvable, asked for {n_states}")
    first = m - n_states
    energies = []
    for k in range(first, m):
        energies.append(_bisect_eigenvalue(k, g, grid, E_floor, E_top))
    energies = np.array(energies)
    residuals = []
    for E in energies:
        wave = eigenstate(grid, g, E)
        Hu = radial_apply(wave, params, check_resolution=False)
        res = np.sqrt(grid.h) * np.linalg.norm(Hu.y - E * wave.y) / abs(E)
        residuals.append(float(res))
    return BoundStateTower(params=params, energies=energies,
                           residuals=np.array(residuals), grid=grid)


# ---------------------------------------------------------------------------
# Unitary time evolution and dilation-charge diagnostics.
# ---------------------------------------------------------------------------

def _d1_spectral_apply(grid: RadialGrid, y: np.ndarray) -> np.ndarray:
    """Antisymmetrized spectral d/ds on the Dirichlet interval.

    Sine-interpolant derivative via odd extension onto a periodic grid of
    size 2(n+1), explicitly antisymmetrized, (A - A^dagger)/2: exactly
    skew-Hermitian by construction (so charge expectations are exactly
    real) and spectrally accurate on wall-vanishing states.
    """
    n = grid.n
    m = 2 * (n + 1)
    k = 2.0 * np.pi * np.fft.fftfreq(m, d=grid.h)

    def dper(ext):
        return np.fft.ifft(1j * k * np.fft.fft(ext))

    odd = np.zeros(m, dtype=complex)
    odd[1 : n + 1] = y
    odd[n + 2 :] = -y[::-1]
    fwd = dper(odd)[1 : n + 1]                      # A y = P D E y
    zero = np.zeros(m, dtype=complex)
    zero[1 : n + 1] = y
    dz = dper(zero)
    adj = dz[1 : n + 1] - dz[n + 2 :][::-1]         # -A^dagger y = E^dagger D E0 y
    return 0.5 * (fwd + adj)


def dilation_expectation(wave: RadialWavefunction, t: float, params: SystemParams) -> float:
    """<D> = t <H> + <(i/4)(2 r d/dr + 1)> = t <H> + (i/2) <y| d/ds |y>.

    The antisymmetrized spectral d/ds makes the charge term exactly real
    (the operator is the symmetrized dilation generator); a guard asserts
    the discarded imaginary part is at round-off anyway.
    """
    y = wave.y.astype(complex)
    h = wave.grid.h
    charge = 0.5j * h * np.vdot(y, _d1_spectral_apply(wave.grid, y))
    if abs(charge.imag) > 1e-8 * max(1.0, abs(charge.real)):
        raise AssertionError("dilation charge developed an imaginary part")
    return t * hamiltonian_expectation(wave, params) + float(charge.real)


def evolve_wavepacket(
    wave: RadialWavefunction,
    params: SystemParams,
    dt: float,
    T: float,
    n_out: int = 21,
):
    """Crank-Nicolson evolution; returns (final wave, [ChargeRecord]).

    Unconditionally unitary on the Hermitian discretization; dt must still
    resolve the occupied energies, guarded here by the packet's own energy
    expectation: dt * (|<H>| + 1) < 0.1.
    """
    Escale = abs(hamiltonian_expectation(wave, params)) + 1.0
    if dt * Escale >= 0.1:
        raise ValueError(f"dt too large for the packet energy scale {Escale:.3g}")
    grid = wave.grid
    _, M, A = _numerov_mats(grid, params.g)
    w = grid.r**2
    MW = np.zeros_like(M)
    MW[0, 1:] = M[0, 1:] * w[1:]
    MW[1, :] = M[1, :] * w
    MW[2, :-1] = M[2, :-1] * w[:-1]
    plus = MW + 0.5j * dt * A
    minus = MW - 0.5j * dt * A

    n_steps = int(round(T / dt))
    out_every = max(1, n_steps // max(1, n_out - 1))
    r = grid.r
    v = (wave.u / np.sqrt(r)).astype(complex)

    def snapshot(vc, t):
        wv = RadialWavefunction(grid, np.sqrt(r) * vc, t)
        H = hamiltonian_expectation(wv, params)
        D = dilation_expectation(wv, t, params)
        return wv, ChargeRecord(t=t, energy=H, dilation=D, norm=wv.norm2())

    wv, rec = snapshot(v, wave.t)
    records = [rec]
    for j in range(n_steps):
        v = solve_banded((1, 1), plus, _banded_mul(minus, v))
        if (j + 1) % out_every == 0 or (j + 1) == n_steps:
            wv, rec = snapshot(v, wave.t + (j + 1) * dt)
            if wv.boundary_resolution_defect() > 0.5:
                raise GridTooCoarse(f"under-resolved near cutoff at t={rec.t:.4f}")
            records.append(rec)
    return wv, records


def anomaly_rate(records) -> tuple:
    """(drift, conservation_floor) from a charge series.

    drift is the least-squares slope of <D>(t); the floor converts the
    measured non-conservation of the control quantities (norm, <H>) into
    the same units: slope_H * T_span and slope_norm * max|D|.
    """
    if len(records) < 10:
        raise ValueError("need at least 10 output times")
    t = np.array([r.t for r in records])
    D = np.array([r.dilation for r in records])
    H = np.array([r.energy for r in records])
    N = np.array([r.norm for r in records])
    T_span = t[-1] - t[0]

    def slope(ys):
        tt = t - t.mean()
        return float(np.dot(tt, ys - ys.mean()) / np.dot(tt, tt))

    drift = slope(D)
    floor = max(
        abs(slope(H)) * T_span,
        abs(slope(N)) * max(1.0, float(np.max(np.abs(D)))),
        1e-14 * max(1.0, float(np.max(np.abs(D)))) / max(T_span, 1e-300),
    )
    return drift, floor


# ---------------------------------------------------------------------------
# Packet construction helpers.
# ---------------------------------------------------------------------------

def singular_packet(grid: RadialGrid, width: float, k_phase: float = 0.0,
                    damp_power: float = 2.0) -> RadialWavefunction:
    """u = N r^{1/2} (1 - (a/r)^damp) exp(-r^2/2w^2 + i k r).

    The r^{1/2} envelope is the reduced form of a |psi| ~ r^{-1/2} inner
    profile; the damping factor enforces the Dirichlet wall smoothly.
    """
    r = grid.r
    u = (
        np.sqrt(r)
        * (1.0 - (grid.a / r) ** damp_power)
        * np.exp(-(r**2) / (2.0 * width**2) + 1j * k_phase * r)
    )
    return RadialWavefunction(grid, u).normalized()


def gaussian_packet(grid: RadialGrid, center: float, width: float,
                    k_phase: float = 0.0) -> RadialWavefunction:
    """Boundary-safe radial Gaussian packet u ~ exp(-(r-c)^2/4w^2 + i k r)."""
    r = grid.r
    u = np.exp(-((r - center) ** 2) / (4.0 * width**2) + 1j * k_phase * r)
    return RadialWavefunction(grid, u.astype(complex)).normalized()

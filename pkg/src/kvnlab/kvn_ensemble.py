"""Characteristics-ensemble backend for KvN evolution in three dimensions.

The Liouvillian is first order, so psi(z, t) = psi0(Phi_{-t} z) exactly.
Samples are drawn from |psi0|^2 and pushed forward along the classical
flow together with their tangent frames; gradients of psi at the flowed
point follow from the chain rule

    grad psi(z, t)|_{z = Phi_t z0} = J^{-T} grad psi0(z0),

with J the flow Jacobian.  Because the Liouville measure is preserved,
the per-sample importance ratio is identically one and expectations are
plain sample means with reported standard errors.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classical import integrate_characteristics
from .errors import EnsembleDegenerate
from .model import SystemParams

REJECTED_BUDGET = 1e-3


def thread_count() -> int:
    """Parallelism cap from KVNLAB_THREADS (0 or unset = auto)."""
    raw = os.environ.get("KVNLAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(4, os.cpu_count() or 1)
    return max(1, n)


@dataclass
class KvnEnsembleState:
    """Flowed sample ensemble; weights are uniform 1/N at draw time."""

    spec: object
    params: SystemParams
    t: float
    z0: np.ndarray            # (N, 6) initial draws
    y: np.ndarray             # (N, 42) current [r, p, J.ravel()]
    alive: np.ndarray         # (N,) retained samples
    dt: np.ndarray            # (N,) per-sample step memory
    seed: int
    rejected_budget: float = REJECTED_BUDGET
    rtol: float = 1e-8
    atol: float = 1e-10
    r_min: float = 1e-3
    _stats: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return self.z0.shape[0]

    @property
    def rejected_weight(self) -> float:
        return float(np.sum(~self.alive)) / self.n_samples

    def require_usable(self):
        if self.rejected_weight > self.rejected_budget:
            raise EnsembleDegenerate(
                f"rejected weight {self.rejected_weight:.2e} exceeds "
                f"budget {self.rejected_budget:.0e}"
            )


def evolve_ensemble(
    spec,
    params: SystemParams,
    n_samples: int,
    t: float,
    seed: int = 0,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    r_min: float = 1e-3,
    rejected_budget: float = REJECTED_BUDGET,
) -> KvnEnsembleState:
    """Draw z0 ~ |psi0|^2 (Philox counter RNG) and flow to time t."""
    if params.dim != 3:
        raise ValueError("ensemble backend is d = 3 only")
    if n_samples < 1000:
        raise ValueError("ensemble needs at least 1e3 samples")
    rng = np.random.Generator(np.random.Philox(seed))
    r0, p0 = spec.sample(rng, n_samples)
    y = np.empty((n_samples, 42))
    y[:, 0:3] = r0
    y[:, 3:6] = p0
    y[:, 6:] = np.eye(6).ravel()
    state = KvnEnsembleState(
        spec=spec,
        params=params,
        t=0.0,
        z0=y[:, 0:6].copy(),
        y=y,
        alive=np.ones(n_samples, dtype=bool),
        dt=np.full(n_samples, 1e-2),
        seed=seed,
        rejected_budget=rejected_budget,
        rtol=rtol,
        atol=atol,
        r_min=r_min,
    )
    if t != 0.0:
        advance_to(state, t)
    state.require_usable()
    return state


def advance_to(state: KvnEnsembleState, t1: float):
    """Advance the ensemble in place to time t1 > state.t.

    Chunked across threads when KVNLAB_THREADS allows; per-sample results
    are independent of the chunking, so output is deterministic.
    """
    if t1 < state.t:
        raise ValueError("ensemble can only advance forward in time")
    if t1 == state.t:
        return state
    nthreads = thread_count()
    N = state.n_samples
    if nthreads == 1 or N < 4096:
        state.dt, state.alive = integrate_characteristics(
            state.y, state.t, t1, state.params,
            rtol=state.rtol, atol=state.atol, r_min=state.r_min,
            dt=state.dt, alive=state.alive,
        )
    else:
        bounds = np.linspace(0, N, nthreads + 1).astype(int)

        def work(i):
            lo, hi = bounds[i], bounds[i + 1]
            return integrate_characteristics(
                state.y[lo:hi], state.t, t1, state.params,
                rtol=state.rtol, atol=state.atol, r_min=state.r_min,
                dt=state.dt[lo:hi], alive=state.alive[lo:hi],
            )

        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            results = list(ex.map(work, range(nthreads)))
        for i, (dt_c, alive_c) in enumerate(results):
            lo, hi = bounds[i], bounds[i + 1]
            state.dt[lo:hi] = dt_c
            state.alive[lo:hi] = alive_c
    state.t = t1
    return state


def _flowed_log_gradients(state: KvnEnsembleState):
    """J^{-T} grad(ln psi0)(z0) for retained samples, split (gr, gp)."""
    a = state.alive
    gr0, gp0 = state.spec.log_gradient(state.z0[a, 0:3], state.z0[a, 3:6])
    G0 = np.concatenate([gr0, gp0], axis=1)[..., None]
    J = state.y[a, 6:].reshape(-1, 6, 6)
    Gz = np.linalg.solve(np.transpose(J, (0, 2, 1)), G0)[..., 0]
    return Gz[:, 0:3], Gz[:, 3:6]


def _mean_err(f):
    return float(np.mean(f)), float(np.std(f, ddof=1) / np.sqrt(f.size))


def hamiltonian_expectation(state: KvnEnsembleState):
    """(<H_kvn>, stat_err): Liouvillian expectation via log-gradients."""
    state.require_usable()
    a = state.alive
    r = state.y[a, 0:3]
    p = state.y[a, 3:6]
    gr, gp = _flowed_log_gradients(state)
    d = np.einsum("ni,ni->n", r, r) + state.params.epsilon**2
    Vr = state.params.g * r / d[:, None] ** 2
    f = np.real(-1j * np.einsum("ni,ni->n", p, gr) + 1j * np.einsum("ni,ni->n", Vr, gp))
    return _mean_err(f)


def dilation_expectation(state: KvnEnsembleState):
    """(<D_kvn>, stat_err) at the ensemble's current time.

    <D> = t <H> + (1/2) < -i p.d_p + i r.d_r >; both pieces evaluated on
    the same samples, so errors are combined on the summed estimator.
    """
    state.require_usable()
    a = state.alive
    r = state.y[a, 0:3]
    p = state.y[a, 3:6]
    gr, gp = _flowed_log_gradients(state)
    d = np.einsum("ni,ni->n", r, r) + state.params.epsilon**2
    Vr = state.params.g * r / d[:, None] ** 2
    fH = np.real(-1j * np.einsum("ni,ni->n", p, gr) + 1j * np.einsum("ni,ni->n", Vr, gp))
    fG = 0.5 * np.real(-1j * np.einsum("ni,ni->n", p, gp) + 1j * np.einsum("ni,ni->n", r, gr))
    return _mean_err(state.t * fH + fG)


def moment_expectation(state: KvnEnsembleState, fn):
    """(mean, stat_err) of a multiplication observable fn(r, p)."""
    state.require_usable()
    a = state.alive
    f = np.asarray(fn(state.y[a, 0:3], state.y[a, 3:6]), dtype=float)
    return _mean_err(f)

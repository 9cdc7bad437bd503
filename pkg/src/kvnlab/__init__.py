"""kvnlab: scale symmetry of the inverse-square potential, classical vs quantum.

Library layout:

* ``model``           shared parameters, potential, validation
* ``classical``       Hamiltonian trajectories, dilation charge, action scaling
* ``waves``           closed-form phase-space wave families
* ``kvn_grid``        d = 1 Liouvillian grid backend (split-step spectral)
* ``kvn_ensemble``    d = 3 characteristics-ensemble backend
* ``kvn_anomaly``     KvN anomaly density / pairing, angular integral
* ``identities``      dilation-commutator operator identity checks
* ``quantum``         radial cutoff dynamics, bound towers, charge drift
* ``quantum_anomaly`` regularized delta pairing and its closed-form limit
* ``selfadjoint``     deficiency-index probes on both sides
* ``scenarios``       reproducible experiment runner behind the CLI
"""

__version__ = "0.1.0"

from .errors import (
    AsymptoticsNotReached,
    ConfigError,
    EnergyShellSingular,
    EnsembleDegenerate,
    GridTooCoarse,
    InvalidParams,
    KvnLabError,
    NotEnoughStates,
    QuadratureError,
    SingularInput,
    StepSizeUnderflow,
)
from .model import (
    ChargeRecord,
    DilationParams,
    PhasePoint,
    SystemParams,
    regularized_potential,
    validate,
)

__all__ = [
    "AsymptoticsNotReached",
    "ChargeRecord",
    "ConfigError",
    "DilationParams",
    "EnergyShellSingular",
    "EnsembleDegenerate",
    "GridTooCoarse",
    "InvalidParams",
    "KvnLabError",
    "NotEnoughStates",
    "PhasePoint",
    "QuadratureError",
    "SingularInput",
    "StepSizeUnderflow",
    "SystemParams",
    "regularized_potential",
    "validate",
    "__version__",
]

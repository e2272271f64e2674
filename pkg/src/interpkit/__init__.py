"""Exact computational tools for real interpolation of weighted sequence couples."""

from interpkit.couples import (
    CoupleOperator,
    OpNorm,
    WeightedCouple,
    couple_opnorm,
    j_functional,
    k_exact,
    k_surrogate,
    norm_side,
    opnorm_inf_to_1,
    rho_norm,
)
from interpkit.errors import (
    ConfigError,
    DegenerateInputError,
    DomainError,
    HypothesisViolation,
    InfeasibleError,
    InterpKitError,
    ParameterError,
    RangeAssumptionViolated,
    ShapeError,
    UnsupportedExponentError,
)
from interpkit.kernels import BACKEND
from interpkit.qcfun import (
    ConcaveMajorant,
    MinAffine,
    PowerLaw,
    PowerLog,
    QcFunction,
    SparseSequence,
    derived_weight,
    sparse_tau,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConcaveMajorant",
    "ConfigError",
    "CoupleOperator",
    "DegenerateInputError",
    "DomainError",
    "HypothesisViolation",
    "InfeasibleError",
    "InterpKitError",
    "MinAffine",
    "OpNorm",
    "ParameterError",
    "PowerLaw",
    "PowerLog",
    "QcFunction",
    "RangeAssumptionViolated",
    "ShapeError",
    "SparseSequence",
    "UnsupportedExponentError",
    "WeightedCouple",
    "couple_opnorm",
    "derived_weight",
    "j_functional",
    "k_exact",
    "k_surrogate",
    "norm_side",
    "opnorm_inf_to_1",
    "rho_norm",
    "sparse_tau",
]

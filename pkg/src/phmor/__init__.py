"""Structure-preserving discretization, simulation, and data-driven
reduction of one-dimensional boundary-controlled port-Hamiltonian
systems.

The pipeline: describe a model (`phs`), discretize it with a
partitioned finite element method that keeps the power balance exact
(`pfem`), integrate the resulting descriptor system with an implicit
midpoint rule whose discrete energy balance is exact (`simulate`),
build reduced models from frequency samples by tangential
interpolation (`loewner`), enforce passivity by re-interpolating at
spectral zeros (`passive`), and drive everything from JSON
configurations with reproducible CSV artifacts (`cli`).
"""

from .errors import (
    NumericalError,
    PhmorError,
    SpecificationError,
)
from .phs import (
    BcPhsSpec,
    SpatialFunction,
    Tolerances,
    ValidatedModel,
    boundary_form,
    hamiltonian_density,
    model_from_dict,
    preset,
    validate,
)
from .pfem import (
    AssembledFom,
    HatBasis,
    InitialState,
    assemble_blocks,
    assemble_fom,
    build_basis,
    project_initial,
)
from .simulate import (
    DescriptorSystem,
    EnergyBalanceReport,
    Feedback,
    Trajectory,
    energy_balance_report,
    simulate,
    to_descriptor,
)
from .loewner import (
    Rom,
    TangentialData,
    as_realization,
    bode,
    build_pencil,
    build_projector,
    eval_transfer,
    generate_data,
    real_transform,
    realize,
    svd_truncate,
)
from .passive import (
    PassivityCertificate,
    PhForm,
    SpectralZeroSet,
    default_shift,
    extract_ph,
    passive_reduce,
    passivity_check,
    spectral_zeros,
)
from .cli import CompareReport, RunConfig, compare, load_config, main, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "AssembledFom",
    "BcPhsSpec",
    "CompareReport",
    "DescriptorSystem",
    "EnergyBalanceReport",
    "Feedback",
    "HatBasis",
    "InitialState",
    "NumericalError",
    "PassivityCertificate",
    "PhForm",
    "PhmorError",
    "Rom",
    "RunConfig",
    "SpatialFunction",
    "SpecificationError",
    "SpectralZeroSet",
    "TangentialData",
    "Tolerances",
    "Trajectory",
    "ValidatedModel",
    "as_realization",
    "assemble_blocks",
    "assemble_fom",
    "bode",
    "boundary_form",
    "build_basis",
    "build_pencil",
    "build_projector",
    "compare",
    "default_shift",
    "energy_balance_report",
    "eval_transfer",
    "extract_ph",
    "generate_data",
    "hamiltonian_density",
    "load_config",
    "main",
    "model_from_dict",
    "passive_reduce",
    "passivity_check",
    "preset",
    "project_initial",
    "real_transform",
    "realize",
    "run_pipeline",
    "simulate",
    "spectral_zeros",
    "svd_truncate",
    "to_descriptor",
    "validate",
]

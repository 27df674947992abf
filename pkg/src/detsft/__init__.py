"""Deterministic sparse Fourier transforms with worst-case recovery guarantees."""

from .bucketing import (
    BucketVector,
    SampleAccess,
    SampleAccessError,
    SampleSet,
    estimate_from_bucket,
    hash_to_bins,
    measure_exact,
    sample_positions,
)
from .estimators import IncoherentRowSampler, SparseFourierRecovery, design_schedule
from .explicit import (
    ExplicitSelection,
    PrimeField,
    factor_pminus1,
    find_generator,
    quadratic_residue_rows,
    subgroup_rows,
    weyl_polynomial_rows,
)
from .filters import FlatFilter, build_filter, certify_filter, filter_value
from .forge import (
    ForgeParams,
    choose_d_lambda,
    forge_derandomized,
    forge_sample_verify,
    mgf_bound,
    pessimistic_estimate,
    verify_condition,
)
from .hashing import HashingSchedule, HashingTriple
from .oracles import GuaranteeReport, adversarial_family, check_guarantee, exact_dft, max_exponential_sum
from .recovery import RecoveryParams, SparseApproximation, recover_linear, sub_recovery_linear
from .subsample import RowSelection, SubsampleParams, bernstein_mgf, subsample_derandomized, verify_incoherence
from .sublinear import ModulationSet, Sector, one_sparse_locate, recover_sublinear, sub_recovery_sublinear

__version__ = "0.1.0"

__all__ = [
    "adversarial_family",
    "bernstein_mgf",
    "BucketVector",
    "build_filter",
    "certify_filter",
    "check_guarantee",
    "choose_d_lambda",
    "design_schedule",
    "estimate_from_bucket",
    "exact_dft",
    "ExplicitSelection",
    "factor_pminus1",
    "filter_value",
    "find_generator",
    "FlatFilter",
    "forge_derandomized",
    "forge_sample_verify",
    "ForgeParams",
    "GuaranteeReport",
    "hash_to_bins",
    "HashingSchedule",
    "HashingTriple",
    "IncoherentRowSampler",
    "max_exponential_sum",
    "measure_exact",
    "mgf_bound",
    "ModulationSet",
    "one_sparse_locate",
    "pessimistic_estimate",
    "PrimeField",
    "quadratic_residue_rows",
    "recover_linear",
    "recover_sublinear",
    "RecoveryParams",
    "RowSelection",
    "sample_positions",
    "SampleAccess",
    "SampleAccessError",
    "SampleSet",
    "Sector",
    "SparseApproximation",
    "SparseFourierRecovery",
    "sub_recovery_linear",
    "sub_recovery_sublinear",
    "subgroup_rows",
    "subsample_derandomized",
    "SubsampleParams",
    "verify_condition",
    "verify_incoherence",
    "weyl_polynomial_rows",
]


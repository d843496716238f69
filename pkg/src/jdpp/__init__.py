"""Determinantal point processes with J-Hermitian correlation kernels on
finite partitioned spaces."""

from .dpp import (
    DistributionTable,
    bogoliubov,
    correlation,
    densities_via_L,
    exact_distribution,
    pushforward_complement,
    signed_masses,
    thin,
    void_probability,
)
from .errors import (
    EnumerationCapError,
    InvalidKernelError,
    JDPPError,
    NegativeMassError,
    NormOneError,
    PreconditionError,
    SingularError,
)
from .fredholm import DetReport, cycle_coefficients, det_block, det_direct, det_multiplier, det_series
from .jop import (
    JKernel,
    Verdict,
    check_validity,
    hat,
    is_j_hermitian,
    l_transform,
    norm_identity_check,
    norms,
    restrict,
    schur_check,
    swap_parts,
)
from .kernels import ContinuousKernelSpec, discretize, from_G, random_valid
from .sampler import estimate, goodness_of_fit, sample_hermitian, sample_j
from .space import PartitionedSpace, complement, projector, window_split

__version__ = "0.1.0"

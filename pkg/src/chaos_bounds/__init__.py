"""Partition-indexed norms, moment/tail bounds and Monte-Carlo diagnostics
for vector-valued Gaussian and exponential chaoses."""

__version__ = "0.1.0"

from .bounds import (  # noqa: F401
    BoundReport,
    BoundTerm,
    GeneralPolyReport,
    TailReport,
    comparison_ratio,
    conjecture_gap,
    exp_chaos_bound,
    general_poly_bounds,
    lower_sum,
    lq_bound,
    real_moment_twosided,
    special_space_upper,
    tail_exponent_lower,
    tail_exponent_upper,
    upper_sum,
)
from .errors import ChaosBoundsError, NumericError, UnsupportedSpaceError, ValidationError  # noqa: F401
from .hermite import (  # noqa: F401
    HermiteExpansion,
    PolynomialSpec,
    expand,
    expected_gradient_tensor,
    hermite_value,
    homogeneous_parts,
)
from .montecarlo import (  # noqa: F401
    ChaosSampler,
    MCConfig,
    MomentEstimate,
    SandwichResult,
    alpha_plus_ratio,
    decoupled_sampler,
    decoupling_ratio,
    empirical_moment,
    exponential_sampler,
    hypercontractivity_ratio,
    sample_decoupled,
    sample_exponential,
    sample_undecoupled,
    sandwich_check,
    undecoupled_sampler,
)
from .norms import (  # noqa: F401
    NormEstimate,
    OptimizerConfig,
    lq_cover_norm,
    lq_triple_norm,
    mixed_norm,
    real_chaos_sup,
    triple_norm,
)
from .partitions import (  # noqa: F401
    CoverSequence,
    PartitionPair,
    bell_number,
    enumerate_cover_sequences,
    enumerate_partition_pairs,
    enumerate_partitions,
    enumerate_subset_partitions,
    filter_reduced_class,
    parse_pair,
    render_pair,
)
from .spaces import ValueSpace, norm_value, type2_K  # noqa: F401
from .tensor import (  # noqa: F401
    BlockAssignment,
    CoeffTensor,
    contract,
    mask_offdiagonal,
    slice_fix,
    symmetrize,
    validate,
)

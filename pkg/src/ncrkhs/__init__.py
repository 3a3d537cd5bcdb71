"""Free noncommutative kernels, RKHS models, multipliers and cp maps at finite matrix scale."""

from .core import (
    DEFAULT_TOL,
    BadIntertwiner,
    DependentBasis,
    DimMismatch,
    InconsistentEvaluator,
    Infeasible,
    InputError,
    LetterOutOfRange,
    MatrixTuple,
    MissingPair,
    NcrkhsError,
    NonSquare,
    NotContraction,
    NotCp,
    NotInTarget,
    NotNilpotent,
    NotPsd,
    NotSigmaClosed,
    SamplerUnavailable,
    ShapeMismatch,
    Tolerances,
    TruncationRefused,
    TruncationTooShort,
    Word,
    direct_sum,
    kron,
    min_eig_hermitian,
    psd_factor,
    word_eval,
    word_transpose,
    words_up_to,
    zero_tuple,
)
from .series import (
    AxiomReport,
    NcSeries,
    add,
    check_respects_direct_sums,
    check_respects_intertwinings,
    evaluate,
    evaluate_on_nilpotent,
    extract_taylor_coefficients,
    functional_evaluator,
    linear_combination,
    multiply,
    nilpotency_order,
    scale,
    truncate,
    truncated_shift_tuple,
)
from .kernels import (
    AlgebraSpec,
    CallableKernel,
    CbNormReport,
    CpCertificate,
    EnvelopeKernel,
    GramBasisKernel,
    KernelElement,
    KolmogorovKernel,
    KolmogorovSample,
    MomentKernel,
    amplify,
    cb_norm_report,
    check_kernel_axioms,
    cp_certificate,
    cp_certificate_similarity_reduced,
    draw_kernel_axiom_samples,
    extend_to_nc_envelope,
    kolmogorov_at_sample,
    moment_kernel_from_factor,
    szego_kernel,
)
from .rkhs import (
    RkhsModel,
    bergman_kernel,
    kernel_element_coefficients,
    lifted_norm,
    orthonormalized,
    point_evaluation,
    reproducing_check,
    sigma_action,
    sigma_matrix,
)
from .multipliers import (
    BrangesianDecomposition,
    Multiplier,
    Represented,
    adjoint_on_kernel_element,
    apply_multiplier,
    apply_multiplier_series,
    brangesian_complement,
    contractive_containment,
    contractivity_certificate,
    dbr_kernel,
    difference_kernel,
    multiplier_matrix,
)
from .formal import (
    FormalFactorization,
    FormalKernel,
    convolve,
    convolve_truncated,
    formal_from_functional,
    formal_kernel_from_factor,
    formal_kolmogorov_truncated,
    functional_from_formal,
    functional_from_series,
    is_formal_positive_truncated,
    moment_matrix,
    nilpotent_positivity_check,
    szego_formal_kernel,
)
from .cpmaps import (
    CpMap,
    CpMapRkhs,
    StinespringDilation,
    cb_norm_cp,
    choi,
    effros_ruan_lower_bound,
    is_cp,
    rkhs_of_cp_map,
    sampled_amplified_positivity,
    stinespring,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

"""Finite-section correlation operators: norms, certificates, extensions.

The package works with multi-index coefficient windows and the Toeplitz and
Hankel style correlation operators they induce on grid masks.  It provides
dense and iterative norm estimates, exponential test-function lower bounds,
minimal sup-norm coefficient extensions with certified grid bounds, weak
product factorizations on the unit cube, and a randomized property-test
harness behind the ``corrops`` command line tool.
"""

__version__ = "0.1.0"

from .coeffs import (
    MultiSequence,
    SymbolGrid,
    Window,
    coeffs_from_grid,
    eval_symbol,
    load_multisequence,
    save_multisequence,
)
from .errors import CorropsError, GeometryError, InputError, ResourceError
from .factorization import (
    CubeFunction,
    FactorizationResult,
    half_cube_samples,
    reconstruct,
    tent_values,
    verify_convolution_identity,
    weak_factorize,
)
from .geometry import (
    GridMask,
    Polytope,
    domain_from_dict,
    domain_sum,
    load_domain,
    partition_of_unity,
    rasterize,
    rasterize_staircase,
    support_function,
    validate_direction,
)
from .nehari import (
    CertifiedExtension,
    ExtensionProblem,
    ExtensionResult,
    SweepReport,
    certified_sup_bound,
    extend_and_certify,
    min_linf_extension,
    section_norm_growth,
    sweep_constant,
)
from .norms import (
    NormEstimate,
    TestFunctionSpec,
    certificate_E_eps,
    certificate_sweep,
    norm_dense,
    norm_iterative,
)
from .operators import (
    CorrelationOperator,
    Kernel,
    MollifierSpec,
    fourier_l1,
    hankel_toeplitz_flip,
    kernel_from_sequence,
    load_kernel,
    modulate,
    mollify,
    save_kernel,
    toeplitz_matrix,
)

__all__ = [
    "__version__",
    "CorropsError",
    "GeometryError",
    "InputError",
    "ResourceError",
    "Window",
    "MultiSequence",
    "SymbolGrid",
    "eval_symbol",
    "coeffs_from_grid",
    "save_multisequence",
    "load_multisequence",
    "Polytope",
    "GridMask",
    "support_function",
    "rasterize",
    "rasterize_staircase",
    "domain_sum",
    "partition_of_unity",
    "validate_direction",
    "domain_from_dict",
    "load_domain",
    "Kernel",
    "CorrelationOperator",
    "MollifierSpec",
    "kernel_from_sequence",
    "toeplitz_matrix",
    "hankel_toeplitz_flip",
    "mollify",
    "modulate",
    "fourier_l1",
    "save_kernel",
    "load_kernel",
    "NormEstimate",
    "TestFunctionSpec",
    "norm_dense",
    "norm_iterative",
    "certificate_E_eps",
    "certificate_sweep",
    "ExtensionProblem",
    "ExtensionResult",
    "CertifiedExtension",
    "SweepReport",
    "certified_sup_bound",
    "min_linf_extension",
    "extend_and_certify",
    "section_norm_growth",
    "sweep_constant",
    "CubeFunction",
    "FactorizationResult",
    "tent_values",
    "weak_factorize",
    "reconstruct",
    "half_cube_samples",
    "verify_convolution_identity",
]

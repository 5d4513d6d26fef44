"""fmmlab: laboratory for bilinear matrix-multiplication schemes.

Schemes are (L, R, P) coefficient triples over the dyadic rationals;
the package validates them exactly, executes their straight-line
programs, multiplies matrices recursively (dense and alternative-basis
paths), computes growth factors and error-bound exponents, and
benchmarks max-norm accuracy against an exact reference product.
"""

__version__ = "0.1.0"

from .bench import BenchConfig, BenchRecord, random_matrix, reference_product, run_bench
from .catalog import BUILTIN_IDS, AltBasisScheme, SchemeBundle, builtin, load_bundle_dir, resolve
from .dyadic import Dyadic, parse_dyadic
from .growth import (
    alt_complexity_constant,
    complexity_constant,
    dual_exponent,
    error_exponent,
    gamma2,
    growth_factor,
    growth_report,
)
from .lrp import (
    LrpScheme,
    ValidationReport,
    apply_one_level,
    devectorize,
    validate_scheme,
    vectorize,
)
from .recursion import RecursionPlan, classical_multiply, multiply, multiply_alt
from .slp import (
    OpCount,
    SlpProgram,
    count_ops,
    eval_slp,
    linear_map_of,
    naive_slp,
    parse_slp,
    render_slp,
    verify_slp,
)
from .sms import load_sms, save_sms

__all__ = [
    "__version__",
    "Dyadic",
    "parse_dyadic",
    "LrpScheme",
    "ValidationReport",
    "apply_one_level",
    "validate_scheme",
    "vectorize",
    "devectorize",
    "SchemeBundle",
    "AltBasisScheme",
    "BUILTIN_IDS",
    "builtin",
    "resolve",
    "load_bundle_dir",
    "load_sms",
    "save_sms",
    "SlpProgram",
    "OpCount",
    "parse_slp",
    "render_slp",
    "eval_slp",
    "linear_map_of",
    "count_ops",
    "naive_slp",
    "verify_slp",
    "RecursionPlan",
    "classical_multiply",
    "multiply",
    "multiply_alt",
    "dual_exponent",
    "growth_factor",
    "gamma2",
    "error_exponent",
    "complexity_constant",
    "alt_complexity_constant",
    "growth_report",
    "BenchConfig",
    "BenchRecord",
    "random_matrix",
    "reference_product",
    "run_bench",
]

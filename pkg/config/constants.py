"""
Constants for the cone laboratory.
"""

# Catalog algebras and the parameter each one takes
CATALOG_ALGEBRAS = {
    "sym_real": "Real symmetric n x n matrices",
    "herm_complex": "Complex hermitian n x n matrices",
    "herm_quat": "Quaternionic hermitian n x n matrices",
    "spin_factor": "Spin factor R + R^k",
    "abelian": "Abelian algebra R^n",
    "direct_sum": "Direct sum of two catalog algebras",
}

# CLI spellings accepted for catalog names
CATALOG_ALIASES = {
    "spin": "spin_factor",
    "sym": "sym_real",
    "herm": "herm_complex",
    "quat": "herm_quat",
}

# Algebras with a built-in orientable extension for `reconstruct`
BUILTIN_EXTENSIONS = ("sym_real", "herm_quat", "abelian")

# Positivity verdicts
INTERIOR = "Interior"
BOUNDARY = "Boundary"
OUTSIDE = "Outside"

# Oracle wire protocol commands
ORACLE_COMMANDS = ("MEMBER", "SYM", "EXP", "DIM", "QUIT")
MEMBERSHIP_CODES = {OUTSIDE: 0.0, BOUNDARY: 1.0, INTERIOR: 2.0}

# Solver verdicts
FOUND = "Found"
NOT_FOUND = "NotFound"
INCONCLUSIVE = "Inconclusive"

# Exit codes
EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT_ERROR = 2
EXIT_INCONCLUSIVE = 3

# Versioned JSON report schema
REPORT_SCHEMA_VERSION = 1

# Error messages
ERROR_MESSAGES = {
    "DIMENSION_MISMATCH": "Dimension mismatch: expected length {expected}, got {got}.",
    "ASYMMETRIC_STRUCTURE": "Structure constants are not symmetric: max |c[k][i][j] - c[k][j][i]| = {residual:.3e}.",
    "BAD_IDENTITY": "Identity check failed: max |e o b_i - b_i| = {residual:.3e}.",
    "TRACE_FORM": "Trace form is not symmetric positive definite (min eigenvalue {value:.3e}).",
    "UNKNOWN_ALGEBRA": "Unknown catalog algebra '{name}'.",
    "BAD_PARAMETER": "Invalid parameter for {name}: {detail}.",
    "DEGENERATE_SPECTRUM": "Degenerate spectrum: {detail} (gap {gap:.3e}).",
    "SPECTRAL_DOMAIN": "Function undefined on spectral value {value:.6g}.",
    "NOT_INTERIOR": "{what} is not an interior point of the cone (min spectral value {value:.3e}).",
    "IMPROPER_CONE": "The cone is not proper (seminorm kernel dimension {dim}).",
    "SINGULAR_MAP": "Linear map is singular (smallest singular value {value:.3e}).",
    "UNRELIABLE_ORACLE": "Cone oracle involution residual {residual:.3e} exceeds {tol:.1e}.",
    "NOT_ADDITIVE": "Cone map is not additive/positively homogeneous (residual {residual:.3e}).",
    "NOT_DERIVATION": "Orientation is not valued in the derivation algebra (Leibniz residual {residual:.3e}).",
    "ORIENTATION_FAILED": "Orientation verification failed (max residual {residual:.3e}).",
    "NOT_MATRIX_CATALOG": "Algebra '{name}' has no complex hermitian matrix realisation closed under i[a, b].",
    "NOT_SUBALGEBRA": "Subspace is not a unital Jordan subalgebra (residual {residual:.3e}).",
    "BASIS_MISMATCH": "Orientation coefficients belong to derivation basis {expected}, got {got}.",
    "ORACLE_PROTOCOL": "Oracle protocol error: {detail}.",
    "EXTENSION_INVALID": "Extension invariant violated: {detail}.",
    "SPAN_OVERFLOW": "Span closure exceeded the ambient dimension {dim}.",
}

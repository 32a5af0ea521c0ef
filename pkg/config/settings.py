"""
Settings for the cone laboratory.
"""

import os
from pathlib import Path

# Project base directory
BASE_DIR = Path(__file__).resolve().parent.parent

# Algebra engine tolerances
COMMUTATIVITY_TOL = 1e-12
IDENTITY_TOL = 1e-10
TRACE_FORM_EIG_TOL = 1e-12
SPECTRAL_MERGE_TOL = 1e-7  # roots closer than this * (1 + |lambda|max) are merged
SPECTRAL_RECONSTRUCTION_TOL = 1e-9
KRYLOV_BREAKDOWN_TOL = 1e-11
CENTER_SINGULAR_TOL = 1e-10
POWER_ASSOCIATIVITY_MAX = 6
JB_PASS_TOL = 1e-8

# Order structure
BOUNDARY_REL_TOL = 1e-9
NORMALITY_DIRECTIONS = 200
NORMALITY_BISECTION_STEPS = 40
NORMALITY_PAIRS = 200

# Geometry
FINITE_DIFFERENCE_STEP = 1e-3
FD_STEP_BOUNDS = (1e-6, 1e-2)
ORACLE_INVOLUTION_TOL = 1e-6
GEOMETRY_TOL = 1e-7

# Derivations and orientations
DERIVATION_SINGULAR_TOL = 1e-10
DERIVATION_GAP_RATIO = 10.0
ORIENTATION_TOL = 1e-8
SOLVER_RESTARTS = 64
SOLVER_MAX_ITER = 2000
SOLVER_TOL_SUCCESS = 1e-9
SOLVER_TOL_FAIL = 1e-4
SOLVER_INIT_SCALE = 1.0

# C*-reconstruction
ASSOCIATIVITY_TOL = 1e-9
CSTAR_IDENTITY_TOL = 1e-7
SPAN_RANK_TOL = 1e-10
REVERSIBILITY_TOL = 1e-8
COMPATIBILITY_TOL = 1e-8

# Sampling defaults
DEFAULT_SEED = 0
DEFAULT_SAMPLES = 100

# Parallelism (CONELAB_THREADS caps the solver thread pool)
try:
    MAX_THREADS = max(1, int(os.environ.get("CONELAB_THREADS", os.cpu_count() or 1)))
except ValueError:
    MAX_THREADS = 1

# Output settings
DEFAULT_OUTPUT_FORMAT = "text"
SUPPORTED_OUTPUT_FORMATS = ["text", "json"]
DATA_DIR = os.path.join(BASE_DIR, "data")

# Logging settings
LOG_LEVEL = os.environ.get("CONELAB_LOG_LEVEL", "INFO")
LOG_FILE = os.path.join(BASE_DIR, "logs", "conelab.log")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

"""
Anisotropic Multigrid Solver - Configuration

Application constants and solver defaults.
"""

APP_NAME = "Anisotropic Multigrid Solver"
APP_VERSION = "1.0.0"

# Radial / polar axis truncation (keeps r = 0 and sin(theta) = 0 off the grid)
R_MIN = 0.1
THETA_MIN = 0.1

# Admissible cell-width ratio range of a graded axis: [1 / MAX_GRADING, MAX_GRADING]
MAX_GRADING = 1e3

COORDINATE_SYSTEMS = ["cartesian", "cylindrical", "spherical"]

SMOOTHER_KINDS = [
    "richardson",
    "jacobi",
    "gauss_seidel",
    "sor",
    "ilu0",
    "tri_x",
    "tri_y",
    "adi",
    "gstri_x",
    "gstri_y",
    "gsadi",
]

# C-construction omega per smoother kind; None means "derive at setup"
DEFAULT_SMOOTHER_OMEGA = {
    "richardson": None,
    "jacobi": 1.0,
    "gauss_seidel": 1.0,
    "sor": 1.5,
    "ilu0": 1.0,
    "tri_x": 1.0,
    "tri_y": 1.0,
    "adi": 1.0,
    "gstri_x": 1.0,
    "gstri_y": 1.0,
    "gsadi": 1.0,
}

RICHARDSON_POWER_ITERATIONS = 20
RICHARDSON_SAFETY = 0.9

# Outer Richardson damping used by every smoothing step
DEFAULT_OMEGA = 0.7

DEFAULT_TOL = 1e-4
DEFAULT_CYCLE = "F"
DEFAULT_MAX_CYCLES = 50
DEFAULT_LEVELS = 4
DEFAULT_COARSE_N = (1, 1)
DEFAULT_PRE_STEPS = 2
DEFAULT_POST_STEPS = 2
DEFAULT_CORRECTION_OMEGA = 1.0
DEFAULT_SMOOTHER = "gauss_seidel"
DEFAULT_COARSE_STEPS = 20
DEFAULT_PROBE_ITERATIONS = 100

DIVERGENCE_FACTOR = 1e6

CONTINUATION_FACTOR = 10.0

CSV_FLOAT_FORMAT = "%.9e"
STUDY_CSV_HEADER = ["sweep_value", "cycles", "final_rel_residual", "mean_rate", "converged", "wall_ms"]
HISTORY_CSV_HEADER = "cycle,residual"

STUDY_AXES = ["anisotropy", "levels", "smoothing_steps", "coordinates", "smoother", "start_vector"]
START_STRATEGIES = ["zero", "nested", "continuation"]

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_MAX_CYCLES = 2
EXIT_DIVERGED = 3
EXIT_NOT_CONTRACTIVE = 4

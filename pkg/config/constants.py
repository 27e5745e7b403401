# config/constants.py
"""Numerical constants, defaults and thresholds."""
from fractions import Fraction

# Model family bounds ("fixed and bounded" exponents)
J_MAX = 3
K_MAX = 4
POLY_MAX_DEGREE = 8

# Tolerances
ZERO_TOLERANCE = 1e-12          # relative to coefficient scale
BISECTION_TOLERANCE = 1e-12
MIN_SIGN_SAMPLES = 16
XI2_MIN = 1e-3

# Default scaling
DEFAULT_BETA = Fraction(1, 8)
DEFAULT_XI2 = 1.0

# Periodic box and grids
BOX_HALF_WIDTH = 8.0
CONJUGATED_GRID = 256
FULL_GRID = 1024
ORACLE_GRID = 32
ORACLE_RANDOM_FIELDS = 10
ORACLE_FFT_RTOL = 1e-10

# Cutoff: flat-top of radius CUTOFF_RADIUS in t and x2, Gaussian of width
# TRANSVERSE_WIDTH in x2 on the plateau
CUTOFF_RADIUS = 7.5
CUTOFF_PLATEAU = 0.8
TRANSVERSE_WIDTH = 1.2
MIN_WINDOW_RADIUS = 0.25
WINDOW_SAMPLES = 4097

# Chebyshev reciprocal of q on the t window
RECIPROCAL_MIN_DEGREE = 16
RECIPROCAL_MAX_DEGREE = 128
RECIPROCAL_TOLERANCE = 1e-12
SERIES_TRIM = 1e-14

# Default h sweep: 2^-4 .. 2^-12
DEFAULT_H_EXPONENTS = list(range(4, 13))
DEFAULT_H_VALUES = [2.0 ** -e for e in DEFAULT_H_EXPONENTS]
DEFAULT_TERM_COUNTS = [0, 1, 2, 3, 4]

# Amplitude correction blow-up guard (sup norm of a source term)
CORRECTION_GUARD = 1e12

# Norm bounds (upper C, lower c * h^((alpha + beta) / 2))
NORM_UPPER_C = 10.0
NORM_LOWER_C = 1e-3

# Verdict thresholds
GAIN_FRACTION_OF_BETA = 0.5     # per added term
SATURATION_THRESHOLD = 0.15     # total slope variation
ORACLE_SLOPE_SLACK = 0.3
ORACLE_FACTORABLE_SLOPE_CAP = 2.5
FIT_RESIDUAL_LIMIT = 0.5        # log units
MIN_FIT_SAMPLES = 4

# Variational check slack (relative)
VARIATIONAL_RTOL = 1e-9

# Case / condition table (rows x columns)
CONDITION_COLUMNS = ["beta", "dxi_beta", "P2P1", "alpha"]
CASE_TABLE = {
    "Transversal": {"beta": "implemented", "dxi_beta": "", "P2P1": "implemented", "alpha": "open"},
    "Tangential": {"beta": "implemented", "dxi_beta": "implemented", "P2P1": "implemented", "alpha": "open"},
    "Factorable": {"beta": "", "dxi_beta": "implemented", "P2P1": "implemented", "alpha": "open"},
}

# Settings for the gradedkms project
#
# Every tolerance and threshold used by the certification code lives here.
# All tolerances are relative: callers multiply them by the scale of the
# inputs (a Frobenius norm, a trace norm, or a condition number).

# Numeric kernel
HERMITIAN_RTOL = 1e-10
EIGEN_RECONSTRUCTION_RTOL = 1e-12
# eigenvalues closer than this fraction of the spectral diameter form a
# degenerate cluster
DEGENERACY_RTOL = 1e-10
# min eigenvalue / max eigenvalue below this is singular
POSITIVITY_RTOL = 1e-14
COMMUTANT_RTOL = 1e-10

# Graded algebra
EVENNESS_RTOL = 1e-12

# Jordan decomposition
# eigenvalues of T within this fraction of max |eigenvalue| belong to
# neither support
JORDAN_ZERO_RTOL = 1e-12

# Modular flow
MAX_CONDITION = 1e6
QUADRATURE_NODES = 64
GROWTH_MAX_DEGREE = 8

# GNS construction
GNS_NULL_RTOL = 1e-10
FLOW_MATCH_RTOL = 1e-11
UNITARY_ATOL = 1e-11
# commutant_basis cost grows with the fourth power of the GNS dimension
COMMUTANT_MAX_DIM = 16

# Scenarios
RANDOM_SAMPLES = 200
DEFAULT_SPECTRAL_BOUND = 5.0
DEFAULT_TOLERANCE = 1e-9
KERNEL_SWAP_EPSILON = 1e-10
DEFAULT_SIGMA = 0.5
# smoothed residuals must approach the unsmoothed ones at this width
SMOOTHING_LIMIT_SIGMA = 1e-3

# Reports
REPORT_ENCODING = "utf-8"
REPORT_FLOAT_DIGITS = 17

# Certification tolerances for consistency checks between objects built
# from the same scenario
CONSISTENCY_RTOL = 1e-10
HYPOTHESIS_RTOL = 1e-10

# Suites
# matrix-unit pairs are used exhaustively up to this many pairs
PAIR_BUDGET = 4096
# elements fed to checks that build GNS operators for every sample
GNS_SAMPLE_BUDGET = 24
PROPOSITION4_BUDGET = 50
FLOW_TIMES = (-1.5, -0.25, 0.5, 2.0)

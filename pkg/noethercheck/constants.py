import os

# path to the root of this repository (assumes this file is in src folder)
REPO_PATH = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
# bundled example configurations
DEFAULT_EXAMPLES_DIRECTORY = os.path.join(os.path.dirname(__file__), "data/examples/")
# default output directory for reports, snapshots and plots
DEFAULT_OUTPUT_DIRECTORY = os.path.join(os.path.dirname(__file__), "data/outputs")
TEST_DATA_DIRECTORY = os.path.join(REPO_PATH, "tests/test_data/")
GOLDEN_DIRECTORY = os.path.join(REPO_PATH, "tests/test_data/golden/")

# highest derivative order of a jet coordinate
MAX_JET_ORDER = 3
# spatial dimensions accepted by the symbolic layer and by the solver
SYMBOLIC_DIMENSIONS = (1, 2, 3, 4)
SOLVER_DIMENSIONS = (1, 2)
MIN_GRID_POINTS = 8

# relative charge drift accepted at reference resolution
DRIFT_TOLERANCE = 5e-3
# |u| below this value contributes nothing to a logarithmic interaction
LOG_FLOOR = 1e-12
# accepted residual of the damping removal condition for tabulated a(t)
TABULATED_RESIDUAL_TOLERANCE = 1e-8
# energy may grow by at most ENERGY_TOLERANCE_FACTOR * dt**2 * E(t0)
ENERGY_TOLERANCE_FACTOR = 10.0
# observables below this magnitude are excluded from order estimates
OBSERVABLE_FLOOR = 1e-13

LOG_FORMAT = "%(asctime)s %(levelname)s %(filename)s:%(lineno)d %(message)s"

__version__ = "0.1.0dev"

# largest snapshot table (rows) written as csv
MAX_CSV_ROWS = 200000
# initial bumps keep this many widths away from the box boundary
SUPPORT_WIDTHS = 4
# relative drifts below this level are roundoff and skip the refinement test
ROUNDOFF_DRIFT = 1e-9

# smooth modes of the seeded random initial velocity
RANDOM_MODES = 3

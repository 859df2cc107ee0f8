# config.py

# Gauss map defaults (f(x) = exp(-nu * x^2) + beta)
DEFAULT_NU = 7.5
DEFAULT_BETA = -0.5

# Divergence guard on |x(i,t)|
DEFAULT_BLOWUP_BOUND = 1e6

# Synchronization threshold on max - min of the field
SYNC_THRESHOLD = 0.01

# Period detection
PERIOD_TOLERANCE = 1e-3
PERIOD_MAX_WINDOW = 1000

# Power-law fits need at least this many usable samples
FIT_MIN_POINTS = 10

# Ensemble size for T_N studies (20 to 100 configurations is the usual range)
DEFAULT_ENSEMBLE_SIZE = 20

# Logging configuration
ENABLE_LOGGING = True  # Enable or disable logging
LOG_FILE_PATH = "app_data/logs/simulations.log"  # Path to the log file

# Output directory for runs, scans and scaling studies
DEFAULT_OUTPUT_DIR = "app_data/runs"

# Upper bound on N * T^2 accepted by the HTTP /run endpoint
SERVER_MAX_WORK = 2e9

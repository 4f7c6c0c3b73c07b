# dimcodes settings
#
# For simplicity, this file contains only settings considered important or
# commonly used. Every value can be overridden through the environment (or a
# .env file next to the working directory):
#
#     DIMCODES_CACHE_DIR, DIMCODES_LOG_LEVEL, DIMCODES_EXHAUSTIVE_CAP,
#     DIMCODES_SHOW_PROGRESS

import os

from dotenv import load_dotenv

load_dotenv()

TOOL_NAME = "dimcodes"
TOOL_VERSION = "0.1.0"

# Exhaustive verification caps (refusal beyond the cap, never silent degradation)
EXHAUSTIVE_CAP = int(os.getenv("DIMCODES_EXHAUSTIVE_CAP", "16"))  # covering-radius checks, ball covers
WELL_DISTRIBUTED_CAP = 14  # the q-loop multiplies cost, so this cap sits lower
MIN_COVER_CAP = 5  # exact branch-and-bound set cover

# Canonical code search
SEED_RETRY_CAP = 50  # seeds 0..49 are tried before giving up
BALL_COVER_RETRY_CAP = 8  # doublings of the sampled center count
CODE_FORMAT_ID = "covercode v1"

# Sequence generation
CHUNK_CAP = 12  # N_max: chunks above this length are split into blocks
DENSITY_BLOCK_BITS = 64  # block length of the density fallback code
BERNOULLI_BLOCK = 65536  # raw draws per generator block
RELAXED_GROWTH = 4  # default G of the relaxed lowering schedule
CERTIFY_TOLERANCE = 0.07  # ledger ratio may exceed the target dimension by this much

# Profiling
TAIL_FRACTION = 0.5  # tail statistic covers the final half of checkpoints

# Export
CSV_FLOAT_FORMAT = "%.6g"  # 6 significant digits, '.' decimal, no locale
JSON_INDENT = 2

# Logging
LOG_LEVEL = os.getenv("DIMCODES_LOG_LEVEL", "INFO")
LOG_FORMAT = "[%(asctime)s] [%(levelname)s] %(message)s"
LOG_DATEFMT = "%H:%M:%S"
SHOW_PROGRESS = os.getenv("DIMCODES_SHOW_PROGRESS", "0") == "1"

# Canonical code cache (re-read on every call so tests and scripts can redirect it)
DEFAULT_CACHE_DIR = os.path.join(os.path.expanduser("~"), ".cache", "dimcodes")


def code_cache_dir():
    """Directory holding verified canonical codes."""
    return os.getenv("DIMCODES_CACHE_DIR", DEFAULT_CACHE_DIR)

"""levyarea Configuration"""
import os
from pathlib import Path


def _load_dotenv():
    """Read .env file from project root if it exists."""
    env_file = Path(__file__).resolve().parent.parent / ".env"
    if env_file.exists():
        for line in env_file.read_text().splitlines():
            line = line.strip()
            if line and not line.startswith("#") and "=" in line:
                key, _, value = line.partition("=")
                os.environ.setdefault(key.strip(), value.strip())


_load_dotenv()

# Derivative orders of phi kept at zero; reversion beyond 20 is cancellation noise
DERIV_ORDER_MAX = min(int(os.environ.get("LEVYAREA_DERIV_ORDER", "12")), 20)
DERIV_ORDER_HARD_CAP = 20

# phi^{-1}
INVERSE_RTOL = 1e-10
INVERSE_MAX_ITER = 200
INVERSE_NEWTON_STEPS = 5

# scipy.integrate.quad
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8
QUAD_LIMIT = 200

# Monte Carlo
THREADS = int(os.environ.get("LEVYAREA_THREADS", "0"))  # 0 = auto
DEFAULT_SEED = 20240607
DEFAULT_REPS = 10_000
REPS_MIN = 100
CHUNK_SIZE = 1_000
EXCURSION_EVENT_CAP = 10_000_000
GRID_STEP_CAP = 50_000_000
LONGRUN_MIN_CYCLES = 30
CLT_SCALE_DEFAULT = 200

# Inventory
X_CAP_SCALE = 1e12
BISECT_RTOL = 1e-12
UNIMODALITY_GRID = 1000
UNIMODALITY_TOL = 1e-9

# Output
CSV_FLOAT_FORMAT = "%.17g"


def worker_count(override: int | None = None) -> int:
    """Resolve the worker count: explicit override, then LEVYAREA_THREADS, 0 means cpu count."""
    n = THREADS if override is None else override
    if n <= 0:
        n = os.cpu_count() or 1
    return n

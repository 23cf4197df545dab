import os
import logging
import dotenv

dotenv.load_dotenv()


def _float(name, default):
    return float(os.getenv(name, default))


def _int(name, default):
    return int(os.getenv(name, default))


class Config:

    ## PROJECT
    VERSION = "0.3.0"
    SCHEMA_VERSION = 1

    ## SIMPLEX
    SIMPLEX_TOL = _float("SIMPLEX_TOL", 1e-9)
    SUPPORT_ZERO_TOL = _float("SUPPORT_ZERO_TOL", 1e-10)

    ## ASSEMBLY
    # Gamma is kept dense up to this many components, block-sparse above
    DENSE_MAX_M = _int("DENSE_MAX_M", 64)
    J_COUNT = _int("J_COUNT", 5)
    DELTA_TAU = _float("DELTA_TAU", 4.0)

    ## SOLVER
    MAX_SWEEPS = _int("MAX_SWEEPS", 1000)
    SOLVER_TOL = _float("SOLVER_TOL", 1e-8)
    KKT_TOL = _float("KKT_TOL", 1e-6)
    N_LAMBDA = _int("N_LAMBDA", 50)
    LAMBDA_RATIO = _float("LAMBDA_RATIO", 0.01)
    CV_FOLDS = _int("CV_FOLDS", 5)

    ## SAMPLING
    MCMC_BURN_IN = _int("MCMC_BURN_IN", 2000)
    MCMC_THIN = _int("MCMC_THIN", 10)
    MCMC_STEP_SIZE = _float("MCMC_STEP_SIZE", 0.5)
    MCMC_TARGET_ACCEPT = _float("MCMC_TARGET_ACCEPT", 0.3)

    ## RUNTIME
    THREADS = _int("THREADS", 1)
    OUTPUT_DIR = os.getenv("OUTPUT_DIR", "outputs")

    ## LOGGING
    LOGGING_LEVEL = getattr(logging, os.getenv("LOGGING_LEVEL", "INFO").upper(), logging.INFO)

from pydantic import Field
from config import Config
from simplex_models.models import FrozenModel


class McmcOptions(FrozenModel):
    burn_in: int = Field(default=Config.MCMC_BURN_IN, ge=0)
    thin: int = Field(default=Config.MCMC_THIN, ge=1)
    step_size: float = Field(default=Config.MCMC_STEP_SIZE, gt=0)
    seed: int = 0
    n_chains: int = Field(default=1, ge=1)
    target_accept: float = Field(default=Config.MCMC_TARGET_ACCEPT, gt=0, lt=1)
    # proposals drawn per chain at once
    block_size: int = Field(default=1024, ge=1)

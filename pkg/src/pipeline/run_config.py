from typing import List, Literal, Optional
from pydantic import Field, model_validator
from config import Config
from utils import stable_hash
from simplex_models.errors import DeltaBelowOne
from simplex_models.models import FrozenModel, ModelSpec
from solver.models import LambdaGrid, SolverOptions
from evaluation.models import EstimationSettings


class RunConfig(FrozenModel):
    """
    One command-line run. Dropped coordinates default to J_COUNT seeded
    random picks, delta to the upper bound with tau = DELTA_TAU and the
    h exponent to max(2-a, 0).
    """

    spec: ModelSpec
    h_exponent: Optional[float] = Field(default=None, ge=0)
    pi: Optional[float] = 1.0
    C: Optional[List[float]] = None
    J: Optional[List[int]] = None
    J_policy: Literal["explicit", "random", "even"] = "random"
    J_count: int = Field(default=Config.J_COUNT, ge=1)
    solver: SolverOptions = SolverOptions()
    grid: LambdaGrid = LambdaGrid()
    delta: Optional[float] = None
    tau: float = Field(default=Config.DELTA_TAU, ge=0)
    folds: int = Field(default=Config.CV_FOLDS, ge=2)
    seed: int = 0
    # worker count never reaches outputs or fingerprints
    threads: int = Field(default=Config.THREADS, ge=1, exclude=True)

    @model_validator(mode="after")
    def _check(self):
        if self.delta is not None and self.delta < 1:
            raise DeltaBelowOne(f"delta must be >= 1, got {self.delta}")
        return self

    def settings(self, m):
        """EstimationSettings for m components; J_count is capped at m."""
        J_policy = "explicit" if self.J is not None else self.J_policy
        return EstimationSettings(
            spec=self.spec,
            h_exponent=self.h_exponent,
            pi=None if self.C is not None else self.pi,
            C=self.C,
            J=self.J,
            J_policy=J_policy,
            J_count=min(self.J_count, m),
            J_seed=self.seed,
            solver=self.solver,
            grid=self.grid,
            delta=self.delta,
            tau=self.tau,
            folds=self.folds,
            threads=self.threads,
        )

    def fingerprint(self):
        return stable_hash(self.model_dump(mode="json"))

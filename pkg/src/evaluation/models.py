from typing import List, Literal, Optional, Tuple
import numpy as np
from pydantic import Field
from config import Config
from utils import stable_hash
from simplex_models.models import FrozenModel, ModelSpec
from weighting.models import WeightSpec, default_h_exponent
from loss_assembly.builder import resolve_J
from loss_assembly.transforms import diagonal_multiplier_bound
from solver.models import FitPath, FitResult, LambdaGrid, SolverOptions


class RocCurve(FrozenModel):
    """Closed ROC curve sorted by fpr, plus the raw (fpr, tpr) per path lambda."""

    points: List[Tuple[float, float]]
    path_points: List[Tuple[float, float]]
    auc: float = Field(ge=0, le=1)

    @property
    def fpr(self):
        return np.array([p[0] for p in self.points])

    @property
    def tpr(self):
        return np.array([p[1] for p in self.points])


class EstimationSettings(FrozenModel):
    """
    Everything that turns a dataset into a selected estimate. Unset values
    follow the defaults: h exponent max(2-a, 0), delta at the upper bound
    1 + sqrt((tau log m + log 4) / 2n), dropped coordinate m.
    """

    spec: ModelSpec
    h_exponent: Optional[float] = Field(default=None, ge=0)
    pi: Optional[float] = 1.0
    C: Optional[List[float]] = None
    J: Optional[List[int]] = None
    J_policy: Literal["explicit", "random", "even"] = "explicit"
    J_count: Optional[int] = None
    J_seed: int = 0
    solver: SolverOptions = SolverOptions()
    grid: LambdaGrid = LambdaGrid()
    delta: Optional[float] = None
    tau: float = Config.DELTA_TAU
    folds: int = Field(default=Config.CV_FOLDS, ge=2)
    # worker count never reaches outputs or fingerprints
    threads: int = Field(default=Config.THREADS, ge=1, exclude=True)

    @property
    def exponent(self):
        return default_h_exponent(self.spec.a) if self.h_exponent is None else self.h_exponent

    def weights(self, m):
        if self.C is not None:
            return WeightSpec.power(self.exponent, m, C=self.C)
        return WeightSpec.power(self.exponent, m, pi=self.pi)

    def dropped(self, m):
        return resolve_J(m, self.J, count=self.J_count, seed=self.J_seed, policy=self.J_policy)

    def resolve_delta(self, n, m):
        if self.delta is not None:
            return self.delta
        return diagonal_multiplier_bound(n, m, self.tau)

    def fingerprint(self):
        return stable_hash(self.model_dump(mode="json"))


class CrossValidationResult(FrozenModel):
    lambdas: np.ndarray
    cv_curve: np.ndarray
    cv_se: np.ndarray
    fold_scores: np.ndarray
    lambda_star: float
    index_star: int
    folds: int


class EstimateResult(FrozenModel):
    """Selected fit of the full pipeline with what produced it."""

    path: FitPath
    cv: Optional[CrossValidationResult] = None
    selected: FitResult
    J: Tuple[int, ...]
    delta: float
    weights: WeightSpec
    settings_fingerprint: str

    @property
    def params(self):
        return self.selected.params

    @property
    def lambda_star(self):
        return self.selected.lambda_K

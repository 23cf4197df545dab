from typing import List, Optional
import numpy as np
from pydantic import Field, field_validator, model_validator
from config import Config
from simplex_models.models import FrozenModel, ParameterSet


class SolverOptions(FrozenModel):
    """
    Coordinate-descent settings. lambda_eta defaults to
    eta_penalty_ratio * lambda_K; the K diagonal is never penalized in the
    symmetric and A^(m-1) modes whatever `penalize_K_diagonal` says.
    """

    max_sweeps: int = Field(default=Config.MAX_SWEEPS, ge=1)
    tol: float = Field(default=Config.SOLVER_TOL, gt=0)
    kkt_tol: float = Field(default=Config.KKT_TOL, gt=0)
    penalize_eta: bool = True
    penalize_K_diagonal: bool = False
    lambda_K: float = Field(default=0.0, ge=0)
    lambda_eta: Optional[float] = Field(default=None, ge=0)
    eta_penalty_ratio: float = Field(default=1.0, ge=0)
    shuffle_seed: Optional[int] = None

    @property
    def effective_lambda_eta(self):
        if self.lambda_eta is not None:
            return self.lambda_eta
        return self.eta_penalty_ratio * self.lambda_K

    def at(self, lam):
        """Copy with lambda_K = lam and lambda_eta following the ratio."""
        return self.model_copy(update={"lambda_K": float(lam), "lambda_eta": None})


class LambdaGrid(FrozenModel):
    n_lambda: int = Field(default=Config.N_LAMBDA, ge=1)
    ratio: float = Field(default=Config.LAMBDA_RATIO, gt=0, le=1)
    lambdas: Optional[List[float]] = None

    @field_validator("lambdas")
    @classmethod
    def _decreasing(cls, value):
        if value is None:
            return value
        if any(lam < 0 for lam in value):
            raise ValueError("lambdas must be nonnegative")
        if any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError("lambdas must be strictly decreasing")
        return list(value)

    def values(self, lambda_max):
        if self.lambdas is not None:
            return np.asarray(self.lambdas, dtype=float)
        if self.n_lambda == 1:
            return np.array([lambda_max])
        return np.geomspace(lambda_max, lambda_max * self.ratio, self.n_lambda)


class FitResult(FrozenModel):
    params: ParameterSet
    theta: np.ndarray
    lambda_K: float
    lambda_eta: float
    sweeps_used: int
    converged: bool
    kkt_violation: float
    objective: float
    objective_history: List[float] = []

    def off_support(self, zero_tol=Config.SUPPORT_ZERO_TOL):
        return self.params.off_support(zero_tol)

    def nonzero_off_diagonal(self, zero_tol=Config.SUPPORT_ZERO_TOL):
        return int(self.off_support(zero_tol).sum())


class FitPath(FrozenModel):
    """Fits ordered by strictly decreasing lambda on one loss."""

    fits: List[FitResult]
    loss_fingerprint: str
    lambda_max: float

    @model_validator(mode="after")
    def _check_order(self):
        lams = [fit.lambda_K for fit in self.fits]
        if any(b >= a for a, b in zip(lams, lams[1:])):
            raise ValueError("path lambdas must be strictly decreasing")
        return self

    @property
    def lambdas(self):
        return np.array([fit.lambda_K for fit in self.fits])

    @property
    def all_converged(self):
        return all(fit.converged for fit in self.fits)

    def __len__(self):
        return len(self.fits)

from typing import Optional
import numpy as np
from pydantic import Field, field_validator, model_validator
from simplex_models.errors import InvalidWeights
from simplex_models.models import FrozenModel


def default_h_exponent(a):
    """h(x) = x^max(2-a, 0), the choice that recovers edges best in simulations."""
    return max(2.0 - a, 0.0)


class WeightSpec(FrozenModel):
    """
    Power weights h_j(x) = x^alpha_j composed with the boundary distance.
    Truncation is either an explicit positive C (one entry per free
    coordinate) or a sample quantile probability pi in (0, 1].
    """

    alpha: np.ndarray
    pi: Optional[float] = None
    C: Optional[np.ndarray] = None

    @field_validator("alpha", mode="before")
    @classmethod
    def _check_alpha(cls, value):
        alpha = np.array(value, dtype=float, copy=True)
        if alpha.ndim != 1:
            raise InvalidWeights(f"alpha must be a vector, got shape {alpha.shape}")
        if np.any(alpha < 0) or np.any(~np.isfinite(alpha)):
            raise InvalidWeights("alpha must be finite and nonnegative")
        alpha.setflags(write=False)
        return alpha

    @field_validator("C", mode="before")
    @classmethod
    def _check_C(cls, value):
        if value is None:
            return None
        C = np.array(value, dtype=float, copy=True)
        if C.ndim != 1 or np.any(~(C > 0)):
            raise InvalidWeights("explicit truncation C must be a positive vector")
        C.setflags(write=False)
        return C

    @model_validator(mode="after")
    def _check_truncation(self):
        if self.pi is None and self.C is None:
            raise InvalidWeights("give either a quantile pi or explicit truncation C")
        if self.pi is not None and self.C is not None:
            raise InvalidWeights("pi and explicit C are mutually exclusive")
        if self.pi is not None and not 0 < self.pi <= 1:
            raise InvalidWeights(f"pi must lie in (0, 1], got {self.pi}")
        if self.C is not None and self.C.shape[0] != self.alpha.shape[0] - 1:
            raise InvalidWeights(f"C needs m-1 = {self.alpha.shape[0] - 1} entries, got {self.C.shape[0]}")
        return self

    @property
    def m(self):
        return self.alpha.shape[0]

    @classmethod
    def power(cls, c, m, pi=1.0, C=None):
        """Common exponent c for every coordinate."""
        if C is not None:
            return cls(alpha=np.full(m, float(c)), C=C)
        return cls(alpha=np.full(m, float(c)), pi=pi)


class ExponentReport(FrozenModel):
    passed: bool
    theory_passed: bool
    binding_constraint: str
    details: str = ""
    required_minimum: Optional[float] = Field(default=None)

from typing import List, Literal, Optional
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from simplex_models.errors import (
    AsymmetricK, ConstraintViolated, DimensionMismatch, NonzeroEta,
)


Mode = Literal["general", "symmetric", "am1", "centered"]
NormalizabilityTag = Literal["CC1", "CC2", "CC3", "CC4", "Thm4-I", "Thm4-II", "Thm4-III"]

SYMMETRY_TOL = 1e-12


def frozen_array(value, ndim=None, name="array"):
    array = np.array(value, dtype=float, copy=True)
    if ndim is not None and array.ndim != ndim:
        raise DimensionMismatch(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    array.setflags(write=False)
    return array


class FrozenModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# ----------------------------------------------------------------------
# model specification
# ----------------------------------------------------------------------
class ModelSpec(FrozenModel):
    """Exponents (a, b) of the power interaction density and the parameter mode."""

    a: float = Field(ge=0)
    b: float = Field(ge=0)
    mode: Mode = "general"

    @model_validator(mode="after")
    def _check_am1(self):
        if self.mode == "am1" and (self.a != 0 or self.b != 0):
            raise ConstraintViolated(
                f"mode am1 requires a=b=0, got a={self.a}, b={self.b}"
            )
        return self

    @property
    def uses_log(self):
        return self.a == 0 or self.b == 0

    @property
    def has_eta(self):
        return self.mode != "centered"

    @property
    def symmetric(self):
        return self.mode in ("symmetric", "am1")


# ----------------------------------------------------------------------
# parameters
# ----------------------------------------------------------------------
class ParameterSet(FrozenModel):
    """Interaction matrix K (m x m) and linear vector eta (m)."""

    K: np.ndarray
    eta: np.ndarray

    @field_validator("K", mode="before")
    @classmethod
    def _freeze_K(cls, value):
        K = frozen_array(value, ndim=2, name="K")
        if K.shape[0] != K.shape[1]:
            raise DimensionMismatch(f"K must be square, got shape {K.shape}")
        return K

    @field_validator("eta", mode="before")
    @classmethod
    def _freeze_eta(cls, value):
        return frozen_array(value, ndim=1, name="eta")

    @model_validator(mode="after")
    def _check_shapes(self):
        if self.eta.shape[0] != self.K.shape[0]:
            raise DimensionMismatch(
                f"eta has {self.eta.shape[0]} entries but K is {self.K.shape[0]}x{self.K.shape[0]}"
            )
        return self

    @property
    def m(self):
        return self.K.shape[0]

    @classmethod
    def zeros(cls, m):
        return cls(K=np.zeros((m, m)), eta=np.zeros(m))

    @classmethod
    def for_mode(cls, K, eta, mode):
        """
        Build a ParameterSet honouring the constraints of `mode`:
        symmetric/am1 store K exactly symmetric, am1 derives the diagonal from
        the off-diagonals (K 1 = 0), centered requires eta = 0.
        """
        K = np.array(K, dtype=float)
        m = K.shape[0]
        eta = np.zeros(m) if eta is None else np.array(eta, dtype=float)
        scale = max(1.0, float(np.max(np.abs(K)))) if K.size else 1.0

        if mode in ("symmetric", "am1"):
            if np.max(np.abs(K - K.T)) > SYMMETRY_TOL * scale:
                raise AsymmetricK(f"K must be symmetric in mode {mode}")
            K = (K + K.T) / 2

        if mode == "am1":
            row_sums = K @ np.ones(m)
            if np.max(np.abs(row_sums)) > SYMMETRY_TOL * scale * m:
                raise ConstraintViolated(
                    f"mode am1 requires K 1 = 0, max |row sum| = {np.max(np.abs(row_sums)):.3e}"
                )
            off = K - np.diag(np.diag(K))
            K = off - np.diag(off.sum(axis=0))

        if mode == "centered" and np.any(eta != 0):
            raise NonzeroEta("mode centered requires eta = 0")

        return cls(K=K, eta=eta)

    def off_support(self, zero_tol):
        """Boolean m x m mask of off-diagonal entries with |kappa| > zero_tol."""
        mask = np.abs(self.K) > zero_tol
        np.fill_diagonal(mask, False)
        return mask


# ----------------------------------------------------------------------
# data
# ----------------------------------------------------------------------
class Composition(FrozenModel):
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value, ndim=1, name="composition")

    @property
    def m(self):
        return self.values.shape[0]


class Dataset(FrozenModel):
    """n x m matrix of compositions with provenance."""

    samples: np.ndarray
    labels: Optional[List[str]] = None
    provenance: Literal["proportions", "counts"] = "proportions"

    @field_validator("samples", mode="before")
    @classmethod
    def _freeze(cls, value):
        samples = frozen_array(value, ndim=2, name="samples")
        if samples.shape[0] < 1:
            raise DimensionMismatch("a dataset needs at least one sample")
        if samples.shape[1] < 2:
            raise DimensionMismatch("compositions need at least two components")
        return samples

    @model_validator(mode="after")
    def _check_labels(self):
        if self.labels is not None and len(self.labels) != self.m:
            raise DimensionMismatch(f"{len(self.labels)} labels for {self.m} components")
        return self

    @property
    def n(self):
        return self.samples.shape[0]

    @property
    def m(self):
        return self.samples.shape[1]

    def subset(self, rows):
        return Dataset(samples=self.samples[np.asarray(rows)], labels=self.labels, provenance=self.provenance)

    def compositions(self):
        for row in self.samples:
            yield Composition(values=row)


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------
class ValidityReport(FrozenModel):
    normalizable: Literal["proven", "unproven", "violated"]
    condition_hit: Optional[NormalizabilityTag] = None
    details: str = ""

    @model_validator(mode="after")
    def _tag_iff_proven(self):
        if (self.condition_hit is not None) != (self.normalizable == "proven"):
            raise ValueError("condition_hit is set exactly when normalizable is proven")
        return self


class IdentifiabilityReport(FrozenModel):
    identifiable: bool
    exception_case: Optional[Literal["I", "II", "III", "IV"]] = None
    details: str = ""

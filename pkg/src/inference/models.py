from typing import List, Literal, Tuple
import numpy as np
from pydantic import Field
from simplex_models.models import FrozenModel


class PermTestResult(FrozenModel):
    """
    Global and per-pair permutation p-values from one shared replicate
    stream. Local matrices carry NaN on the diagonal.
    """

    global_p: float = Field(ge=0, le=1)
    local_p: np.ndarray
    local_p_adjusted: np.ndarray
    B: int
    observed_stat: int
    replicate_stats: np.ndarray
    K1: np.ndarray
    K2: np.ndarray
    family: Literal["unordered", "ordered"]
    settings_fingerprint: str


class DifferentialNetwork(FrozenModel):
    alpha: float
    edges: List[Tuple[int, int, float]]
    degrees: List[int]
    hubs: List[int]

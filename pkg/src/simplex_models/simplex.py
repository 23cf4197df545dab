import numpy as np
from scipy.special import softmax
from config import Config
from simplex_models.errors import (
    AllZeroNoPseudocount, DimensionMismatch, DomainError, IndexOutOfRange,
    NegativeEntry, SumOutOfTolerance, ZeroEntryWithLogModel,
)
from simplex_models.models import Composition, Dataset


#############################################
# VALIDATION
#############################################
def _check_rows(rows, spec, tol):
    """Raise on the first row that is not a simplex point; return row sums."""
    if np.any(~np.isfinite(rows)):
        bad = int(np.argwhere(~np.isfinite(rows))[0][0])
        raise DomainError(f"row {bad} has a non-finite entry")

    negative = np.any(rows < 0, axis=1)
    if negative.any():
        bad = int(np.argmax(negative))
        raise NegativeEntry(f"row {bad} has a negative entry (min {rows[bad].min():.3e})")

    sums = rows.sum(axis=1)
    off = np.abs(sums - 1.0) > tol
    if off.any():
        bad = int(np.argmax(off))
        raise SumOutOfTolerance(f"row {bad} sums to {sums[bad]!r}, tolerance {tol:g}")

    if spec is not None and spec.uses_log:
        zeros = np.any(rows == 0, axis=1)
        if zeros.any():
            bad = int(np.argmax(zeros))
            raise ZeroEntryWithLogModel(
                f"row {bad} has a zero entry but a={spec.a}, b={spec.b} takes logs; "
                "close the counts with a pseudocount"
            )
    return sums


def validate_composition(x, spec=None, tol=Config.SIMPLEX_TOL):
    """
    Check that `x` lies on the probability simplex and return it as a
    Composition, renormalized to sum exactly to one.
    Zero entries are rejected when the model takes logs (a=0 or b=0).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise DimensionMismatch(f"a composition needs a vector of m >= 2 entries, got shape {x.shape}")
    sums = _check_rows(x[None, :], spec, tol)
    return Composition(values=x / sums[0])


def dataset_from_array(samples, spec=None, tol=Config.SIMPLEX_TOL, labels=None):
    """Validate every row of an n x m array at once and return a Dataset."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise DimensionMismatch(f"samples must be an n x m matrix, got shape {samples.shape}")
    if samples.shape[0] < 1 or samples.shape[1] < 2:
        raise DimensionMismatch(f"need n >= 1 samples of m >= 2 components, got shape {samples.shape}")
    sums = _check_rows(samples, spec, tol)
    return Dataset(samples=samples / sums[:, None], labels=labels)


#############################################
# COUNTS
#############################################
def close_counts(counts, pseudocount=0.0):
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise NegativeEntry("counts must be nonnegative")
    if pseudocount < 0:
        raise NegativeEntry("pseudocount must be nonnegative")
    shifted = counts + pseudocount
    total = shifted.sum()
    if total <= 0:
        raise AllZeroNoPseudocount("all counts are zero and no pseudocount was given")
    return Composition(values=shifted / total)


def close_dataset(counts, pseudocount=0.0, labels=None):
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != 2:
        raise DimensionMismatch(f"counts must be an n x m table, got shape {counts.shape}")
    if np.any(counts < 0):
        raise NegativeEntry("counts must be nonnegative")
    if pseudocount < 0:
        raise NegativeEntry("pseudocount must be nonnegative")
    shifted = counts + pseudocount
    totals = shifted.sum(axis=1)
    if np.any(totals <= 0):
        bad = int(np.argmax(totals <= 0))
        raise AllZeroNoPseudocount(f"row {bad} has only zero counts and no pseudocount was given")
    return Dataset(samples=shifted / totals[:, None], labels=labels, provenance="counts")


#############################################
# LOG-RATIOS
#############################################
def _resolve_ref(ref, m):
    if not -m <= ref < m:
        raise IndexOutOfRange(f"reference index {ref} out of range for m={m}")
    return ref % m


def alr_transform(x, ref=-1):
    """
    Additive log-ratio transform y_j = log(x_j / x_ref), j != ref.
    Works on a single composition or row-wise on an n x m array.
    """
    values = x.values if isinstance(x, Composition) else np.asarray(x, dtype=float)
    if np.any(values <= 0):
        raise DomainError("the additive log-ratio needs strictly positive entries")
    ref = _resolve_ref(ref, values.shape[-1])
    logs = np.log(values)
    return np.delete(logs, ref, axis=-1) - logs[..., ref:ref + 1]


def alr_inverse(y, ref=-1):
    """
    Additive logistic transform: x = exp(y) / (1 + sum exp(y)) with the
    reference coordinate set to 1 / (1 + sum exp(y)).
    """
    y = np.asarray(y, dtype=float)
    m = y.shape[-1] + 1
    ref = _resolve_ref(ref, m)
    padded = np.insert(y, ref, 0.0, axis=-1)
    return softmax(padded, axis=-1)

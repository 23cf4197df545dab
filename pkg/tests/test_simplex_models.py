import numpy as np
import pytest
from simplex_models.density import (
    am1_from_aitchison, check_identifiability, check_normalizability, log_kernel, log_kernel_batch,
)
from simplex_models.errors import (
    AllZeroNoPseudocount, AsymmetricGamma, AsymmetricK, ConstraintViolated, DimensionMismatch,
    DomainError, NegativeEntry, NonzeroEta, SumOutOfTolerance, ZeroEntryWithLogModel,
)
from simplex_models.models import Dataset, ModelSpec, ParameterSet
from simplex_models.simplex import (
    alr_inverse, alr_transform, close_counts, close_dataset, dataset_from_array, validate_composition,
)
from sampling.truth import banded_K


# ----------------------------------------------------------------------
# validation
# ----------------------------------------------------------------------
def test_validate_composition_accepts_simplex_point():
    x = validate_composition([0.2, 0.3, 0.5], ModelSpec(a=0, b=0))
    np.testing.assert_allclose(x.values, [0.2, 0.3, 0.5])


def test_validate_composition_rejects_sum():
    with pytest.raises(SumOutOfTolerance):
        validate_composition([0.5, 0.5, 0.1])


def test_validate_composition_rejects_zero_for_log_model():
    with pytest.raises(ZeroEntryWithLogModel):
        validate_composition([0.0, 0.4, 0.6], ModelSpec(a=0, b=1))


def test_validate_composition_allows_zero_for_power_model():
    x = validate_composition([0.0, 0.4, 0.6], ModelSpec(a=0.5, b=0.5))
    assert x.values[0] == 0.0


def test_validate_composition_rejects_negative():
    with pytest.raises(NegativeEntry):
        validate_composition([-0.1, 0.5, 0.6])


def test_validate_composition_renormalizes_within_tolerance():
    x = validate_composition([0.2, 0.3, 0.5 + 5e-10])
    assert abs(x.values.sum() - 1.0) < 1e-15


def test_validate_composition_needs_two_entries():
    with pytest.raises(DimensionMismatch):
        validate_composition([1.0])


def test_dataset_from_array_reports_bad_row():
    rows = np.array([[0.5, 0.5], [0.7, 0.4]])
    with pytest.raises(SumOutOfTolerance, match="row 1"):
        dataset_from_array(rows)


# ----------------------------------------------------------------------
# counts
# ----------------------------------------------------------------------
@pytest.mark.parametrize(
    "counts, pc, expected",
    [
        ((1, 1, 2), 0.0, (0.25, 0.25, 0.5)),
        ((0, 0, 4), 0.0, (0.0, 0.0, 1.0)),
        ((0, 1, 3), 0.5, (0.5 / 5.5, 1.5 / 5.5, 3.5 / 5.5)),
    ],
)
def test_close_counts(counts, pc, expected):
    np.testing.assert_allclose(close_counts(counts, pc).values, expected)


def test_close_counts_all_zero():
    with pytest.raises(AllZeroNoPseudocount):
        close_counts([0, 0, 0])


def test_close_dataset_marks_provenance():
    data = close_dataset([[1, 3], [2, 2]], labels=["a", "b"])
    assert data.provenance == "counts"
    np.testing.assert_allclose(data.samples, [[0.25, 0.75], [0.5, 0.5]])


# ----------------------------------------------------------------------
# kernel
# ----------------------------------------------------------------------
def test_log_kernel_zero_parameters():
    for a, b in [(0, 0), (0.5, 1), (2, 0)]:
        assert log_kernel(ModelSpec(a=a, b=b), ParameterSet.zeros(3), [0.2, 0.3, 0.5]) == 0.0


def test_log_kernel_dirichlet():
    alpha = np.array([1.0, 2.0, 4.0])
    x = np.array([0.2, 0.3, 0.5])
    params = ParameterSet(K=np.zeros((3, 3)), eta=alpha - 1)
    value = log_kernel(ModelSpec(a=0, b=0), params, x)
    assert value == pytest.approx(np.sum((alpha - 1) * np.log(x)))


def test_log_kernel_hand_value():
    params = ParameterSet(K=np.eye(2), eta=np.zeros(2))
    assert log_kernel(ModelSpec(a=1, b=1), params, [0.5, 0.5]) == pytest.approx(-0.25)


def test_log_kernel_domain_error():
    with pytest.raises(DomainError):
        log_kernel(ModelSpec(a=0, b=1), ParameterSet.zeros(3), np.array([0.0, 0.5, 0.5]))


def test_log_kernel_permutation_invariance(rng):
    m = 5
    K = rng.normal(size=(m, m))
    eta = rng.normal(size=m)
    x = rng.dirichlet(np.ones(m), size=4)
    perm = rng.permutation(m)
    spec = ModelSpec(a=0.5, b=1.5)
    base = log_kernel_batch(spec, ParameterSet(K=K, eta=eta), x)
    permuted = log_kernel_batch(spec, ParameterSet(K=K[np.ix_(perm, perm)], eta=eta[perm]), x[:, perm])
    np.testing.assert_allclose(base, permuted, rtol=1e-12)


# ----------------------------------------------------------------------
# normalizability
# ----------------------------------------------------------------------
def test_normalizability_cc1():
    report = check_normalizability(ModelSpec(a=1, b=1), ParameterSet.zeros(3))
    assert (report.normalizable, report.condition_hit) == ("proven", "CC1")


def test_normalizability_path_laplacian():
    report = check_normalizability(ModelSpec(a=0, b=0), banded_K(4, 1))
    assert (report.normalizable, report.condition_hit) == ("proven", "Thm4-II")


def test_normalizability_unproven():
    params = ParameterSet(K=np.zeros((3, 3)), eta=[-2.0, 0.0, 0.0])
    report = check_normalizability(ModelSpec(a=0, b=0), params)
    assert report.normalizable == "unproven"
    assert report.condition_hit is None


def test_normalizability_violated_cc2():
    params = ParameterSet(K=np.eye(3), eta=[-2.0, 0.0, 0.0])
    assert check_normalizability(ModelSpec(a=1, b=0), params).normalizable == "violated"


def test_normalizability_positive_definite():
    params = ParameterSet(K=np.eye(3), eta=[-5.0, -5.0, -5.0])
    report = check_normalizability(ModelSpec(a=0, b=0), params)
    assert report.condition_hit == "Thm4-I"


# ----------------------------------------------------------------------
# identifiability
# ----------------------------------------------------------------------
@pytest.mark.parametrize(
    "a, b, case",
    [(0, 0, None), (1, 1, "I"), (1, 2, "II"), (1, 0, "III"), (1, 0.5, "III"), (0.5, 1, "IV"), (2, 4, "IV")],
)
def test_identifiability_cases(a, b, case):
    report = check_identifiability(a, b)
    assert report.identifiable == (case is None)
    assert report.exception_case == case


def test_identifiability_grid():
    grid = [(a, b) for a in (0, 0.5, 1, 1.5, 2) for b in (0, 0.5, 1, 2)]
    assert len(grid) == 20
    for a, b in grid:
        expected = a != 1 and not (2 * a == b and b > 0)
        assert check_identifiability(a, b).identifiable == expected


# ----------------------------------------------------------------------
# Aitchison correspondence
# ----------------------------------------------------------------------
def test_am1_from_aitchison_zero():
    params = am1_from_aitchison(np.ones(4), np.zeros((4, 4)))
    assert not params.K.any()
    assert not params.eta.any()


def test_am1_from_aitchison_single_pair():
    gamma = np.zeros((3, 3))
    gamma[0, 1] = gamma[1, 0] = 1.0
    K = am1_from_aitchison(np.ones(3), gamma).K
    expected = np.array([[2.0, -2.0, 0.0], [-2.0, 2.0, 0.0], [0.0, 0.0, 0.0]])
    np.testing.assert_array_equal(K, expected)


def test_am1_from_aitchison_constraints(rng):
    for m in range(2, 7):
        gamma = rng.normal(size=(m, m))
        gamma = gamma + gamma.T
        np.fill_diagonal(gamma, 0.0)
        params = am1_from_aitchison(rng.normal(size=m), gamma)
        assert np.abs(params.K.sum(axis=1)).max() < 1e-14 * max(1.0, np.abs(gamma).sum())
        np.testing.assert_array_equal(params.K, params.K.T)


def test_am1_from_aitchison_asymmetric():
    gamma = np.zeros((3, 3))
    gamma[0, 1] = 1.0
    with pytest.raises(AsymmetricGamma):
        am1_from_aitchison(np.ones(3), gamma)


# ----------------------------------------------------------------------
# log-ratios
# ----------------------------------------------------------------------
def test_alr_uniform():
    np.testing.assert_allclose(alr_transform(np.full(4, 0.25)), np.zeros(3), atol=1e-15)


def test_alr_hand_value():
    np.testing.assert_allclose(alr_transform([0.2, 0.3, 0.5]), np.log([0.4, 0.6]))


def test_alr_round_trip(rng):
    x = rng.dirichlet(np.ones(6), size=20)
    for ref in (0, 3, -1):
        np.testing.assert_allclose(alr_inverse(alr_transform(x, ref), ref), x, atol=1e-12)
    y = rng.normal(size=(20, 5))
    np.testing.assert_allclose(alr_transform(alr_inverse(y)), y, atol=1e-12)


def test_alr_zero_entry():
    with pytest.raises(DomainError):
        alr_transform([0.0, 0.5, 0.5])


# ----------------------------------------------------------------------
# types
# ----------------------------------------------------------------------
def test_am1_spec_requires_log_exponents():
    with pytest.raises(ConstraintViolated):
        ModelSpec(a=1, b=0, mode="am1")


def test_for_mode_am1_derives_diagonal():
    K = banded_K(4, 2).K.copy()
    K[np.diag_indices(4)] = 99.0
    off = K - np.diag(np.diag(K))
    with pytest.raises(ConstraintViolated):
        ParameterSet.for_mode(K, None, "am1")
    params = ParameterSet.for_mode(off - np.diag(off.sum(axis=0)), None, "am1")
    np.testing.assert_allclose(params.K, banded_K(4, 2).K)


def test_for_mode_rejects_asymmetric():
    K = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(AsymmetricK):
        ParameterSet.for_mode(K, None, "symmetric")


def test_for_mode_centered_needs_zero_eta():
    with pytest.raises(NonzeroEta):
        ParameterSet.for_mode(np.eye(2), [1.0, 0.0], "centered")


def test_dataset_needs_two_components():
    with pytest.raises(DimensionMismatch):
        Dataset(samples=np.ones((3, 1)))


def test_parameters_are_read_only():
    params = ParameterSet.zeros(3)
    with pytest.raises(ValueError):
        params.K[0, 0] = 1.0

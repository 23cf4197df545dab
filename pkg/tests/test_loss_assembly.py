import numpy as np
import pytest
import scipy.linalg
from config import Config
from simplex_models.errors import (
    DeltaBelowOne, DomainError, EmptyJ, IndexOutOfRange, InvalidWeights, NonpositiveN, WrongMode,
)
from simplex_models.models import Dataset, ModelSpec, ParameterSet
from weighting.models import WeightSpec
from loss_assembly.builder import assemble, empirical_loss_direct, resolve_J
from loss_assembly.models import ParameterLayout, QuadraticScoreLoss
from loss_assembly.transforms import (
    apply_diagonal_multiplier, build_C_matrix, diagonal_multiplier_bound, loss_fingerprint, transform_am1,
)
from conftest import power_weights, random_dataset


def identity_loss(spec, m):
    layout = ParameterLayout.for_spec(spec, m)
    return QuadraticScoreLoss(
        Gamma=np.eye(layout.dim), g=np.zeros(layout.dim), J=(m - 1,),
        weight_spec=WeightSpec.power(0.0, m), spec=spec, layout=layout, n=1,
    )


def random_params(rng, m, symmetric=False, rows_sum_to_zero=False):
    K = rng.normal(size=(m, m))
    if symmetric or rows_sum_to_zero:
        K = K + K.T
    if rows_sum_to_zero:
        np.fill_diagonal(K, 0.0)
        K -= np.diag(K.sum(axis=1))
    return ParameterSet(K=K, eta=rng.normal(size=m))


# ----------------------------------------------------------------------
# dropped coordinates
# ----------------------------------------------------------------------
def test_resolve_J_default_is_last():
    assert resolve_J(5) == (4,)


def test_resolve_J_sorts_and_deduplicates():
    assert resolve_J(5, [3, 0, 3]) == (0, 3)


def test_resolve_J_random_is_seeded():
    first = resolve_J(20, count=5, seed=11, policy="random")
    assert first == resolve_J(20, count=5, seed=11, policy="random")
    assert len(first) == 5
    assert list(first) == sorted(first)


def test_resolve_J_even():
    assert resolve_J(10, count=5, policy="even") == (1, 3, 5, 7, 9)


def test_resolve_J_errors():
    with pytest.raises(EmptyJ):
        resolve_J(4, [])
    with pytest.raises(IndexOutOfRange):
        resolve_J(4, [4])


# ----------------------------------------------------------------------
# layout
# ----------------------------------------------------------------------
def test_layout_pack_unpack():
    layout = ParameterLayout(m=3)
    K = np.arange(9.0).reshape(3, 3)
    theta = layout.pack(ParameterSet(K=K, eta=[1.0, 2.0, 3.0]))
    assert theta[layout.k_index(2, 1)] == K[2, 1]
    assert theta[layout.eta_index(0)] == 1.0
    np.testing.assert_array_equal(layout.unpack(theta).K, K)


def test_off_diagonal_layout_derives_diagonal(rng):
    layout = ParameterLayout(m=4, off_diagonal=True, tie_pairs=True)
    params = random_params(rng, 4, rows_sum_to_zero=True)
    theta = layout.pack(params)
    assert theta.shape == (4 * 3 + 4,)
    np.testing.assert_allclose(layout.unpack(theta).K, params.K, atol=1e-12)
    with pytest.raises(IndexOutOfRange):
        layout.k_index(1, 1)


def test_tied_layout_groups_pairs():
    _, groups = ParameterLayout(m=3, tie_pairs=True).tying_matrix()
    kinds = [kind for _, kind in groups]
    assert kinds.count("K_off") == 3
    assert kinds.count("K_diag") == 3
    assert kinds.count("eta") == 3


# ----------------------------------------------------------------------
# assembly
# ----------------------------------------------------------------------
def test_single_sample_hand_values():
    data = Dataset(samples=[[0.4, 0.6]])
    weights = WeightSpec.power(2.0, 2, C=[10.0])
    loss = assemble(data, ModelSpec(a=1, b=1), weights, J=[1])

    u = np.array([-0.4, -0.6, 0.4, 0.6, 1.0, -1.0])
    v = np.array([-1.0, 1.0, 1.0, -1.0, 0.0, 0.0])
    np.testing.assert_allclose(loss.Gamma, 0.16 * np.outer(u, u), atol=1e-14)
    np.testing.assert_allclose(loss.g, -(0.8 * u + 0.16 * v), atol=1e-14)

    params = ParameterSet(K=np.eye(2), eta=np.zeros(2))
    direct = empirical_loss_direct(data, ModelSpec(a=1, b=1), weights, params, J=[1])
    assert direct == pytest.approx(-0.1568)
    assert loss.evaluate(params) == pytest.approx(direct)


def test_zero_parameters_give_zero_loss(dirichlet_data):
    spec = ModelSpec(a=0.5, b=0.5)
    weights = power_weights(4)
    loss = assemble(dirichlet_data, spec, weights)
    zeros = ParameterSet.zeros(4)
    assert loss.evaluate(zeros) == 0.0
    assert empirical_loss_direct(dirichlet_data, spec, weights, zeros) == 0.0


def test_quadratic_matches_direct_evaluation(rng):
    data = random_dataset(rng, 20, 4)
    spec = ModelSpec(a=0.5, b=0.5)
    weights = power_weights(4)
    loss = assemble(data, spec, weights, J=[0, 3])
    for _ in range(50):
        params = random_params(rng, 4)
        direct = empirical_loss_direct(data, spec, weights, params, J=[0, 3])
        assert abs(loss.evaluate(params) - direct) < 1e-8 * (1 + abs(direct))


@pytest.mark.parametrize("a", [0.0, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("b", [0.0, 0.5, 1.0, 2.0])
def test_direct_oracle_across_exponents(rng, a, b):
    spec = ModelSpec(a=a, b=b)
    for trial in range(7):
        m = int(rng.integers(2, 7))
        n = int(rng.integers(1, 51))
        data = random_dataset(rng, n, m)
        weights = power_weights(m, pi=0.8)
        J = resolve_J(m, count=2, seed=trial, policy="random")
        loss = assemble(data, spec, weights, J=J)
        first, second = random_params(rng, m), random_params(rng, m)
        direct_first = empirical_loss_direct(data, spec, weights, first, J=J)
        direct_second = empirical_loss_direct(data, spec, weights, second, J=J)
        quadratic = loss.evaluate(first) - loss.evaluate(second)
        scale = 1 + abs(direct_first) + abs(direct_second)
        assert abs(quadratic - (direct_first - direct_second)) < 1e-8 * scale


def test_gamma_symmetric_and_psd(dirichlet_data):
    loss = assemble(dirichlet_data, ModelSpec(a=0, b=0), power_weights(4), J=[0, 1, 2, 3])
    G = loss.dense_gamma()
    assert np.abs(G - G.T).max() < 1e-12
    assert np.linalg.eigvalsh(G).min() > -1e-10 * max(1.0, np.abs(G).max())


def test_single_dropped_coordinate_block_pattern(dirichlet_data):
    m = 4
    loss = assemble(dirichlet_data, ModelSpec(a=0.5, b=1), power_weights(m), J=[3])
    layout = loss.layout
    G = loss.dense_gamma()
    col = lambda j: [layout.k_index(k, j) for k in range(m)]
    assert not G[np.ix_(col(0), col(1))].any()
    assert G[np.ix_(col(0), col(3))].any()
    assert G[np.ix_(col(3), col(3))].any()


def test_averaging_over_J(dirichlet_data):
    spec = ModelSpec(a=0.5, b=0.5)
    weights = power_weights(4, pi=0.6)
    both = assemble(dirichlet_data, spec, weights, J=[0, 3])
    first = assemble(dirichlet_data, spec, weights, J=[0])
    last = assemble(dirichlet_data, spec, weights, J=[3])
    np.testing.assert_allclose(both.Gamma, (first.Gamma + last.Gamma) / 2, atol=1e-13)
    np.testing.assert_allclose(both.g, (first.g + last.g) / 2, atol=1e-13)


def test_sparse_assembly_matches_dense(monkeypatch, dirichlet_data):
    spec = ModelSpec(a=0, b=0, mode="symmetric")
    weights = power_weights(4)
    dense = assemble(dirichlet_data, spec, weights, J=[1, 3])
    monkeypatch.setattr(Config, "DENSE_MAX_M", 2)
    sparse = assemble(dirichlet_data, spec, weights, J=[1, 3])
    assert sparse.is_sparse
    np.testing.assert_allclose(sparse.dense_gamma(), dense.dense_gamma(), atol=1e-12)
    np.testing.assert_allclose(sparse.g, dense.g, atol=1e-12)


def test_centered_mode_drops_eta(dirichlet_data):
    loss = assemble(dirichlet_data, ModelSpec(a=0.5, b=0.5, mode="centered"), power_weights(4))
    assert loss.g.shape == (16,)
    assert loss.Gamma.shape == (16, 16)


def test_assemble_rejects_zero_entries_for_log_model(rng):
    data = random_dataset(rng, 10, 3, zeros=True)
    with pytest.raises(DomainError):
        assemble(data, ModelSpec(a=0, b=0), power_weights(3))


def test_assemble_allows_zero_entries_for_power_model(rng):
    data = random_dataset(rng, 10, 3, zeros=True)
    loss = assemble(data, ModelSpec(a=1, b=1), power_weights(3))
    assert np.all(np.isfinite(loss.dense_gamma()))


def test_boundary_derivative_term_counts_at_zero_entry():
    data = Dataset(samples=[[0.0, 0.4, 0.6]])
    spec = ModelSpec(a=1, b=1)
    weights = WeightSpec.power(1.0, 3, C=[np.inf, np.inf])
    params = ParameterSet(K=np.zeros((3, 3)), eta=[1.0, 0.0, 0.0])
    # h~_0 = 0 at x_0 = 0 but its slope is 1 and d_0 log p = eta_0 - eta_2 = 1
    direct = empirical_loss_direct(data, spec, weights, params, J=[2])
    assert direct == pytest.approx(1.0)
    assert assemble(data, spec, weights, J=[2]).evaluate(params) == pytest.approx(1.0)


def test_infinite_weight_slope_at_zero_entry():
    data = Dataset(samples=[[0.0, 0.4, 0.6]])
    spec = ModelSpec(a=1, b=1)
    weights = WeightSpec.power(0.5, 3, C=[np.inf, np.inf])
    with pytest.raises(DomainError):
        assemble(data, spec, weights, J=[2])
    with pytest.raises(DomainError):
        empirical_loss_direct(data, spec, weights, ParameterSet.zeros(3), J=[2])


def test_assemble_rejects_mismatched_weights(dirichlet_data):
    with pytest.raises(InvalidWeights):
        assemble(dirichlet_data, ModelSpec(a=0, b=0), power_weights(3))


def test_assemble_rejects_failing_exponents(dirichlet_data):
    with pytest.raises(InvalidWeights):
        assemble(dirichlet_data, ModelSpec(a=0.5, b=0.5), WeightSpec.power(0.2, 4))


# ----------------------------------------------------------------------
# diagonal multiplier
# ----------------------------------------------------------------------
def test_diagonal_multiplier_bound_values():
    assert diagonal_multiplier_bound(80, 100, 4) == pytest.approx(1.3518, abs=1e-4)
    assert diagonal_multiplier_bound(1000, 100, 4) == pytest.approx(1.0995, abs=1e-4)


def test_diagonal_multiplier_bound_monotone():
    assert diagonal_multiplier_bound(100, 10, 4) > diagonal_multiplier_bound(200, 10, 4)
    assert diagonal_multiplier_bound(100, 10, 4) < diagonal_multiplier_bound(100, 20, 4)
    assert diagonal_multiplier_bound(100, 10, 4) < diagonal_multiplier_bound(100, 10, 5)
    assert diagonal_multiplier_bound(10**12, 10, 4) == pytest.approx(1.0, abs=1e-5)


def test_diagonal_multiplier_bound_needs_samples():
    with pytest.raises(NonpositiveN):
        diagonal_multiplier_bound(0, 10, 4)


def test_apply_diagonal_multiplier(dirichlet_data):
    loss = assemble(dirichlet_data, ModelSpec(a=0.5, b=0.5), power_weights(4))
    assert apply_diagonal_multiplier(loss, 1.0).gamma_delta() is loss.Gamma
    doubled = apply_diagonal_multiplier(loss, 2.0).dense_gamma()
    G = loss.dense_gamma()
    assert np.trace(doubled) == pytest.approx(2 * np.trace(G))
    np.testing.assert_allclose(doubled - G, np.diag(np.diag(G)), atol=1e-14)


def test_apply_diagonal_multiplier_rejects_shrinking(dirichlet_data):
    loss = assemble(dirichlet_data, ModelSpec(a=0.5, b=0.5), power_weights(4))
    with pytest.raises(DeltaBelowOne):
        apply_diagonal_multiplier(loss, 0.5)


def test_held_out_value_ignores_delta(dirichlet_data, rng):
    loss = apply_diagonal_multiplier(assemble(dirichlet_data, ModelSpec(a=0.5, b=0.5), power_weights(4)), 3.0)
    params = random_params(rng, 4)
    plain = loss.model_copy(update={"delta": 1.0})
    assert loss.evaluate(params, with_delta=False) == pytest.approx(plain.evaluate(params))


# ----------------------------------------------------------------------
# A^(m-1) transform
# ----------------------------------------------------------------------
def test_build_C_matrix_examples():
    np.testing.assert_array_equal(build_C_matrix(1, 2), [[1.0, -1.0]])
    np.testing.assert_array_equal(build_C_matrix(0, 3), [[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])


def test_build_C_matrix_annihilates_ones():
    for m in range(2, 7):
        for j in range(m):
            assert not build_C_matrix(j, m).sum(axis=1).any()
    with pytest.raises(IndexOutOfRange):
        build_C_matrix(3, 3)


def test_transform_identity_gamma(am1_spec):
    m = 3
    transformed = transform_am1(identity_loss(am1_spec, m))
    k_dim = m * (m - 1)
    expected = scipy.linalg.block_diag(*[build_C_matrix(j, m) @ build_C_matrix(j, m).T for j in range(m)])
    np.testing.assert_allclose(transformed.Gamma[:k_dim, :k_dim], expected)
    assert np.all(np.diag(expected) == 2.0)
    np.testing.assert_allclose(transformed.Gamma[k_dim:, k_dim:], np.eye(m))
    assert transformed.g.shape == (m * (m - 1) + m,)


def test_transform_preserves_loss_values(rng, am1_spec):
    data = random_dataset(rng, 25, 5)
    loss = assemble(data, am1_spec, power_weights(5), J=[1, 4])
    transformed = transform_am1(loss)
    for _ in range(10):
        params = random_params(rng, 5, rows_sum_to_zero=True)
        original = loss.evaluate(params)
        assert transformed.evaluate(params) == pytest.approx(original, rel=1e-10, abs=1e-10)


def test_transform_sparse_matches_dense(monkeypatch, rng, am1_spec):
    data = random_dataset(rng, 25, 4)
    dense = transform_am1(assemble(data, am1_spec, power_weights(4)))
    monkeypatch.setattr(Config, "DENSE_MAX_M", 2)
    sparse = transform_am1(assemble(data, am1_spec, power_weights(4)))
    np.testing.assert_allclose(sparse.dense_gamma(), dense.dense_gamma(), atol=1e-12)


def test_transform_needs_am1_mode(dirichlet_data, am1_spec):
    with pytest.raises(WrongMode):
        transform_am1(assemble(dirichlet_data, ModelSpec(a=0, b=0), power_weights(4)))
    transformed = transform_am1(assemble(dirichlet_data, am1_spec, power_weights(4)))
    with pytest.raises(WrongMode):
        transform_am1(transformed)


def test_transformed_delta_leaves_eta_block(dirichlet_data, am1_spec):
    loss = transform_am1(assemble(dirichlet_data, am1_spec, power_weights(4)))
    scaled = apply_diagonal_multiplier(loss, 2.0).dense_gamma()
    k_dim = loss.layout.k_dim
    G = loss.dense_gamma()
    np.testing.assert_allclose(np.diag(scaled)[:k_dim], 2 * np.diag(G)[:k_dim])
    np.testing.assert_allclose(np.diag(scaled)[k_dim:], np.diag(G)[k_dim:])


def test_loss_fingerprint_tracks_delta(dirichlet_data):
    loss = assemble(dirichlet_data, ModelSpec(a=0.5, b=0.5), power_weights(4))
    assert loss_fingerprint(loss) == loss_fingerprint(loss.model_copy())
    assert loss_fingerprint(loss) != loss_fingerprint(apply_diagonal_multiplier(loss, 1.5))

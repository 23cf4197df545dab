import numpy as np
from joblib import Parallel, delayed
from config import Config
from utils import root_logger, spawn_seeds
from simplex_models.errors import DimensionMismatch, TooFewSamples
from simplex_models.models import Dataset
from evaluation.cross_validation import fit_with_cv
from evaluation.metrics import hub_nodes, node_degrees
from inference.models import DifferentialNetwork, PermTestResult
from inference.multiple_testing import adjust_local, pair_family


def support_difference(K1, K2, zero_tol=Config.SUPPORT_ZERO_TOL):
    """Number of ordered off-diagonal pairs in exactly one of the two supports."""
    off = ~np.eye(K1.shape[0], dtype=bool)
    return int(((np.abs(K1) > zero_tol) ^ (np.abs(K2) > zero_tol))[off].sum())


def _fit_groups(samples1, samples2, settings, cv_seed):
    # lambda is re-selected by cross validation in each group
    first = fit_with_cv(Dataset(samples=samples1), settings, seed=cv_seed)
    second = fit_with_cv(Dataset(samples=samples2), settings, seed=cv_seed)
    if first.settings_fingerprint != second.settings_fingerprint:
        raise RuntimeError("groups were fitted under different configurations")
    return first.params.K, second.params.K, first.settings_fingerprint


def _replicate(pooled, n1, settings, seed, cv_seed):
    order = np.random.default_rng(seed).permutation(pooled.shape[0])
    K1, K2, fingerprint = _fit_groups(pooled[order[:n1]], pooled[order[n1:]], settings, cv_seed)
    return support_difference(K1, K2), np.abs(K1 - K2), fingerprint


def run_permutation_tests(d1, d2, settings, B, seed=0, threads=None):
    """
    Global (support symmetric difference) and local (|kappa1_jk - kappa2_jk|)
    permutation tests from one stream of B relabelled refits. The h exponent,
    dropped coordinates and diagonal multiplier stay at the observed-data
    settings in every replicate.
    """
    if d1.m != d2.m:
        raise DimensionMismatch(f"groups have m={d1.m} and m={d2.m}")
    if B < 1:
        raise TooFewSamples(f"need at least one permutation replicate, got B={B}")
    threads = settings.threads if threads is None else threads
    m, n1 = d1.m, d1.n

    K1, K2, fingerprint = _fit_groups(d1.samples, d2.samples, settings, seed)
    observed = support_difference(K1, K2)
    observed_diff = np.abs(K1 - K2)
    root_logger.info(f"Observed support difference {observed} edges; running {B} permutations")

    pooled = np.vstack([d1.samples, d2.samples])
    replicates = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_replicate)(pooled, n1, settings, s, seed) for s in spawn_seeds(seed, B)
    )
    if any(r[2] != fingerprint for r in replicates):
        raise RuntimeError("permutation replicates used a different configuration")

    stats = np.array([r[0] for r in replicates])
    diffs = np.stack([r[1] for r in replicates])
    global_p = float(np.mean(observed <= stats))
    local_p = np.mean(observed_diff[None] <= diffs, axis=0)
    np.fill_diagonal(local_p, np.nan)

    symmetric = settings.spec.symmetric
    result = PermTestResult(
        global_p=global_p,
        local_p=local_p,
        local_p_adjusted=adjust_local(local_p, symmetric),
        B=B,
        observed_stat=observed,
        replicate_stats=stats,
        K1=K1,
        K2=K2,
        family="unordered" if symmetric else "ordered",
        settings_fingerprint=fingerprint,
    )
    root_logger.info(f"Global permutation p-value {global_p:.4g} (B={B})")
    return result


def global_perm_test(d1, d2, settings, B, seed=0):
    return run_permutation_tests(d1, d2, settings, B, seed).global_p


def local_perm_test(d1, d2, settings, B, seed=0):
    return run_permutation_tests(d1, d2, settings, B, seed).local_p


def differential_edges(result, alpha=0.05, min_degree=5):
    """Pairs with BY-adjusted p below alpha, their node degrees and the hubs."""
    m = result.local_p.shape[0]
    rows, cols = pair_family(m, result.family == "unordered")
    adjusted = result.local_p_adjusted[rows, cols]
    keep = adjusted < alpha
    edges = [(int(j), int(k), float(p)) for j, k, p in zip(rows[keep], cols[keep], adjusted[keep])]
    pairs = [(j, k) for j, k, _ in edges]
    return DifferentialNetwork(
        alpha=alpha,
        edges=edges,
        degrees=node_degrees(pairs, m).tolist(),
        hubs=hub_nodes(pairs, m, min_degree),
    )

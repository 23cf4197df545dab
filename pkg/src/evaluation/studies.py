"""
Simulation studies on banded A^(m-1) models: AUC over the (h exponent,
truncation quantile) grid, single versus averaged dropped coordinates, and
the effect of the diagonal multiplier.
"""
import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from config import Config
from utils import root_logger, spawn_seeds
from simplex_models.models import ModelSpec
from loss_assembly.transforms import diagonal_multiplier_bound
from sampling.exact import sample_logistic_normal
from sampling.mcmc import sample_ab_mcmc
from sampling.models import McmcOptions
from sampling.truth import aitchison_truth
from evaluation.cross_validation import fit_with_cv
from evaluation.metrics import mean_roc, norm_errors, roc_auc, tpr_fpr
from evaluation.models import EstimationSettings


AM1 = ModelSpec(a=0.0, b=0.0, mode="am1")
H_EXPONENTS = tuple(np.arange(0, 9) / 4)
QUANTILES = (0.2, 0.4, 0.6, 0.8, 1.0)


def simulate_am1(m, s, n, seed, sampler="mcmc", mcmc_opts=None):
    """
    (data, truth) for the banded Laplacian truth. "mcmc" draws from eta = 0;
    "logistic" uses eta = -1 so the alr coordinates are exactly Gaussian.
    """
    truth = aitchison_truth(m, s)
    if sampler == "logistic":
        data = sample_logistic_normal(truth.K, -np.ones(m), n, seed)
        return data, truth
    opts = McmcOptions(seed=seed) if mcmc_opts is None else mcmc_opts.model_copy(update={"seed": seed})
    return sample_ab_mcmc(AM1, truth, n, opts), truth


def _settings(c, pi, J_count, J_seed, **overrides):
    return EstimationSettings(
        spec=AM1, h_exponent=c, pi=pi, J_policy="random", J_count=J_count, J_seed=J_seed, **overrides,
    )


#############################################
# AUC OVER (c, pi)
#############################################
def _auc_trial(m, s, n, seed, exponents, quantiles, J_count, sampler, with_cv, mcmc_opts):
    data, truth = simulate_am1(m, s, n, seed, sampler, mcmc_opts)
    rows = []
    for pi in quantiles:
        for c in exponents:
            result = fit_with_cv(data, _settings(c, pi, J_count, seed), seed=seed, cross_validation=with_cv)
            row = {"seed": seed, "c": float(c), "pi": float(pi), "auc": roc_auc(result.path, truth).auc}
            if with_cv:
                row.update({f"{k}_error": v for k, v in norm_errors(result.params, truth, normalize=True).items()})
            rows.append(row)
    return rows


def auc_study(m=20, s=2, n=200, trials=5, seed=0, exponents=H_EXPONENTS, quantiles=QUANTILES,
              J_count=Config.J_COUNT, sampler="mcmc", with_cv=False, mcmc_opts=None, threads=Config.THREADS):
    """
    Mean AUC per (c, pi) over seeded trials, and each cell relative to h = 1
    (c = 0) at the same pi. With `with_cv` the CV-selected estimate's
    normalized norm errors are averaged as well.
    """
    seeds = spawn_seeds(seed, trials)
    per_trial = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_auc_trial)(m, s, n, t, exponents, quantiles, J_count, sampler, with_cv, mcmc_opts)
        for t in seeds
    )
    raw = pd.DataFrame([row for rows in per_trial for row in rows])
    table = raw.drop(columns="seed").groupby(["c", "pi"], as_index=False).mean()
    table["auc_se"] = raw.groupby(["c", "pi"])["auc"].sem().values if trials > 1 else 0.0
    baseline = table[table["c"] == 0].set_index("pi")["auc"]
    table["relative_auc"] = table["auc"] / table["pi"].map(baseline)
    root_logger.info(f"AUC study done: {trials} trials, {len(table)} (c, pi) cells")
    return table


#############################################
# SINGLE VERSUS AVERAGED J
#############################################
def _J_trial(m, s, n, seed, c, pi, k, sampler, mcmc_opts):
    data, truth = simulate_am1(m, s, n, seed, sampler, mcmc_opts)
    J = [int(d) for d in np.random.default_rng(seed).choice(m, size=k, replace=False)]
    averaged = fit_with_cv(
        data, _settings(c, pi, k, seed).model_copy(update={"J": J, "J_policy": "explicit"}),
        cross_validation=False,
    )
    singles = [
        roc_auc(fit_with_cv(
            data, _settings(c, pi, 1, seed).model_copy(update={"J": [d], "J_policy": "explicit"}),
            cross_validation=False,
        ).path, truth).auc
        for d in J
    ]
    return {
        "seed": seed,
        "averaged": roc_auc(averaged.path, truth).auc,
        "single_mean": float(np.mean(singles)),
        "single_max": float(np.max(singles)),
    }


def J_comparison(m=20, s=2, n=200, trials=5, seed=0, c=2.0, pi=1.0, k=Config.J_COUNT,
                 sampler="mcmc", mcmc_opts=None, threads=Config.THREADS):
    """AUC of the |J|=k averaged loss against the mean and the max of the k single-J AUCs."""
    rows = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_J_trial)(m, s, n, t, c, pi, k, sampler, mcmc_opts) for t in spawn_seeds(seed, trials)
    )
    return pd.DataFrame(rows)


#############################################
# DIAGONAL MULTIPLIER
#############################################
def _delta_trial(m, s, n, seed, deltas, c, pi, J_count, sampler, mcmc_opts):
    data, truth = simulate_am1(m, s, n, seed, sampler, mcmc_opts)
    out = []
    for delta in deltas:
        result = fit_with_cv(data, _settings(c, pi, J_count, seed, delta=delta), seed=seed)
        tpr, fpr = tpr_fpr(result.params, truth)
        out.append((delta, roc_auc(result.path, truth), fpr, tpr))
    return out


def delta_study(m=20, s=2, n=200, trials=5, seed=0, deltas=None, c=2.0, pi=1.0,
                J_count=Config.J_COUNT, sampler="mcmc", mcmc_opts=None, threads=Config.THREADS):
    """
    Mean ROC per diagonal multiplier plus the mean (fpr, tpr) of the
    CV-selected estimate. `deltas` defaults to the upper bound and a few
    larger multiples. Returns (summary, roc_table).
    """
    if deltas is None:
        bound = diagonal_multiplier_bound(n, m, Config.DELTA_TAU)
        deltas = (1.0, bound, 2.0, 5.0, 10.0)
    trials_out = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_delta_trial)(m, s, n, t, deltas, c, pi, J_count, sampler, mcmc_opts)
        for t in spawn_seeds(seed, trials)
    )

    summary, roc_rows = [], []
    for i, delta in enumerate(deltas):
        entries = [trial[i] for trial in trials_out]
        grid, tpr = mean_roc([e[1] for e in entries])
        summary.append({
            "delta": float(delta),
            "auc": float(np.mean([e[1].auc for e in entries])),
            "cv_fpr": float(np.mean([e[2] for e in entries])),
            "cv_tpr": float(np.mean([e[3] for e in entries])),
        })
        roc_rows.extend({"delta": float(delta), "fpr": f, "tpr": t} for f, t in zip(grid, tpr))
    return pd.DataFrame(summary), pd.DataFrame(roc_rows)

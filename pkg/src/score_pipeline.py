import os
import sys
import argparse
import numpy as np
import pandas as pd
import pydantic
from config import Config
from utils import root_logger, stable_hash
from simplex_models.errors import MismatchedTruth, NonConvergence, ScoreMatchingError
from simplex_models.models import ModelSpec, ParameterSet
from solver.models import LambdaGrid, SolverOptions
from sampling.exact import sample_dirichlet
from sampling.mcmc import sample_ab_mcmc
from sampling.models import McmcOptions
from weighting.models import default_h_exponent
from evaluation.cross_validation import fit_with_cv
from evaluation.metrics import norm_errors, roc_from_points, tpr_fpr
from evaluation.studies import J_comparison, auc_study, delta_study, simulate_am1
from inference.permutation import differential_edges, run_permutation_tests
from pipeline.io import (
    matrix_to_json, params_from_json, params_to_json, read_dataset, read_json,
    write_dataset, write_json, write_table,
)
from pipeline.run_config import RunConfig


#############################################
# CONFIGURATION
#############################################
def run_config_from_args(args):
    solver = SolverOptions(
        max_sweeps=args.max_sweeps,
        penalize_eta=not args.no_penalize_eta,
    )
    grid = LambdaGrid(n_lambda=args.n_lambda, ratio=args.ratio, lambdas=args.lambdas)
    return RunConfig(
        spec=ModelSpec(a=args.a, b=args.b, mode=args.mode),
        h_exponent=args.h_exponent,
        pi=args.pi,
        C=args.C,
        J=args.J,
        J_policy="even" if args.J_policy == "even" else "random",
        J_count=args.J_count,
        solver=solver,
        grid=grid,
        delta=args.delta,
        tau=args.tau,
        folds=args.folds,
        seed=args.seed,
        threads=args.threads,
    )


RUNTIME_ARGS = ("handler", "threads", "out")


def _args_fingerprint(args):
    return stable_hash({key: value for key, value in vars(args).items() if key not in RUNTIME_ARGS})


def _output(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


#############################################
# SUBCOMMANDS
#############################################
def cmd_simulate(args):
    spec = ModelSpec(a=args.a, b=args.b, mode=args.mode)
    mcmc = McmcOptions(seed=args.seed, burn_in=args.burn_in, thin=args.thin)

    if args.truth == "banded":
        data, truth = simulate_am1(args.m, args.s, args.n, args.seed, sampler=args.sampler, mcmc_opts=mcmc)
        spec = ModelSpec(a=0.0, b=0.0, mode="am1")
        if args.sampler == "logistic":
            truth = ParameterSet(K=truth.K, eta=-np.ones(args.m))
    elif args.truth == "dirichlet":
        alpha = np.asarray(args.dirichlet_alpha, dtype=float)
        data = sample_dirichlet(alpha, args.n, args.seed)
        spec = ModelSpec(a=0.0, b=0.0, mode="general")
        truth = ParameterSet(K=np.zeros((alpha.shape[0], alpha.shape[0])), eta=alpha - 1.0)
    else:
        truth = params_from_json(read_json(args.truth_file))
        data = sample_ab_mcmc(spec, truth, args.n, mcmc)

    write_dataset(_output(args, "data.csv"), data)
    payload = {"spec": spec, "truth": params_to_json(truth), "n": data.n, "seed": args.seed, "generator": args.truth}
    write_json(_output(args, "truth.json"), payload, _args_fingerprint(args))
    root_logger.info(f"Simulated {data.n} x {data.m} compositions into {args.out}")
    return 0


def cmd_estimate(args):
    run = run_config_from_args(args)
    data = read_dataset(args.data, run.spec, close=args.close, pseudocount=args.pseudocount)
    result = fit_with_cv(data, run.settings(data.m), seed=run.seed)

    path = [
        {
            "lambda": fit.lambda_K,
            "lambda_eta": fit.lambda_eta,
            "nonzero_off_diagonal": fit.nonzero_off_diagonal(),
            "converged": fit.converged,
            "kkt_violation": fit.kkt_violation,
            "sweeps": fit.sweeps_used,
            "objective": fit.objective,
            "params": params_to_json(fit.params),
        }
        for fit in result.path.fits
    ]
    payload = {
        "config": run,
        "labels": data.labels,
        "selected": params_to_json(result.params),
        "lambda_star": result.lambda_star,
        "J": list(result.J),
        "delta": result.delta,
        "lambda_max": result.path.lambda_max,
        "loss_fingerprint": result.path.loss_fingerprint,
        "cv": None if result.cv is None else {
            "lambdas": result.cv.lambdas, "curve": result.cv.cv_curve, "se": result.cv.cv_se,
        },
        "path": path,
    }
    write_json(_output(args, "estimate.json"), payload, run.fingerprint())
    root_logger.info(f"Selected lambda={result.lambda_star:.4g} with {result.selected.nonzero_off_diagonal()} edges")

    if not result.path.all_converged:
        failed = sum(not fit.converged for fit in result.path.fits)
        raise NonConvergence(f"{failed} of {len(result.path)} path fits did not converge; outputs carry the flags")
    return 0


def cmd_eval(args):
    estimate = read_json(args.estimate)
    truth = params_from_json(read_json(args.truth)["truth"])
    selected = params_from_json(estimate["selected"])
    if selected.m != truth.m:
        raise MismatchedTruth(f"estimate has m={selected.m}, truth m={truth.m}")

    fits = [params_from_json(entry["params"]) for entry in estimate["path"]]
    rates = [tpr_fpr(params, truth) for params in fits]
    curve = roc_from_points([(fpr, tpr) for tpr, fpr in rates])
    config = estimate["config"]
    c = config["h_exponent"] if config.get("h_exponent") is not None else default_h_exponent(config["spec"]["a"])
    pi = config.get("pi") if config.get("C") is None else None
    payload = {
        "c": c,
        "pi": pi,
        "auc": curve.auc,
        "roc": curve.points,
        "per_lambda": [
            {"lambda": entry["lambda"], "tpr": tpr, "fpr": fpr}
            for entry, (tpr, fpr) in zip(estimate["path"], rates)
        ],
        "selected": dict(zip(("tpr", "fpr"), tpr_fpr(selected, truth))),
        "norm_errors": norm_errors(selected, truth),
        "norm_errors_relative": norm_errors(selected, truth, normalize=True),
    }
    write_json(_output(args, "metrics.json"), payload, estimate.get("fingerprint"))
    # one (c, pi, AUC) row; studies over many settings stack these
    write_table(_output(args, "auc_table.csv"), pd.DataFrame([{"c": c, "pi": pi, "auc": curve.auc}]))
    write_table(_output(args, "roc.csv"), pd.DataFrame(curve.points, columns=["fpr", "tpr"]))
    root_logger.info(f"AUC {curve.auc:.4f} over {len(fits)} path points")
    return 0


def cmd_difftest(args):
    run = run_config_from_args(args)
    d1 = read_dataset(args.group1, run.spec, close=args.close, pseudocount=args.pseudocount)
    d2 = read_dataset(args.group2, run.spec, close=args.close, pseudocount=args.pseudocount)
    # both groups share one J and one delta, fixed from the first group
    settings = run.settings(d1.m)
    settings = settings.model_copy(update={
        "J": list(settings.dropped(d1.m)), "J_policy": "explicit",
        "delta": settings.resolve_delta(min(d1.n, d2.n), d1.m),
    })
    result = run_permutation_tests(d1, d2, settings, args.B, seed=run.seed)
    network = differential_edges(result, alpha=args.alpha)

    labels = d1.labels or [str(j) for j in range(d1.m)]
    payload = {
        "config": run,
        "global_p": result.global_p,
        "observed_stat": result.observed_stat,
        "B": result.B,
        "family": result.family,
        "local_p": matrix_to_json(result.local_p),
        "local_p_adjusted": matrix_to_json(result.local_p_adjusted),
        "K1": result.K1,
        "K2": result.K2,
        "edges": [{"from": labels[j], "to": labels[k], "p_adjusted": p} for j, k, p in network.edges],
        "degrees": dict(zip(labels, network.degrees)),
        "hubs": [labels[j] for j in network.hubs],
        "alpha": args.alpha,
    }
    write_json(_output(args, "report.json"), payload, run.fingerprint())
    return 0


def cmd_study(args):
    mcmc = McmcOptions(burn_in=args.burn_in, thin=args.thin)
    shared = dict(m=args.m, s=args.s, n=args.n, trials=args.trials, seed=args.seed,
                  sampler=args.sampler, mcmc_opts=mcmc, threads=args.threads)
    if args.kind == "auc":
        write_table(_output(args, "auc_study.csv"), auc_study(with_cv=args.with_cv, **shared))
    elif args.kind == "delta":
        summary, roc = delta_study(**shared)
        write_table(_output(args, "delta_summary.csv"), summary)
        write_table(_output(args, "delta_roc.csv"), roc)
    else:
        write_table(_output(args, "J_comparison.csv"), J_comparison(**shared))
    return 0


#############################################
# PARSER
#############################################
def _add_model_flags(parser):
    parser.add_argument("--a", type=float, default=0.0)
    parser.add_argument("--b", type=float, default=0.0)
    parser.add_argument("--mode", choices=["general", "symmetric", "am1", "centered"], default="general")


def _add_estimation_flags(parser):
    _add_model_flags(parser)
    parser.add_argument("--h-exponent", dest="h_exponent", type=float, default=None)
    parser.add_argument("--pi", type=float, default=1.0)
    parser.add_argument("--C", type=float, nargs="+", default=None)
    parser.add_argument("--J", type=int, nargs="+", default=None, help="0-based dropped coordinates")
    parser.add_argument("--J-count", dest="J_count", type=int, default=Config.J_COUNT)
    parser.add_argument("--J-policy", dest="J_policy", choices=["random", "even"], default="random")
    parser.add_argument("--lambda", dest="lambdas", type=float, nargs="+", default=None)
    parser.add_argument("--n-lambda", dest="n_lambda", type=int, default=Config.N_LAMBDA)
    parser.add_argument("--ratio", type=float, default=Config.LAMBDA_RATIO)
    parser.add_argument("--max-sweeps", dest="max_sweeps", type=int, default=Config.MAX_SWEEPS)
    parser.add_argument("--no-penalize-eta", dest="no_penalize_eta", action="store_true")
    parser.add_argument("--delta", type=float, default=None)
    parser.add_argument("--tau", type=float, default=Config.DELTA_TAU)
    parser.add_argument("--folds", type=int, default=Config.CV_FOLDS)
    parser.add_argument("--close", action="store_true", help="treat the input as counts")
    parser.add_argument("--pseudocount", type=float, default=0.0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="score_pipeline",
        description="Regularized generalized score matching for a-b models on the simplex",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=Config.THREADS)
    common.add_argument("--out", default=Config.OUTPUT_DIR)
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", parents=[common], help="sample a dataset and write its ground truth")
    _add_model_flags(simulate)
    simulate.add_argument("--truth", choices=["banded", "dirichlet", "file"], default="banded")
    simulate.add_argument("--truth-file", dest="truth_file")
    simulate.add_argument("--dirichlet-alpha", dest="dirichlet_alpha", type=float, nargs="+", default=[1.0, 2.0, 4.0])
    simulate.add_argument("--m", type=int, default=20)
    simulate.add_argument("--s", type=int, default=2)
    simulate.add_argument("--n", type=int, default=200)
    simulate.add_argument("--sampler", choices=["mcmc", "logistic"], default="mcmc")
    simulate.add_argument("--burn-in", dest="burn_in", type=int, default=Config.MCMC_BURN_IN)
    simulate.add_argument("--thin", type=int, default=Config.MCMC_THIN)
    simulate.set_defaults(handler=cmd_simulate)

    estimate = commands.add_parser("estimate", parents=[common], help="fit a regularization path and pick lambda by CV")
    estimate.add_argument("data")
    _add_estimation_flags(estimate)
    estimate.set_defaults(handler=cmd_estimate)

    evaluate = commands.add_parser("eval", parents=[common], help="support recovery and estimation error against a truth")
    evaluate.add_argument("--estimate", required=True)
    evaluate.add_argument("--truth", required=True)
    evaluate.set_defaults(handler=cmd_eval)

    difftest = commands.add_parser("difftest", parents=[common], help="permutation tests for a differential network")
    difftest.add_argument("group1")
    difftest.add_argument("group2")
    _add_estimation_flags(difftest)
    difftest.add_argument("--B", type=int, default=100)
    difftest.add_argument("--alpha", type=float, default=0.05)
    difftest.set_defaults(handler=cmd_difftest)

    study = commands.add_parser("study", parents=[common], help="simulation studies on banded A^(m-1) models")
    study.add_argument("--kind", choices=["auc", "delta", "J"], default="auc")
    study.add_argument("--m", type=int, default=20)
    study.add_argument("--s", type=int, default=2)
    study.add_argument("--n", type=int, default=200)
    study.add_argument("--trials", type=int, default=5)
    study.add_argument("--sampler", choices=["mcmc", "logistic"], default="mcmc")
    study.add_argument("--with-cv", dest="with_cv", action="store_true")
    study.add_argument("--burn-in", dest="burn_in", type=int, default=Config.MCMC_BURN_IN)
    study.add_argument("--thin", type=int, default=Config.MCMC_THIN)
    study.set_defaults(handler=cmd_study)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ScoreMatchingError as e:
        root_logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except pydantic.ValidationError as e:
        root_logger.error(f"Invalid configuration: {e}")
        return 3


if __name__ == '__main__':
    sys.exit(main())

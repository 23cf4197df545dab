import numpy as np
from utils import root_logger, spawn_generators
from simplex_models.density import check_normalizability, log_kernel_batch
from simplex_models.errors import NotNormalizable, ZeroAcceptance
from simplex_models.models import Dataset
from simplex_models.simplex import alr_inverse
from sampling.exact import strictly_positive
from sampling.models import McmcOptions


MIN_ACCEPTANCE = 0.01
# burn-in steps before the proposal follows the chain's own spread
COVARIANCE_WARMUP = 100


class AdaptiveMetropolis:
    """
    Random-walk Metropolis on y = alr(x), last coordinate as reference.
    Target: log kernel + sum log x_j (the Jacobian of the logistic map).

    During burn-in each chain adapts componentwise proposal scales: a global
    Robbins-Monro log-scale steers acceptance to `target_accept` and the
    components follow the running standard deviation of the chain. Scales
    are frozen afterwards so the kept states come from a fixed kernel.
    """

    def __init__(self, spec, params, opts=None):
        self.spec = spec
        self.params = params
        self.opts = McmcOptions() if opts is None else opts
        report = check_normalizability(spec, params)
        if report.normalizable != "proven":
            raise NotNormalizable(f"target is {report.normalizable}: {report.details}")
        self.m = params.m
        self.dim = self.m - 1
        self.acceptance_rate = None

    def log_target(self, Y):
        X = alr_inverse(Y)
        out = np.full(X.shape[0], -np.inf)
        ok = np.all(X > 0, axis=1)
        if ok.any():
            with np.errstate(all="ignore"):
                values = log_kernel_batch(self.spec, self.params, X[ok]) + np.log(X[ok]).sum(axis=1)
            out[ok] = np.where(np.isfinite(values), values, -np.inf)
        return out

    def _noise(self, rngs, count):
        steps = np.stack([rng.standard_normal((count, self.dim)) for rng in rngs])
        log_u = np.stack([np.log(rng.uniform(size=count)) for rng in rngs])
        return steps, log_u

    def run(self, n):
        opts = self.opts
        chains = opts.n_chains
        per_chain = -(-n // chains)
        total = opts.burn_in + per_chain * opts.thin
        rngs = spawn_generators(opts.seed, chains)

        Y = np.zeros((chains, self.dim))
        log_p = self.log_target(Y)
        log_scale = np.zeros(chains)
        base = np.full((chains, self.dim), opts.step_size)
        mean = np.zeros((chains, self.dim))
        sq = np.zeros((chains, self.dim))

        kept = np.empty((chains, per_chain, self.dim))
        accepted = np.zeros(chains)
        stored = 0

        for step in range(total):
            slot = step % opts.block_size
            if slot == 0:
                steps, log_u = self._noise(rngs, min(opts.block_size, total - step))

            proposal = Y + np.exp(log_scale)[:, None] * base * steps[:, slot]
            log_q = self.log_target(proposal)
            accept = log_u[:, slot] < log_q - log_p
            Y[accept] = proposal[accept]
            log_p[accept] = log_q[accept]

            if step < opts.burn_in:
                rate = 1.0 / (step + 1) ** 0.6
                log_scale += rate * (accept - opts.target_accept)
                # Welford running moments per chain
                delta = Y - mean
                mean += delta / (step + 1)
                sq += delta * (Y - mean)
                if step >= COVARIANCE_WARMUP:
                    sd = np.sqrt(sq / step)
                    base = 2.38 / np.sqrt(self.dim) * np.maximum(sd, 1e-3 * opts.step_size)
                continue

            accepted += accept
            if (step - opts.burn_in + 1) % opts.thin == 0:
                kept[:, stored] = Y
                stored += 1

        kept_steps = total - opts.burn_in
        self.acceptance_rate = accepted / max(kept_steps, 1)
        root_logger.debug(f"MCMC acceptance per chain: {np.round(self.acceptance_rate, 3).tolist()}")
        if self.acceptance_rate.min() < MIN_ACCEPTANCE:
            raise ZeroAcceptance(
                f"acceptance rate {self.acceptance_rate.min():.4f} below {MIN_ACCEPTANCE} after adaptation"
            )
        if self.acceptance_rate.min() < 0.1 or self.acceptance_rate.max() > 0.6:
            root_logger.warning(f"MCMC acceptance {self.acceptance_rate.tolist()} outside [0.1, 0.6]")

        # interleave chains: row i comes from chain i % chains
        y = kept.transpose(1, 0, 2).reshape(-1, self.dim)[:n]
        return Dataset(samples=strictly_positive(alr_inverse(y)))


def sample_ab_mcmc(spec, params, n, opts=None):
    """n compositions from the a-b model by adaptive random-walk Metropolis."""
    return AdaptiveMetropolis(spec, params, opts).run(n)

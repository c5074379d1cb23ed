"""Built-in diagnostics: sampler moments, the augmentation identity,
gradient fidelity, and a small Gibbs-vs-quadrature comparison.

Each check returns a dict with a ``pass`` flag plus enough detail to see
how close the run was to its tolerance.  These back the ``selftest`` CLI
commands and double as a canary for silent sampler regressions.
"""

from __future__ import annotations

import math

import numpy as np

from .gibbs import run_chain_moments
from .kernels import KernelSpec, kernel_matrix
from .pg import pg_mean, sample_pg1_array, verify_augmentation_identity
from .rng import RngStream
from .training import conditional_log_marginal, grad_log_marginal

# test hook: added to raw draws before moment checks
_PG_DRAW_BIAS = 0.0


def moment_check(seed: int, n_draws: int = 100_000) -> dict:
    """Empirical PG(1,c) means vs tanh(c/2)/(2c) at 3 SE; variance at c=0."""
    cases = []
    ok = True
    for i, c in enumerate([0.0, 0.5, 1.0, 2.0, 4.0]):
        draws = sample_pg1_array(np.full(n_draws, c), RngStream(seed, i)) + _PG_DRAW_BIAS
        mean = float(draws.mean())
        se = float(draws.std(ddof=1) / math.sqrt(n_draws))
        expected = pg_mean(c)
        passed = abs(mean - expected) <= 3.0 * se
        case = {"c": c, "mean": mean, "expected": expected, "se": se, "pass": passed}
        if c == 0.0:
            var = float(draws.var(ddof=1))
            case["variance"] = var
            case["variance_expected"] = 1.0 / 24.0
            case["pass"] = passed and abs(var - 1.0 / 24.0) <= 0.1 / 24.0
        cases.append(case)
        ok = ok and case["pass"]
    return {"name": "pg_moments", "pass": ok, "n_draws": n_draws, "cases": cases}


def identity_check(seed: int, n_samples: int = 100_000) -> dict:
    """Integral-identity relative error < 1% across a logit/label grid."""
    cases = []
    ok = True
    i = 0
    for psi in (-3.0, -1.0, 0.0, 1.0, 3.0):
        for y in (0, 1):
            rep = verify_augmentation_identity(psi, y, n_samples, RngStream(seed, 100 + i))
            passed = rep.rel_error < 0.01
            cases.append({"psi": psi, "y": y, "lhs": rep.lhs, "rhs": rep.rhs,
                          "rel_error": rep.rel_error, "pass": passed})
            ok = ok and passed
            i += 1
    return {"name": "augmentation_identity", "pass": ok, "n_samples": n_samples,
            "cases": cases}


def gradient_check(seed: int, n_instances: int = 20, tol: float = 1e-4) -> dict:
    """Analytic vs central finite-difference hyperparameter gradients."""
    gen = RngStream(seed, 200).gen
    worst = 0.0
    step = 1e-5
    for _ in range(n_instances):
        n = int(gen.integers(2, 17))
        d = int(gen.integers(1, 4))
        x = gen.normal(size=(n, d))
        y = gen.integers(0, 2, size=n).astype(float)
        w = gen.gamma(shape=1.0, scale=0.3, size=n) + 0.01
        family = ["rbf", "matern52", "linear"][int(gen.integers(0, 3))]
        spec = KernelSpec(
            family=family,
            length_scale=float(np.exp(gen.normal(0.0, 0.3))),
            output_scale=float(np.exp(gen.normal(0.5, 0.3))),
        )
        analytic = grad_log_marginal(x, y, w[None, :], spec)

        fd = np.zeros(2)
        for j, name in enumerate(("length_scale", "output_scale")):
            base = getattr(spec, name)
            hi = _with_param(spec, name, math.exp(math.log(base) + step))
            lo = _with_param(spec, name, math.exp(math.log(base) - step))
            fd[j] = (
                conditional_log_marginal(x, y, w, hi)
                - conditional_log_marginal(x, y, w, lo)
            ) / (2.0 * step)
        denom = max(float(np.linalg.norm(fd)), 1e-12)
        worst = max(worst, float(np.linalg.norm(analytic - fd)) / denom)
    return {"name": "gradient_fidelity", "pass": worst < tol,
            "n_instances": n_instances, "worst_rel_error": worst, "tol": tol}


def _with_param(spec: KernelSpec, name: str, value: float) -> KernelSpec:
    d = spec.to_dict()
    d[name] = value
    return KernelSpec.from_dict(d)


def sigmoid_posterior_moments_2d(k: np.ndarray, labels, lo=-8.0, hi=8.0, step=0.01):
    """Dense-grid quadrature moments of p(g|y) on a 2-point problem.

    The unnormalised posterior is N(g|0,K) * prod_i sigmoid(g_i)^{y_i}
    (1-sigmoid(g_i))^{1-y_i}, evaluated on a regular grid over [lo, hi]^2.
    Independent of the Gibbs code path by construction.
    """
    grid = np.arange(lo, hi + step / 2, step)
    g1, g2 = np.meshgrid(grid, grid, indexing="ij")
    kinv = np.linalg.inv(k)
    quad = (
        kinv[0, 0] * g1 * g1 + 2.0 * kinv[0, 1] * g1 * g2 + kinv[1, 1] * g2 * g2
    )
    log_post = -0.5 * quad
    for gi, yi in zip((g1, g2), labels):
        psi = gi if yi == 1 else -gi
        log_post = log_post - np.logaddexp(0.0, -psi)
    log_post -= log_post.max()
    post = np.exp(log_post)
    post /= post.sum()
    mean = np.array([(post * g1).sum(), (post * g2).sum()])
    var = np.array([
        (post * (g1 - mean[0]) ** 2).sum(),
        (post * (g2 - mean[1]) ** 2).sum(),
    ])
    return mean, var


def gibbs_oracle_check(seed: int, tol: float = 0.05) -> dict:
    """Long-run Gibbs moments vs the grid oracle on a 2-point dataset."""
    features = np.array([[0.0, 0.0], [1.0, 0.0]])
    labels = np.array([1.0, 0.0])
    spec = KernelSpec(family="rbf", length_scale=1.0, output_scale=0.75, jitter=0.0)
    k = kernel_matrix(features, spec=spec)
    oracle_mean, oracle_var = sigmoid_posterior_moments_2d(k, labels)
    mean, var = run_chain_moments(
        features, labels, spec, n_steps=50_000, burn_in=1_000, thin=10, seed=seed
    )
    dm = float(np.max(np.abs(mean - oracle_mean)))
    dv = float(np.max(np.abs(var - oracle_var)))
    return {
        "name": "gibbs_vs_quadrature", "pass": dm <= tol and dv <= tol,
        "mean": mean.tolist(), "oracle_mean": oracle_mean.tolist(),
        "var": var.tolist(), "oracle_var": oracle_var.tolist(),
        "max_mean_abs_err": dm, "max_var_abs_err": dv, "tol": tol,
    }


def run_selftest(seed: int = 0, quick: bool = False, sampler_only: bool = False) -> dict:
    """Bundle of checks; ``quick`` skips the long-run Gibbs oracle."""
    checks = [moment_check(seed), identity_check(seed)]
    if not sampler_only:
        checks.append(gradient_check(seed))
        if not quick:
            checks.append(gibbs_oracle_check(seed))
    return {"pass": all(c["pass"] for c in checks), "seed": seed, "checks": checks}

"""Blocked Gibbs sampling over the latent function values and PG auxiliaries.

The two conditionals are conjugate: w_i | g is PG(1, g_i) element-wise, and
g | y, w is Gaussian with covariance (K^-1 + diag(w))^-1 and mean
covariance * (y - 1/2).  One sweep updates w first, then g.  Chains are
independent; chain i of a run draws from stream (seed, i), so sequential
and parallel execution give identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError
from .kernels import KernelSpec, PsdMatrix, factorize, kernel_matrix, mvn_sample
from .pg import sample_pg1_array
from .rng import RngStream

# floor applied to w before forming diag(w)^-1; keeps K + W^-1 finite
W_FLOOR = 1e-10


@dataclass
class GibbsChainState:
    """One chain's current latent vector g, auxiliaries w, and sweep count."""

    g: np.ndarray
    w: np.ndarray
    step: int = 0


@dataclass(frozen=True)
class GibbsConfig:
    n_chains: int = 30
    n_steps: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.n_chains < 1:
            raise InvalidArgumentError(f"n_chains must be >= 1, got {self.n_chains}")
        if self.n_steps < 0:
            raise InvalidArgumentError(f"n_steps must be >= 0, got {self.n_steps}")

    def to_dict(self) -> dict:
        return {"n_chains": self.n_chains, "n_steps": self.n_steps, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "GibbsConfig":
        return cls(
            n_chains=d.get("n_chains", 30),
            n_steps=d.get("n_steps", 10),
            seed=d.get("seed", 0),
        )


def step_w(state: GibbsChainState, rng: RngStream) -> GibbsChainState:
    """Resample each w_i ~ PG(1, g_i); g is untouched."""
    return replace(state, w=sample_pg1_array(state.g, rng))


def g_conditional(k: np.ndarray, w: np.ndarray, kappa: np.ndarray):
    """Mean and covariance of g | y, w for kernel matrix k and kappa = y - 1/2.

    Computes (K^-1 + diag(w))^-1 through the stable identity
    K - K (K + diag(w)^-1)^-1 K, using triangular solves only.
    """
    winv = 1.0 / np.maximum(w, W_FLOOR)
    c = k + np.diag(winv)
    cf = factorize(c)
    cov = k - k @ cf.solve(k)
    cov = 0.5 * (cov + cov.T)
    mean = cov @ kappa
    return mean, cov


def step_g(
    state: GibbsChainState,
    labels: np.ndarray,
    k: PsdMatrix,
    rng: RngStream,
) -> GibbsChainState:
    """Resample g from its Gaussian conditional given w; w is untouched."""
    labels = np.asarray(labels, dtype=float)
    if labels.shape[0] != state.w.shape[0] or k.n != state.w.shape[0]:
        raise InvalidArgumentError("labels, kernel, and state sizes disagree")
    mean, cov = g_conditional(k.matrix, state.w, labels - 0.5)
    g = mvn_sample(mean, factorize(cov, jitter=1e-12), rng)
    return replace(state, g=g, step=state.step + 1)


def init_chain(k: PsdMatrix, rng: RngStream) -> GibbsChainState:
    """Prior initialisation: w ~ PG(1, 0) element-wise, g ~ MVN(0, K)."""
    n = k.n
    w = sample_pg1_array(np.zeros(n), rng)
    g = mvn_sample(np.zeros(n), k, rng)
    return GibbsChainState(g=g, w=w, step=0)


def run_chains(
    features: np.ndarray,
    labels: np.ndarray,
    spec: KernelSpec,
    cfg: GibbsConfig,
) -> list[GibbsChainState]:
    """Run cfg.n_chains independent chains for cfg.n_steps sweeps each.

    Returns the final state of every chain.  Chain i uses the stream
    (cfg.seed, i), so results do not depend on execution order.
    """
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = np.asarray(labels, dtype=float)
    if features.shape[0] < 1:
        raise InvalidArgumentError("need at least one training point")
    if labels.shape[0] != features.shape[0]:
        raise InvalidArgumentError("features and labels lengths differ")
    k = factorize(kernel_matrix(features, spec=spec))
    states = []
    for i in range(cfg.n_chains):
        rng = RngStream(cfg.seed, i)
        state = init_chain(k, rng)
        for _ in range(cfg.n_steps):
            state = step_w(state, rng)
            state = step_g(state, labels, k, rng)
        states.append(state)
    return states


def run_chain_moments(
    features: np.ndarray,
    labels: np.ndarray,
    spec: KernelSpec,
    n_steps: int,
    burn_in: int,
    thin: int,
    seed: int,
):
    """Long-run diagnostic mode: one chain with burn-in and thinning.

    Returns (mean, variance) of g over the retained sweeps.  This is the
    only place burn-in/thinning exist; training always uses the raw
    short chains.
    """
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = np.asarray(labels, dtype=float)
    k = factorize(kernel_matrix(features, spec=spec))
    rng = RngStream(seed, 0)
    state = init_chain(k, rng)
    kept = []
    for t in range(burn_in + n_steps):
        state = step_w(state, rng)
        state = step_g(state, labels, k, rng)
        if t >= burn_in and (t - burn_in) % thin == 0:
            kept.append(state.g)
    samples = np.asarray(kept)
    return samples.mean(axis=0), samples.var(axis=0)

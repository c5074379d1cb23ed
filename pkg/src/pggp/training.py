"""Kernel hyperparameter learning from posterior PG auxiliaries.

Given auxiliaries w, the labels enter through pseudo-observations
z = kappa / w with kappa = y - 1/2, and the conditional marginal likelihood
of the hyperparameters is the Gaussian density log N(z | 0, K + diag(w)^-1).
Fisher's identity turns the marginal-likelihood gradient into the average
of that density's gradient over posterior w samples, which is what the
Gibbs chains supply.  Parameters are (log length_scale, log output_scale)
so positivity is structural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .data import EmbeddingDataset
from .errors import InvalidArgumentError
from .gibbs import W_FLOOR, GibbsConfig, run_chains
from .kernels import KernelSpec, factorize, kernel_matrix
from .rng import RngStream, derive_seed

_LOG_2PI = math.log(2.0 * math.pi)

TRAINABLE_MODES = ("kernel_params", "none")

REFERENCE_SET_MAX = 512


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 3e-3
    epochs: int = 1
    batch_size: int = 16
    gibbs: GibbsConfig = field(default_factory=GibbsConfig)
    trainable: str = "none"

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidArgumentError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 0:
            raise InvalidArgumentError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 2:
            raise InvalidArgumentError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.trainable not in TRAINABLE_MODES:
            raise InvalidArgumentError(
                f"trainable must be one of {TRAINABLE_MODES}, got {self.trainable!r}"
            )

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "gibbs": self.gibbs.to_dict(),
            "trainable": self.trainable,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(
            learning_rate=d.get("learning_rate", 3e-3),
            epochs=d.get("epochs", 1),
            batch_size=d.get("batch_size", 16),
            gibbs=GibbsConfig.from_dict(d.get("gibbs", {})),
            trainable=d.get("trainable", "none"),
        )


@dataclass
class FittedModel:
    """Everything prediction needs: reference set, kernel, stored w chains."""

    spec: KernelSpec
    reference_features: np.ndarray   # (m, d)
    reference_labels: np.ndarray     # (m,)
    reference_w: np.ndarray          # (n_chains, m)
    provenance: dict

    @property
    def dim(self) -> int:
        return self.reference_features.shape[1]

    @property
    def n_chains(self) -> int:
        return self.reference_w.shape[0]


def _pseudo_obs(labels: np.ndarray, w: np.ndarray):
    """z = kappa / w and diag(w)^-1 entries, with the small-w floor."""
    kappa = np.asarray(labels, dtype=float) - 0.5
    winv = 1.0 / np.maximum(np.asarray(w, dtype=float), W_FLOOR)
    return kappa * winv, winv


def conditional_log_marginal(
    features: np.ndarray,
    labels: np.ndarray,
    w: np.ndarray,
    spec: KernelSpec,
) -> float:
    """log N(z | 0, K + diag(w)^-1), the theta-dependent part of log p(y|x,w)."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise InvalidArgumentError("all auxiliaries w must be > 0")
    z, winv = _pseudo_obs(labels, w)
    c = kernel_matrix(features, spec=spec) + np.diag(winv)
    cf = factorize(c)
    half = cf.half_solve(z)
    logdet = 2.0 * np.sum(np.log(np.diag(cf.factor)))
    n = z.shape[0]
    return float(-0.5 * (n * _LOG_2PI + logdet + half @ half))


def _kernel_log_grads(features: np.ndarray, spec: KernelSpec):
    """d K / d log(l) and d K / d log(sigma) on the training block (no jitter)."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    bare = replace(spec, jitter=0.0)
    k = kernel_matrix(features, spec=bare)
    if spec.family == "rbf":
        diff = features[:, None, :] - features[None, :, :]
        sq = np.sum(diff * diff, axis=-1)
        dk_dlogl = k * sq / spec.length_scale**2
    elif spec.family == "linear":
        dk_dlogl = np.zeros_like(k)
    else:  # matern52
        diff = features[:, None, :] - features[None, :, :]
        r = np.sqrt(np.maximum(np.sum(diff * diff, axis=-1), 0.0)) / spec.length_scale
        s2 = spec.output_scale**2
        dk_dlogl = s2 * (5.0 * r * r / 3.0) * (1.0 + math.sqrt(5.0) * r) \
            * np.exp(-math.sqrt(5.0) * r)
    return dk_dlogl, 2.0 * k


def grad_log_marginal(
    features: np.ndarray,
    labels: np.ndarray,
    w_samples: np.ndarray,
    spec: KernelSpec,
) -> np.ndarray:
    """Average gradient of the conditional log marginal over w samples.

    Returns the 2-vector (d/d log l, d/d log sigma).  For each w the
    gradient is 0.5 tr((alpha alpha^T - C^-1) dK/dtheta) with
    C = K + diag(w)^-1 and alpha = C^-1 z.
    """
    w_samples = np.atleast_2d(np.asarray(w_samples, dtype=float))
    dk_dlogl, dk_dlogs = _kernel_log_grads(features, spec)
    k = kernel_matrix(features, spec=spec)
    total = np.zeros(2)
    for w in w_samples:
        z, winv = _pseudo_obs(labels, w)
        cf = factorize(k + np.diag(winv))
        alpha = cf.solve(z)
        cinv = cf.solve(np.eye(len(z)))
        m = np.outer(alpha, alpha) - cinv
        total[0] += 0.5 * np.sum(m * dk_dlogl)
        total[1] += 0.5 * np.sum(m * dk_dlogs)
    return total / w_samples.shape[0]


def _batches(order: np.ndarray, batch_size: int):
    for start in range(0, len(order), batch_size):
        yield order[start : start + batch_size]


def fit(
    dataset: EmbeddingDataset,
    spec: KernelSpec,
    cfg: TrainConfig,
    log_fn=None,
) -> FittedModel:
    """Stochastic gradient ascent on the Fisher-identity estimator.

    Per batch: fresh N-chain x T-step Gibbs run, then one ascent step on
    (log l, log sigma) unless ``trainable == "none"`` (which leaves the
    input spec untouched).  After the last epoch a reference set of at
    most 512 points is subsampled and one final Gibbs pass over it
    provides the stored w chains for prediction.

    ``log_fn``, when given, receives one dict per batch with the
    chain-averaged conditional log marginal.
    """
    x = dataset.embeddings
    y = dataset.labels
    n = x.shape[0]
    if n == 0:
        raise InvalidArgumentError("empty dataset")
    if len(np.unique(y)) < 2:
        raise InvalidArgumentError("dataset must contain both labels")

    root = cfg.gibbs.seed
    log_l = math.log(spec.length_scale)
    log_s = math.log(spec.output_scale)
    cur = spec

    for epoch in range(cfg.epochs):
        shuffle = RngStream(derive_seed(root, "shuffle", epoch)).gen
        order = shuffle.permutation(n)
        for b, idx in enumerate(_batches(order, cfg.batch_size)):
            bx, by = x[idx], y[idx]
            gcfg = replace(cfg.gibbs, seed=derive_seed(root, "train", epoch, b))
            states = run_chains(bx, by, cur, gcfg)
            w_samples = np.asarray([st.w for st in states])
            if log_fn is not None:
                clm = float(np.mean(
                    [conditional_log_marginal(bx, by, w, cur) for w in w_samples]
                ))
                log_fn({"epoch": epoch, "batch": b, "log_marginal": clm,
                        "length_scale": cur.length_scale, "output_scale": cur.output_scale})
            if cfg.trainable == "kernel_params":
                grad = grad_log_marginal(bx, by, w_samples, cur)
                log_l += cfg.learning_rate * grad[0]
                log_s += cfg.learning_rate * grad[1]
                cur = replace(spec, length_scale=math.exp(log_l),
                              output_scale=math.exp(log_s))

    final_spec = cur

    m = min(REFERENCE_SET_MAX, n)
    sub = RngStream(derive_seed(root, "reference-subsample")).gen
    ref_idx = np.sort(sub.choice(n, size=m, replace=False))
    ref_x, ref_y = x[ref_idx], y[ref_idx]
    gcfg = replace(cfg.gibbs, seed=derive_seed(root, "reference-gibbs"))
    final_states = run_chains(ref_x, ref_y, final_spec, gcfg)

    return FittedModel(
        spec=final_spec,
        reference_features=ref_x,
        reference_labels=ref_y,
        reference_w=np.asarray([st.w for st in final_states]),
        provenance={"seed": root, "train_config": cfg.to_dict(),
                    "initial_kernel": spec.to_dict(), "n_train": int(n)},
    )

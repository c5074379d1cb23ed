"""Kernel functions, positive-definite matrix hygiene, and MVN sampling.

Three kernel families are supported: RBF sigma^2 exp(-||a-b||^2 / (2 l^2)),
Linear sigma^2 (a.b), and Matern-5/2.  A self-kernel matrix gets ``jitter``
added to its diagonal; factorisation retries with the jitter escalated x10
up to 1e-2 before giving up.  All downstream solves go through the stored
Cholesky factor, never an explicit inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InvalidArgumentError, NumericalError
from .rng import RngStream

FAMILIES = ("rbf", "linear", "matern52")

_MAX_JITTER = 1e-2


def _default_jitter(output_scale: float) -> float:
    return 1e-6 * output_scale * output_scale


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus hyperparameters.

    ``jitter`` defaults to 1e-6 * output_scale^2 and is added to the
    diagonal of self-kernel matrices only.
    """

    family: str = "rbf"
    length_scale: float = 1.0
    output_scale: float = 8.0
    jitter: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgumentError(
                f"unknown kernel family {self.family!r}; expected one of {FAMILIES}"
            )
        if not (self.length_scale > 0 and math.isfinite(self.length_scale)):
            raise InvalidArgumentError(f"length_scale must be > 0, got {self.length_scale}")
        if not (self.output_scale > 0 and math.isfinite(self.output_scale)):
            raise InvalidArgumentError(f"output_scale must be > 0, got {self.output_scale}")
        if self.jitter is None:
            object.__setattr__(self, "jitter", _default_jitter(self.output_scale))
        if self.jitter < 0:
            raise InvalidArgumentError(f"jitter must be >= 0, got {self.jitter}")

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "length_scale": self.length_scale,
            "output_scale": self.output_scale,
            "jitter": self.jitter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(
            family=d.get("family", "rbf"),
            length_scale=d.get("length_scale", 1.0),
            output_scale=d.get("output_scale", 8.0),
            jitter=d.get("jitter"),
        )


def _pairwise_sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # clamp tiny negatives from cancellation
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.maximum(sq, 0.0)


def kernel_matrix(a, b=None, spec: KernelSpec = KernelSpec()) -> np.ndarray:
    """Evaluate k(a_i, b_j) for all pairs.

    Passing ``b=None`` (or the same object as ``a``) builds the self-kernel
    matrix with ``spec.jitter`` added to the diagonal.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    self_kernel = b is None or b is a
    b = a if self_kernel else np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise InvalidArgumentError(
            f"feature dimension mismatch: {a.shape[1]} vs {b.shape[1]}"
        )
    s2 = spec.output_scale * spec.output_scale
    if spec.family == "rbf":
        sq = _pairwise_sqdist(a, b)
        k = s2 * np.exp(-sq / (2.0 * spec.length_scale**2))
    elif spec.family == "linear":
        k = s2 * (a @ b.T)
    else:  # matern52
        r = np.sqrt(_pairwise_sqdist(a, b)) / spec.length_scale
        sqrt5r = math.sqrt(5.0) * r
        k = s2 * (1.0 + sqrt5r + 5.0 * r * r / 3.0) * np.exp(-sqrt5r)
    if self_kernel and spec.jitter > 0:
        k = k + spec.jitter * np.eye(a.shape[0])
    return k


def kernel_diag(a, spec: KernelSpec) -> np.ndarray:
    """k(a_i, a_i) for each row, without jitter (prior variance at a point)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    s2 = spec.output_scale * spec.output_scale
    if spec.family == "linear":
        return s2 * np.sum(a * a, axis=1)
    return np.full(a.shape[0], s2)


@dataclass
class PsdMatrix:
    """A symmetric PD matrix together with its lower Cholesky factor."""

    matrix: np.ndarray
    factor: np.ndarray
    jitter_used: float = 0.0

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """(K + jitter I)^-1 rhs via two triangular solves."""
        half = solve_triangular(self.factor, rhs, lower=True, check_finite=False)
        return solve_triangular(self.factor, half, lower=True, trans="T",
                                check_finite=False)

    def half_solve(self, rhs: np.ndarray) -> np.ndarray:
        """L^-1 rhs; useful for quadratic forms rhs^T K^-1 rhs."""
        return solve_triangular(self.factor, rhs, lower=True, check_finite=False)


def factorize(k: np.ndarray, jitter: float = 0.0) -> PsdMatrix:
    """Cholesky-factorize ``k + jitter I`` with an escalating jitter ladder.

    Retries with jitter x10 (starting from 1e-10 if the input jitter is 0)
    up to 1e-2, then raises :class:`NumericalError` listing the attempts.
    """
    k = np.asarray(k, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {k.shape}")
    scale = np.max(np.abs(k)) if k.size else 1.0
    if scale > 0 and np.max(np.abs(k - k.T)) > 1e-12 * max(scale, 1.0) * k.shape[0]:
        raise InvalidArgumentError("matrix is not symmetric")
    k = 0.5 * (k + k.T)

    attempts = [float(jitter)]
    nxt = jitter * 10.0 if jitter > 0 else 1e-10
    while nxt <= _MAX_JITTER:
        attempts.append(nxt)
        nxt *= 10.0

    eye = np.eye(k.shape[0])
    for j in attempts:
        kj = k + j * eye if j > 0 else k
        try:
            factor = np.linalg.cholesky(kj)
        except np.linalg.LinAlgError:
            continue
        return PsdMatrix(matrix=kj, factor=factor, jitter_used=j)
    raise NumericalError(
        f"matrix not positive definite after jitter ladder {attempts}"
    )


def mvn_sample(mean: np.ndarray, factor: PsdMatrix | np.ndarray, rng: RngStream) -> np.ndarray:
    """Draw mean + L z with z ~ N(0, I)."""
    mean = np.asarray(mean, dtype=float)
    lower = factor.factor if isinstance(factor, PsdMatrix) else np.asarray(factor, dtype=float)
    if lower.shape[0] != mean.shape[0]:
        raise InvalidArgumentError(
            f"dimension mismatch: mean has {mean.shape[0]}, factor has {lower.shape[0]}"
        )
    z = rng.gen.standard_normal(mean.shape[0])
    return mean + lower @ z

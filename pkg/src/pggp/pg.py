"""Exact sampling from the Polya-Gamma distribution PG(1, c).

The sampler is the alternating-series rejection method: below the
truncation point ``t = 0.64`` proposals come from a tilted inverse-Gaussian
density, above it from an exponential with rate ``pi^2/8 + c^2/8``, and the
target density is evaluated through upper/lower partial sums of its
alternating series expansion.  The method is exact (no truncation bias) and
runs in O(1) expected time per draw; acceptance is ~0.9998 per proposal.

PG(1, c) depends on c only through c^2, so the tilt below uses |c|.  The
returned auxiliary variable is always strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericalError
from .rng import RngStream

_T = 0.64                     # truncation point splitting the two proposals
_MAX_PROPOSALS = 10**6        # hard cap; hit only on a broken build
_SQRT2 = math.sqrt(2.0)
_LOG_2PI = math.log(2.0 * math.pi)
_LOG_4_OVER_PI = math.log(4.0 / math.pi)
_LOG_PI = math.log(math.pi)


def _log_ndtr(x: float) -> float:
    """log of the standard normal CDF, stable into the left tail."""
    if x > -8.0:
        return math.log(0.5 * math.erfc(-x / _SQRT2))
    # Deep tail: asymptotic series of Mills' ratio.  Only reached for terms
    # that are negligible in the mixture weight below, so 4 terms suffice.
    x2 = x * x
    corr = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)
    return -0.5 * x2 - 0.5 * _LOG_2PI - math.log(-x) + math.log(corr)


def _left_proposal_fraction(z: float, fz: float) -> float:
    """Probability of proposing from the exponential (x > t) branch.

    Computed in log space as p/(p+q) where p and q are the envelope masses
    above and below the truncation point.
    """
    st = math.sqrt(1.0 / _T)
    b = st * (_T * z - 1.0)
    a = -st * (_T * z + 1.0)
    x0 = math.log(fz) + fz * _T
    xb = x0 - z + _log_ndtr(b)
    xa = x0 + z + _log_ndtr(a)
    # log(q/p), then p/(p+q) = sigmoid(-log(q/p))
    hi, lo = (xb, xa) if xb >= xa else (xa, xb)
    log_qdivp = _LOG_4_OVER_PI + hi + math.log1p(math.exp(lo - hi))
    if log_qdivp > 0.0:
        e = math.exp(-log_qdivp)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(log_qdivp))


# PG(1, 0) is by far the most common request (chain initialisation and the
# augmentation-identity checks), so cache its mixture weight.
_FZ0 = math.pi * math.pi / 8.0
_RATIO_Z0 = _left_proposal_fraction(0.0, _FZ0)


def _series_coef(n: int, x: float) -> float:
    """n-th coefficient of the alternating series for the target density."""
    r = n + 0.5
    if x <= _T:
        # evaluated in log space: (2/(pi x))^{3/2} overflows for tiny x
        lg = _LOG_PI + math.log(r) + 1.5 * (math.log(2.0 / math.pi) - math.log(x)) \
            - 2.0 * r * r / x
        return math.exp(lg) if lg > -745.0 else 0.0
    arg = -0.5 * r * r * math.pi * math.pi * x
    return math.pi * r * math.exp(arg) if arg > -745.0 else 0.0


def _trunc_inv_gauss(z: float, gen: np.random.Generator) -> float:
    """Draw from the inverse-Gaussian IG(1/z, 1) restricted to (0, t]."""
    if z < 1.0 / _T:
        # mean above the cut (or z == 0): rejection from the truncated
        # 1/chi^2 body with the Gaussian tilt applied afterwards
        while True:
            e1 = gen.exponential()
            e2 = gen.exponential()
            while e1 * e1 > 2.0 * e2 / _T:
                e1 = gen.exponential()
                e2 = gen.exponential()
            x = _T / ((1.0 + _T * e1) * (1.0 + _T * e1))
            if z == 0.0 or gen.random() <= math.exp(-0.5 * z * z * x):
                return x
    mu = 1.0 / z
    while True:
        y = gen.standard_normal()
        y *= y
        muy = mu * y
        x = mu + 0.5 * mu * muy - 0.5 * mu * math.sqrt(4.0 * muy + muy * muy)
        if gen.random() > mu / (mu + x):
            x = mu * mu / x
        if x <= _T:
            return x


def sample_pg1(c: float, rng: RngStream) -> float:
    """Draw one exact sample from PG(1, c).

    Parameters
    ----------
    c : float
        Tilt parameter; any sign (the distribution depends on c^2 only).
    rng : RngStream
        Stream that is advanced by the draw.

    Returns
    -------
    float
        A strictly positive variate.
    """
    if not math.isfinite(c):
        raise InvalidArgumentError(f"tilt parameter must be finite, got {c!r}")
    z = 0.5 * abs(c)
    if z == 0.0:
        fz = _FZ0
        ratio = _RATIO_Z0
    else:
        fz = _FZ0 + 0.5 * z * z
        ratio = _left_proposal_fraction(z, fz)
    gen = rng.gen

    for _ in range(_MAX_PROPOSALS):
        if gen.random() < ratio:
            x = _T + gen.exponential() / fz
        else:
            x = _trunc_inv_gauss(z, gen)
        # squeeze the density between alternating partial sums
        s = _series_coef(0, x)
        y = gen.random() * s
        n = 0
        while True:
            n += 1
            if n & 1:
                s -= _series_coef(n, x)
                if y <= s:
                    return 0.25 * x
            else:
                s += _series_coef(n, x)
                if y > s:
                    break
    raise NumericalError(
        f"PG(1,{c}) sampler exceeded {_MAX_PROPOSALS} proposals; this should never happen"
    )


def sample_pg1_array(c: np.ndarray, rng: RngStream) -> np.ndarray:
    """Element-wise PG(1, c_i) draws sharing one stream. Returns an array."""
    c = np.asarray(c, dtype=float)
    out = np.empty(c.shape)
    flat_c = c.ravel()
    flat_o = out.ravel()
    for i in range(flat_c.size):
        flat_o[i] = sample_pg1(flat_c[i], rng)
    return out


def pg_mean(c: float) -> float:
    """Closed-form mean of PG(1, c): tanh(c/2)/(2c), with limit 1/4 at c=0."""
    if c == 0.0:
        return 0.25
    return math.tanh(c / 2.0) / (2.0 * c)


@dataclass(frozen=True)
class IdentityReport:
    """Monte-Carlo check of the integral identity behind the augmentation."""

    psi: float
    y: int
    n_samples: int
    lhs: float
    rhs: float
    rel_error: float


def verify_augmentation_identity(
    psi: float, y: int, n_samples: int, rng: RngStream
) -> IdentityReport:
    """Check sigma(psi)^y (1-sigma(psi))^(1-y) against its PG(1,0) mixture form.

    The right-hand side is (1/2) exp((y - 1/2) psi) E[exp(-w psi^2 / 2)]
    with w ~ PG(1, 0), estimated by a Monte-Carlo mean over ``n_samples``
    draws.
    """
    if not math.isfinite(psi):
        raise InvalidArgumentError(f"logit must be finite, got {psi!r}")
    if y not in (0, 1):
        raise InvalidArgumentError(f"label must be 0 or 1, got {y!r}")
    if n_samples < 10**4:
        raise InvalidArgumentError(f"need at least 1e4 samples, got {n_samples}")

    sig = 1.0 / (1.0 + math.exp(-psi))
    lhs = sig if y == 1 else 1.0 - sig

    w = sample_pg1_array(np.zeros(n_samples), rng)
    mc = float(np.mean(np.exp(-0.5 * w * psi * psi)))
    rhs = 0.5 * math.exp((y - 0.5) * psi) * mc
    return IdentityReport(
        psi=psi, y=y, n_samples=n_samples, lhs=lhs, rhs=rhs,
        rel_error=abs(rhs - lhs) / abs(lhs),
    )

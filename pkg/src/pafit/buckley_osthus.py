"""Buckley-Osthus likelihood, score, MLE, and limiting quantities.

The scaled log-likelihood implemented here is (1/n) log P(history).  The
history probability factorizes over arrival steps with denominators
k*a + k - 1, and by exchangeability depends on the history only through
its degree counts:

    n * loglik = sum_{k>=0} Z_{>k+1} log(a + k) - sum_{k=1}^n log(k*a + k - 1)

so exp(n * loglik) reproduces the product of step probabilities exactly.
The score (d/da) is identical to the one obtained from the conventional
per-step scaling by 1/k, since the scaling is constant in a.

Limiting quantities are series in the limit degree law p_k.  Sums of the
form sum q_k f(a + k) with q_k = p_{>k+1} decay only polynomially
(q_k ~ A k^{-(1+a0)}), so each series is evaluated as an explicit head
plus a two-term power-law tail resolved with Hurwitz zeta values; the
documented tail bound is below the requested tolerance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import mpmath
import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import zeta as hurwitz_zeta

from .errors import ParameterError
from .history import DegreeCounts
from .fileio import atomic_write_text

__all__ = [
    "BoFitResult",
    "LimitReportBo",
    "DEFAULT_DOMAIN",
    "bo_loglik",
    "bo_score",
    "bo_mle",
    "limit_pk",
    "degree_tail_mass",
    "degree_tail_first_moment",
    "limit_loglik",
    "limit_loglik_grad",
    "sigma2_beta",
    "bo_limit_report",
]

DEFAULT_DOMAIN = (1e-3, 100.0)


@dataclass(frozen=True)
class BoFitResult:
    a_hat: float
    loglik: float
    iterations: int
    converged: bool
    boundary: bool

    def to_json_dict(self) -> dict:
        return {
            "a_hat": self.a_hat,
            "loglik": self.loglik,
            "iterations": self.iterations,
            "converged": self.converged,
            "boundary": self.boundary,
        }


class Sigma2Beta(NamedTuple):
    sigma2: float
    beta: float
    avar: float


def _check_a(a: float) -> None:
    if a <= 0.0:
        raise ParameterError("a must be positive")


def bo_loglik(counts: DegreeCounts, a: float) -> float:
    """Scaled log-likelihood (1/n) log P of any history with these counts."""
    _check_a(a)
    n = counts.n
    tail = counts.tail_counts()  # tail[k] = Z_{>k}
    kmax = tail.shape[0] - 1  # == max degree
    k = np.arange(0, kmax - 1, dtype=float)  # Z_{>k+1} vanishes beyond
    numerator = float(tail[1:kmax] @ np.log(a + k)) if kmax >= 2 else 0.0
    steps = np.arange(1, n + 1, dtype=float)
    denominator = float(np.log(steps * a + steps - 1.0).sum())
    return (numerator - denominator) / n


def bo_score(counts: DegreeCounts, a: float) -> float:
    """Derivative of the scaled log-likelihood in a."""
    _check_a(a)
    n = counts.n
    tail = counts.tail_counts()
    kmax = tail.shape[0] - 1
    k = np.arange(0, kmax - 1, dtype=float)
    numerator = float(tail[1:kmax] @ (1.0 / (a + k))) if kmax >= 2 else 0.0
    steps = np.arange(1, n + 1, dtype=float)
    denominator = float((1.0 / (a + 1.0 - 1.0 / steps)).sum())
    return (numerator - denominator) / n


def bo_mle(
    counts: DegreeCounts,
    domain: tuple[float, float] = DEFAULT_DOMAIN,
    score_tol: float = 1e-9,
    bracket_tol: float = 1e-10,
) -> BoFitResult:
    """Maximize the scaled log-likelihood over [eps, max].

    The score is scanned on a log-spaced grid for +/- sign changes; a lone
    bracket is closed by Brent root finding.  With several brackets (the
    finite-n likelihood is not provably unimodal) each candidate root and
    both endpoints are compared by log-likelihood.  All-positive or
    all-negative scores give boundary maximizers, flagged but not errors.
    """
    eps, upper = domain
    if not 0.0 < eps < upper:
        raise ParameterError("domain must satisfy 0 < eps < max")
    if counts.n < 2:
        raise ParameterError("MLE needs n >= 2; the one-node likelihood is constant")

    tail = counts.tail_counts()
    kmax = tail.shape[0] - 1
    karr = np.arange(0, max(kmax - 1, 0), dtype=float)
    weights = tail[1:kmax].astype(float) if kmax >= 2 else np.zeros(0)
    n = counts.n
    steps = np.arange(1, n + 1, dtype=float)
    step_shift = 1.0 - 1.0 / steps

    evaluations = 0

    def score(a: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return (
            float(weights @ (1.0 / (a + karr))) - float((1.0 / (a + step_shift)).sum())
        ) / n

    grid = np.geomspace(eps, upper, 64)
    grid[0], grid[-1] = eps, upper
    values = np.array([score(a) for a in grid])

    brackets = [
        (grid[i], grid[i + 1])
        for i in range(len(grid) - 1)
        if values[i] > 0.0 >= values[i + 1]
    ]

    def loglik(a: float) -> float:
        return bo_loglik(counts, a)

    boundary = False
    if not brackets:
        if values.max() <= 0.0:
            a_hat = eps
        else:
            a_hat = upper
        boundary = True
        converged = True
    elif len(brackets) == 1:
        lo, hi = brackets[0]
        a_hat, info = brentq(
            score, lo, hi, xtol=bracket_tol, maxiter=200, full_output=True
        )
        evaluations += info.function_calls
        converged = abs(score(a_hat)) < score_tol or (hi - lo) < bracket_tol
    else:
        # several sign changes: compare all stationary candidates on loglik,
        # with a bounded golden/parabolic search as an extra candidate
        candidates = [eps, upper]
        for lo, hi in brackets:
            root, info = brentq(
                score, lo, hi, xtol=bracket_tol, maxiter=200, full_output=True
            )
            evaluations += info.function_calls
            candidates.append(root)
        opt = minimize_scalar(
            lambda a: -loglik(a), bounds=(eps, upper), method="bounded",
            options={"xatol": bracket_tol},
        )
        evaluations += int(opt.nfev)
        candidates.append(float(opt.x))
        a_hat = max(candidates, key=loglik)
        boundary = a_hat in (eps, upper)
        converged = boundary or abs(score(a_hat)) < score_tol
    return BoFitResult(
        a_hat=float(a_hat),
        loglik=loglik(float(a_hat)),
        iterations=evaluations,
        converged=bool(converged),
        boundary=boundary,
    )


# ----------------------------------------------------------------------
# limit degree law
# ----------------------------------------------------------------------


def _pk_head(a0: float, kmax: int) -> np.ndarray:
    """p_1..p_kmax by the exact ratio recursion p_k / p_{k-1} = (k+a0-2)/(k+2a0)."""
    p = np.empty(kmax)
    p[0] = (a0 + 1.0) / (2.0 * a0 + 1.0)
    if kmax > 1:
        k = np.arange(2, kmax + 1, dtype=float)
        p[1:] = p[0] * np.cumprod((k + a0 - 2.0) / (k + 2.0 * a0))
    return p


def degree_tail_mass(a0: float, k: int, p_next: float | None = None) -> float:
    """Exact p_{>k} = (k + 1 + 2 a0) p_{k+1} / (a0 + 1)."""
    _check_a(a0)
    if k < 0:
        raise ParameterError("k must be >= 0")
    if k == 0:
        return 1.0
    if p_next is None:
        p_next = float(_pk_head(a0, k + 1)[-1])
    return (k + 1.0 + 2.0 * a0) * p_next / (a0 + 1.0)


def degree_tail_first_moment(a0: float, k: int) -> float:
    """Exact sum_{j>k} j p_j = (k (k + a0) + a0 - 1) p_k / a0 + (a0 - 1) p_{>k} / a0."""
    _check_a(a0)
    if k < 0:
        raise ParameterError("k must be >= 0")
    if k == 0:
        return 2.0
    head = _pk_head(a0, k + 1)
    p_k = float(head[k - 1])
    tail = degree_tail_mass(a0, k, p_next=float(head[k]))
    return (k * (k + a0) + a0 - 1.0) * p_k / a0 + (a0 - 1.0) * tail / a0


def limit_pk(
    a0: float, k_max: int | None = None, tail_tol: float = 1e-12
) -> np.ndarray:
    """Limit fractions p_k of degree-k nodes, index k-1.

    With `k_max` the sequence is returned up to that degree; otherwise it is
    truncated at the first K whose exact tail mass p_{>K} drops below
    `tail_tol`.  `degree_tail_mass` / `degree_tail_first_moment` give the
    exact mass and first moment beyond any truncation point.
    """
    _check_a(a0)
    if k_max is not None:
        if k_max < 1:
            raise ParameterError("k_max must be >= 1")
        return _pk_head(a0, k_max)
    size = 1024
    while True:
        p = _pk_head(a0, size)
        tails = (np.arange(2, size + 1) + 2.0 * a0) * p[1:] / (a0 + 1.0)
        below = np.nonzero(tails < tail_tol)[0]
        if below.size:
            K = below[0] + 1  # p_{>K} < tol with tail index k = K
            return p[:K]
        if size > 300_000_000:
            raise ParameterError("tail tolerance unreachable; pass k_max instead")
        size *= 8


# ----------------------------------------------------------------------
# series in q_k = p_{>k+1}: head sums plus power-law tail completion
# ----------------------------------------------------------------------


class _QSeries:
    """q_k = p_{>k+1} for k = 0..K, with q_k ~ (A + B/k) k^{-(1+a0)} beyond.

    The fit coefficients come from two exact q values at K/2 and K; the
    neglected correction is O(k^{-(3+a0)}), so completed tails are accurate
    to O(K^{-(2+a0)} log K) — far below 1e-12 for the K chosen here.
    """

    def __init__(self, a0: float, tol: float):
        self.a0 = a0
        # K from the target tail error ~ K^{-(2+a0)} log K < tol
        K = int(math.ceil((2e3 / tol) ** (1.0 / (2.0 + a0))))
        K = min(max(K, 4096), 4_000_000)
        p = _pk_head(a0, K + 2)
        k_idx = np.arange(2, K + 3, dtype=float)  # degree index for p[1:]
        # exact tail identity: p_{>k+1} = (k + 2 + 2 a0) p_{k+2} / (a0 + 1)
        self.q = (k_idx + 2.0 * a0) * p[1:] / (a0 + 1.0)  # q[k], k = 0..K
        self.K = K
        k1, k2 = K // 2, K
        g1 = self.q[k1] * k1 ** (1.0 + a0)
        g2 = self.q[k2] * k2 ** (1.0 + a0)
        if g1 > 0.0 and g2 > 0.0:
            self.B = (g1 - g2) / (1.0 / k1 - 1.0 / k2)
            self.A = g2 - self.B / k2
        else:  # tail already underflowed; nothing to complete
            self.A = 0.0
            self.B = 0.0
        self._m = float(K + 1)
        self._zeta_cache: dict[float, float] = {}
        self._zeta_prime: tuple[float, float] | None = None

    def _zeta(self, s: float) -> float:
        value = self._zeta_cache.get(s)
        if value is None:
            value = float(hurwitz_zeta(s, self._m))
            self._zeta_cache[s] = value
        return value

    def _zeta_primes(self) -> tuple[float, float]:
        # d/ds Hurwitz zeta at 1 + a0 and 2 + a0, for the log-weighted tail
        if self._zeta_prime is None:
            if self.A == 0.0 and self.B == 0.0:
                self._zeta_prime = (0.0, 0.0)
            else:
                z1 = float(mpmath.zeta(1.0 + self.a0, self._m, 1))
                z2 = float(mpmath.zeta(2.0 + self.a0, self._m, 1))
                self._zeta_prime = (z1, z2)
        return self._zeta_prime

    def sum_inv(self, a: float) -> float:
        """sum_{k>=0} q_k / (a + k)."""
        k = np.arange(self.q.shape[0], dtype=float)
        head = float(self.q @ (1.0 / (a + k)))
        s = self.a0
        tail = 0.0
        sign = 1.0
        apow = 1.0
        for j in range(6):  # (k+a)^{-1} = sum_j (-a)^j k^{-(1+j)}
            tail += sign * apow * (
                self.A * self._zeta(2.0 + s + j) + self.B * self._zeta(3.0 + s + j)
            )
            sign = -sign
            apow *= a
        return head + tail

    def sum_inv_sq(self, a: float) -> float:
        """sum_{k>=0} q_k / (a + k)^2."""
        k = np.arange(self.q.shape[0], dtype=float)
        head = float(self.q @ (1.0 / (a + k) ** 2))
        s = self.a0
        tail = 0.0
        sign = 1.0
        apow = 1.0
        for j in range(6):  # (k+a)^{-2} = sum_j (j+1) (-a)^j k^{-(2+j)}
            tail += sign * (j + 1.0) * apow * (
                self.A * self._zeta(3.0 + s + j) + self.B * self._zeta(4.0 + s + j)
            )
            sign = -sign
            apow *= a
        return head + tail

    def sum_log(self, a: float) -> float:
        """sum_{k>=0} q_k log(a + k); the k = 0 term uses log a directly."""
        k = np.arange(self.q.shape[0], dtype=float)
        head = float(self.q @ np.log(a + k))
        s = self.a0
        zp1, zp2 = self._zeta_primes()
        tail = -self.A * zp1 - self.B * zp2  # sum k^{-s'} log k terms
        sign = 1.0
        apow = a
        for j in range(1, 7):  # log(1 + a/k) = sum_j (-1)^{j+1} (a/k)^j / j
            tail += sign * apow / j * (
                self.A * self._zeta(1.0 + s + j) + self.B * self._zeta(2.0 + s + j)
            )
            sign = -sign
            apow *= a
        return head + tail


@lru_cache(maxsize=16)
def _qseries(a0: float, tol: float) -> _QSeries:
    return _QSeries(a0, tol)


def limit_loglik(a: float, a0: float, tail_tol: float = 1e-12) -> float:
    """Limit of the scaled log-likelihood at parameter a when the truth is a0."""
    _check_a(a)
    _check_a(a0)
    series = _qseries(float(a0), float(tail_tol))
    return series.sum_log(a) - math.log(a + 1.0)


def limit_loglik_grad(a: float, a0: float, tail_tol: float = 1e-12) -> float:
    """Derivative of `limit_loglik` in a; vanishes exactly at a = a0."""
    _check_a(a)
    _check_a(a0)
    series = _qseries(float(a0), float(tail_tol))
    return series.sum_inv(a) - 1.0 / (a + 1.0)


def sigma2_beta(a0: float, tail_tol: float = 1e-12) -> Sigma2Beta:
    """Asymptotic-normality constants: sqrt(n) (a_hat - a0) -> N(0, sigma2/beta^2)."""
    _check_a(a0)
    series = _qseries(float(a0), float(tail_tol))
    inv_sq = series.sum_inv_sq(a0)
    inv = series.sum_inv(a0)
    c = 1.0 / (a0 + 1.0)
    sigma2 = inv_sq - 2.0 * c * inv + c * c
    beta = inv_sq - c * c
    return Sigma2Beta(sigma2=sigma2, beta=beta, avar=sigma2 / beta**2)


@dataclass(frozen=True)
class LimitReportBo:
    a0: float
    p: np.ndarray
    tail_tol: float
    sigma2: float
    beta: float
    avar: float

    def to_json_dict(self) -> dict:
        return {
            "a0": self.a0,
            "p": self.p.tolist(),
            "tail_tol": self.tail_tol,
            "sigma2": self.sigma2,
            "beta": self.beta,
            "avar": self.avar,
        }

    def write_json(self, path) -> None:
        atomic_write_text(path, json.dumps(self.to_json_dict(), indent=2) + "\n")


def bo_limit_report(
    a0: float, k_max: int = 200, tail_tol: float = 1e-12
) -> LimitReportBo:
    """Bundle the limit degree law (to k_max) with the normality constants."""
    s = sigma2_beta(a0, tail_tol)
    return LimitReportBo(
        a0=a0,
        p=limit_pk(a0, k_max=k_max),
        tail_tol=tail_tol,
        sigma2=s.sigma2,
        beta=s.beta,
        avar=s.avar,
    )

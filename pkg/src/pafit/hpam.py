"""Community-structured model: likelihood, MLEs, fixed-point limits, and a
brute-force marginal likelihood for unlabeled histories.

Unlike the one-parameter model, the likelihood here depends on the node
arrival order through the per-step denominators sum_j gamma[l_k, j] *
N_j^{k-1} + gamma[l_k, l_k]; everything needed to evaluate it is carried
by `CommunityStats`.

Two denominator conventions are supported.  The exact one reproduces the
history probability: exp(n * loglik) equals the product of per-step
probabilities (pi factors included).  The scaled one drops the
+gamma[l_k, l_k] term, which is the asymptotic simplification used in the
limit analysis; the step-1 denominator would then vanish, so step 1 always
uses the exact form.  The two modes differ by
(1/n) sum_{k>=2} log(1 + gamma[l_k,l_k] / sum_j gamma[l_k,j] N_j^{k-1}),
a quantity that vanishes as n grows, and they share the same gradient
structure in gamma.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ConvergenceError, LabelingError, ParameterError, SizeGuardError
from .fileio import atomic_write_text
from .history import (
    CommunityStats,
    GrowthHistory,
    HpamParams,
    log_degree_factorials,
)

__all__ = [
    "HpamFitResult",
    "HpamLimits",
    "hpam_loglik",
    "gamma_loglik",
    "gamma_loglik_grad",
    "pi_mle",
    "gamma_mle",
    "fixed_point_p",
    "theta_from_p",
    "hpam_limits",
    "limit_loglik_hpam",
    "limit_loglik_hpam_grad",
    "marginal_loglik_bruteforce",
]


@dataclass(frozen=True)
class HpamFitResult:
    pi_hat: np.ndarray
    gamma_hat: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    unidentified_communities: tuple[int, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "K": int(self.pi_hat.shape[0]),
            "pi_hat": self.pi_hat.tolist(),
            "gamma_hat": [float(x) for x in self.gamma_hat.ravel()],
            "loglik": self.loglik,
            "iterations": self.iterations,
            "converged": self.converged,
            "unidentified_communities": list(self.unidentified_communities),
        }


@dataclass(frozen=True)
class HpamLimits:
    p0: np.ndarray
    theta0: np.ndarray
    residual: float

    def to_json_dict(self) -> dict:
        return {
            "K": int(self.p0.shape[0]),
            "p0": self.p0.tolist(),
            "theta0": [float(x) for x in self.theta0.ravel()],
            "residual": self.residual,
        }

    def write_json(self, path) -> None:
        atomic_write_text(path, json.dumps(self.to_json_dict(), indent=2) + "\n")


def _check_gamma(gamma: np.ndarray, K: int) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (K, K):
        raise ParameterError(f"gamma must be {K}x{K}")
    if np.any(gamma <= 0.0):
        raise ParameterError("gamma entries must be positive")
    if not np.allclose(gamma, gamma.T, rtol=0.0, atol=1e-12):
        raise ParameterError("gamma must be symmetric")
    return gamma


def _step_denominators(
    stats: CommunityStats, gamma: np.ndarray, exact_denominator: bool
) -> np.ndarray:
    rows = gamma[stats.memberships]  # (n, K)
    denom = np.einsum("nk,nk->n", rows, stats.N_path)
    if exact_denominator:
        denom = denom + gamma[stats.memberships, stats.memberships]
    else:
        denom = denom.copy()
        denom[0] = gamma[stats.memberships[0], stats.memberships[0]]
    return denom


def _upper_sum(matrix: np.ndarray, values: np.ndarray) -> float:
    iu = np.triu_indices(matrix.shape[0])
    return float((matrix[iu] * values[iu]).sum())


def gamma_loglik(
    stats: CommunityStats, gamma, exact_denominator: bool = True
) -> float:
    """The gamma-dependent part of the scaled log-likelihood (pi term excluded)."""
    gamma = _check_gamma(gamma, stats.K)
    log_gamma = np.log(gamma)
    numerator = _upper_sum(stats.M, log_gamma) + stats.log_degree_factorials
    denom = _step_denominators(stats, gamma, exact_denominator)
    return (numerator - float(np.log(denom).sum())) / stats.n


def gamma_loglik_grad(
    stats: CommunityStats, gamma, exact_denominator: bool = True
) -> np.ndarray:
    """Gradient of `gamma_loglik` in the free symmetric entries.

    Entry (i, j) of the returned symmetric matrix is the derivative with
    respect to the single parameter gamma[i, j] == gamma[j, i].
    """
    gamma = _check_gamma(gamma, stats.K)
    K, n = stats.K, stats.n
    denom = _step_denominators(stats, gamma, exact_denominator)
    ratio = stats.N_path / denom[:, None]  # (n, K)
    members = stats.memberships
    P = np.zeros((K, K))
    diag_extra = np.zeros(K)
    for c in range(K):
        mask = members == c
        if mask.any():
            P[c] = ratio[mask].sum(axis=0)
            if exact_denominator:
                diag_extra[c] = float((1.0 / denom[mask]).sum())
    if not exact_denominator:
        # step 1 is forced to the exact form, so its diagonal term persists
        diag_extra[members[0]] += 1.0 / denom[0]
    grad = stats.M / gamma - (P + P.T)
    idx = np.arange(K)
    grad[idx, idx] = stats.M[idx, idx] / gamma[idx, idx] - P[idx, idx] - diag_extra
    return grad / n


def hpam_loglik(
    stats: CommunityStats, params: HpamParams, exact_denominator: bool = True
) -> float:
    """Scaled log-likelihood of a labeled history, pi term included.

    With the exact denominator, exp(n * value) is the probability of the
    history under the dynamics.
    """
    if params.K != stats.K:
        raise ParameterError(f"params have K={params.K}, stats have K={stats.K}")
    observed = stats.T > 0
    pi_term = float(stats.T[observed] @ np.log(params.pi[observed])) / stats.n
    return pi_term + gamma_loglik(stats, params.gamma, exact_denominator)


def pi_mle(stats: CommunityStats) -> np.ndarray:
    """Frequency estimate T_j / n; warns when a community is empty."""
    pi_hat = stats.T / stats.n
    if np.any(stats.T == 0):
        empty = np.nonzero(stats.T == 0)[0] + 1
        warnings.warn(
            f"communities {empty.tolist()} have no members; pi_hat is degenerate",
            stacklevel=2,
        )
    return pi_hat


def _free_indices(K: int) -> tuple[np.ndarray, np.ndarray]:
    iu = np.triu_indices(K)
    keep = ~((iu[0] == 0) & (iu[1] == 0))  # gamma[0, 0] pinned at 1
    return iu[0][keep], iu[1][keep]


def gamma_mle(
    stats: CommunityStats,
    init: HpamParams | None = None,
    exact_denominator: bool = True,
    grad_tol: float = 1e-7,
    max_iter: int = 100_000,
) -> HpamFitResult:
    """Maximize the gamma part of the log-likelihood over symmetric positive
    matrices with gamma[0, 0] = 1.

    Ascent runs in log-parameters, where the objective is concave (linear
    numerator plus negated log-sum-exp denominators), with a backtracking
    line search halving from the last accepted step.  Communities that never
    appear in the data leave their gamma entries at the initializer and are
    reported as unidentified.  Non-convergence is flagged, never silent.
    """
    if stats.n < stats.K:
        raise ParameterError("need at least K nodes to fit a K-community model")
    K = stats.K
    gamma = np.ones((K, K)) if init is None else init.gamma.copy()
    rows, cols = _free_indices(K)
    observed = stats.T > 0
    unidentified = tuple(int(c + 1) for c in range(K) if not observed[c])
    # entries touching an unobserved community have identically zero gradient
    active = observed[rows] & observed[cols]

    def unpack(x: np.ndarray) -> np.ndarray:
        g = gamma.copy()
        g[rows, cols] = np.exp(x)
        g[cols, rows] = g[rows, cols]
        return g

    x = np.log(gamma[rows, cols])
    value = gamma_loglik(stats, gamma, exact_denominator)
    step = 1.0
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        grad_gamma = gamma_loglik_grad(stats, gamma, exact_denominator)
        grad_free = grad_gamma[rows, cols] * active
        if np.max(np.abs(grad_free)) < grad_tol:
            converged = True
            break
        direction = grad_free * gamma[rows, cols]  # chain rule into log space
        slope = float(direction @ direction)
        t = step
        while t > 1e-18:
            x_new = x + t * direction
            g_new = unpack(x_new)
            v_new = gamma_loglik(stats, g_new, exact_denominator)
            if v_new >= value + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            break  # line search stalled at the gradient tolerance boundary
        x, gamma, value = x_new, g_new, v_new
        step = min(t * 2.0, 16.0)
    pi_hat = pi_mle(stats)
    pi_term = float(stats.T[observed] @ np.log(pi_hat[observed])) / stats.n
    return HpamFitResult(
        pi_hat=pi_hat,
        gamma_hat=gamma,
        loglik=pi_term + value,
        iterations=iterations,
        converged=converged,
        unidentified_communities=unidentified,
    )


# ----------------------------------------------------------------------
# limit quantities
# ----------------------------------------------------------------------


def _fixed_point_residual(p: np.ndarray, params: HpamParams) -> np.ndarray:
    s = params.gamma @ p
    bracket = (params.pi / s) @ params.gamma
    return p * (1.0 - bracket) - params.pi


def fixed_point_p(
    params: HpamParams, tol: float = 1e-12, max_iter: int = 100_000
) -> np.ndarray:
    """Limit per-community degree mass p0 (sums to 2) by damped iteration.

    Solves p_j (1 - sum_l pi_l gamma_lj / sum_k gamma_lk p_k) = pi_j from
    p = 2 pi with damping 0.5; the residual is re-evaluated from scratch
    after convergence as a defense against stalling on a non-solution.
    """
    pi, gamma = params.pi, params.gamma
    p = 2.0 * pi.copy()
    for _ in range(max_iter):
        s = gamma @ p
        bracket = (pi / s) @ gamma
        p = 0.5 * p + 0.5 * (pi + p * bracket)
        if np.max(np.abs(_fixed_point_residual(p, params))) < tol:
            break
    else:
        resid = float(np.max(np.abs(_fixed_point_residual(p, params))))
        raise ConvergenceError(
            f"fixed point not reached in {max_iter} iterations; residual {resid:.3e}"
        )
    final = float(np.max(np.abs(_fixed_point_residual(p, params))))
    if not final < tol:
        raise ConvergenceError(f"fixed-point residual check failed: {final:.3e}")
    return p


def theta_from_p(params: HpamParams, p0: np.ndarray) -> np.ndarray:
    """Limit edge-type fractions: theta[i, j] is the fraction of edges
    linking communities i+1 and j+1 (each unordered pair once; sums to 1)."""
    s = params.gamma @ p0
    rates = (params.pi / s)[:, None] * params.gamma * p0[None, :]
    theta = rates + rates.T
    idx = np.arange(params.K)
    theta[idx, idx] = rates[idx, idx]
    return theta


def hpam_limits(params: HpamParams, tol: float = 1e-12) -> HpamLimits:
    p0 = fixed_point_p(params, tol=tol)
    theta0 = theta_from_p(params, p0)
    residual = float(np.max(np.abs(_fixed_point_residual(p0, params))))
    return HpamLimits(p0=p0, theta0=theta0, residual=residual)


def limit_loglik_hpam(
    gamma, params0: HpamParams, limits: HpamLimits | None = None
) -> float:
    """Limit of the gamma part of the scaled log-likelihood when the truth
    is params0.  Invariant under rescaling gamma; maximized on the ray
    through params0.gamma."""
    gamma = _check_gamma(gamma, params0.K)
    if limits is None:
        limits = hpam_limits(params0)
    mix = gamma @ limits.p0
    return _upper_sum(limits.theta0, np.log(gamma)) - float(
        params0.pi @ np.log(mix)
    )


def limit_loglik_hpam_grad(
    gamma, params0: HpamParams, limits: HpamLimits | None = None
) -> np.ndarray:
    """Gradient of `limit_loglik_hpam` in the free symmetric entries."""
    gamma = _check_gamma(gamma, params0.K)
    if limits is None:
        limits = hpam_limits(params0)
    mix = gamma @ limits.p0
    rates = (params0.pi / mix)[:, None] * limits.p0[None, :]
    grad = limits.theta0 / gamma - (rates + rates.T)
    idx = np.arange(params0.K)
    grad[idx, idx] = limits.theta0[idx, idx] / gamma[idx, idx] - rates[idx, idx]
    return grad


# ----------------------------------------------------------------------
# marginal likelihood over unobserved memberships
# ----------------------------------------------------------------------

MARGINAL_MAX_NODES = 14


def marginal_loglik_bruteforce(history: GrowthHistory, params: HpamParams) -> float:
    """log sum over all K^n labelings of the exact labeled likelihood.

    The history must be unlabeled; each candidate labeling induces the
    target memberships.  Guarded to n <= 14 since the enumeration is K^n.
    """
    n = history.n
    if n == 0:
        raise ParameterError("history must contain at least one event")
    if history.labeled:
        raise LabelingError("marginal likelihood expects an unlabeled history")
    if n > MARGINAL_MAX_NODES:
        raise SizeGuardError(
            f"brute-force enumeration guarded to n <= {MARGINAL_MAX_NODES}, got {n}"
        )
    K = params.K
    gamma, pi = params.gamma, params.pi
    targets = history.targets - 1  # 0-based target node per step
    self_loop = targets == np.arange(n)
    labelings = np.array(list(itertools.product(range(K), repeat=n)), dtype=np.int64)
    S = labelings.shape[0]

    log_pi_total = np.log(pi)[labelings].sum(axis=1)
    target_labels = labelings[:, targets]  # (S, n)
    log_gamma_total = np.log(gamma)[labelings, target_labels].sum(axis=1)

    # per-community degree mass before each step, per labeling
    increments = np.zeros((S, n, K))
    rows = np.arange(S)[:, None]
    steps = np.arange(n)[None, :]
    np.add.at(increments, (rows, steps, labelings), 1.0)
    np.add.at(increments, (rows, steps, target_labels), 1.0)  # self-loops add 2
    mass_before = np.cumsum(increments, axis=1) - increments

    gamma_rows = gamma[labelings]  # (S, n, K)
    denom = np.einsum("snk,snk->sn", gamma_rows, mass_before)
    denom += gamma[labelings, labelings]
    log_denoms = np.log(denom).sum(axis=1)

    log_fact = log_degree_factorials(history.degrees())
    per_labeling = log_pi_total + log_gamma_total + log_fact - log_denoms
    return float(logsumexp(per_labeling))

"""Exact analysis of the imitation dynamics in a finite well-mixed population.

N humans and M fixed-policy AI agents play the one-shot game against
everyone else. Humans update by the Fermi rule; AI agents never update,
so the evolving state is just k, the number of human cooperators, and the
process is a birth-death chain on {0, ..., N}.

Average payoffs at state k (self-interaction excluded, denominator
N + M - 1), with the AI contribution fixed by its policy:

    pi_C(k) = [(k-1) R + (N-k) S + M a_C] / (N + M - 1)
    pi_D(k) = [k T + (N-k-1) P + M a_D] / (N + M - 1)

where (a_C, a_D) is (R, T) for Samaritan, (S, P) for Malicious and
(R, P) for Discriminatory AI.

One elementary event picks a random focal human and a random role model
among the remaining N + M - 1 agents; the focal adopts the role model's
exposed action with the Fermi probability. With delta(k) = pi_C - pi_D
and separate human/AI selection intensities this gives

    T+(k) = (N-k)/N [ k/(N+M) sigma(beta_H delta)
                      + [AI cooperates visibly] M/(N+M) sigma(beta_AI delta) ]
    T-(k) = k/N     [ (N-k)/(N+M) sigma(-beta_H delta)
                      + [AI defects visibly] M/(N+M) sigma(-beta_AI delta) ]

A discriminatory AI mirrors its observer, so it never exposes a fixed
action to imitate and contributes to neither transition.

Everything downstream of the transitions is computed in log space: the
fixation-probability denominator, the product ratio r = prod T+/T-, and
the gamma-function closed forms, so results stay finite far beyond the
range where the raw probabilities underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .game import AIBehavior, PayoffMatrix, Strategy

_LOG_HALF = -math.log(2.0)


@dataclass(frozen=True)
class WellMixedConfig:
    """Parameters of the finite well-mixed population.

    ``beta_ai`` defaults to ``beta_h``; pass it explicitly to model
    humans weighing AI role models with a different selection intensity.
    """

    n: int
    m: int
    beta_h: float
    ai: AIBehavior
    matrix: PayoffMatrix
    beta_ai: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two humans (n >= 2)")
        if self.m < 0:
            raise ValueError("AI count m must be >= 0")
        if self.beta_h < 0.0:
            raise ValueError("beta_h must be >= 0")
        if self.beta_ai is None:
            object.__setattr__(self, "beta_ai", self.beta_h)
        elif self.beta_ai < 0.0:
            raise ValueError("beta_ai must be >= 0")


def _ai_payoff_terms(cfg: WellMixedConfig) -> tuple[float, float]:
    """(payoff a cooperator gets from one AI, same for a defector)."""
    mat = cfg.matrix
    if cfg.ai == AIBehavior.SAMARITAN:
        return mat.r, mat.t
    if cfg.ai == AIBehavior.MALICIOUS:
        return mat.s, mat.p
    return mat.r, mat.p


def _avg_payoffs_any(cfg: WellMixedConfig, k: int) -> tuple[float, float]:
    """Average payoffs at state k without the occupancy guards.

    The k = 0 cooperator row and k = N defector row are algebraic
    extensions of the formulas; they are exactly the payoff of the
    corresponding AI policy and are needed by the boundary transitions.
    """
    mat = cfg.matrix
    n, m = cfg.n, cfg.m
    a_c, a_d = _ai_payoff_terms(cfg)
    denom = n + m - 1
    pi_c = ((k - 1) * mat.r + (n - k) * mat.s + m * a_c) / denom
    pi_d = (k * mat.t + (n - k - 1) * mat.p + m * a_d) / denom
    return pi_c, pi_d


def avg_payoffs(cfg: WellMixedConfig, k: int) -> tuple[float, float]:
    """Average payoffs (pi_C, pi_D) of a human cooperator and defector.

    ``k`` is the number of human cooperators. The cooperator payoff
    requires k >= 1 and the defector payoff k <= N - 1; out-of-range
    states have no player of that type and raise ValueError.
    """
    _check_state(cfg, k)
    if k == 0:
        raise ValueError("pi_C undefined at k = 0: no human cooperator exists")
    if k == cfg.n:
        raise ValueError("pi_D undefined at k = N: no human defector exists")
    return _avg_payoffs_any(cfg, k)


def _check_state(cfg: WellMixedConfig, k: int) -> None:
    if not 0 <= k <= cfg.n:
        raise ValueError(f"state k={k} outside 0..{cfg.n}")


def _sigma(x: float) -> float:
    """Logistic function, evaluated without overflow."""
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _log_sigma(x: float) -> float:
    if x >= 0.0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


def _role_model_counts(cfg: WellMixedConfig, k: int) -> tuple[int, int, int, int]:
    """Counts of (human C, AI-as-C, human D, AI-as-D) role models at state k."""
    up_ai = cfg.m if cfg.ai == AIBehavior.SAMARITAN else 0
    dn_ai = cfg.m if cfg.ai == AIBehavior.MALICIOUS else 0
    return k, up_ai, cfg.n - k, dn_ai


def transition_probs(cfg: WellMixedConfig, k: int) -> tuple[float, float]:
    """(T+(k), T-(k)): probabilities that one event moves k up or down."""
    _check_state(cfg, k)
    n, m = cfg.n, cfg.m
    up_h, up_ai, dn_h, dn_ai = _role_model_counts(cfg, k)
    pool = n + m
    t_up = 0.0
    t_dn = 0.0
    if k < n and (up_h or up_ai):
        pi_c, pi_d = _avg_payoffs_any(cfg, k)
        delta = pi_c - pi_d
        bracket = up_h / pool * _sigma(cfg.beta_h * delta)
        if up_ai:
            bracket += up_ai / pool * _sigma(cfg.beta_ai * delta)
        t_up = (n - k) / n * bracket
    if k > 0 and (dn_h or dn_ai):
        pi_c, pi_d = _avg_payoffs_any(cfg, k)
        delta = pi_c - pi_d
        bracket = dn_h / pool * _sigma(-cfg.beta_h * delta)
        if dn_ai:
            bracket += dn_ai / pool * _sigma(-cfg.beta_ai * delta)
        t_dn = k / n * bracket
    return t_up, t_dn


def log_transition_probs(cfg: WellMixedConfig, k: int) -> tuple[float, float]:
    """(log T+(k), log T-(k)); structural zeros come back as -inf.

    This is the authoritative form for fixation computations: interior
    transitions stay finite in log space even when the raw probabilities
    underflow.
    """
    _check_state(cfg, k)
    n, m = cfg.n, cfg.m
    up_h, up_ai, dn_h, dn_ai = _role_model_counts(cfg, k)
    pool = n + m
    log_up = -math.inf
    log_dn = -math.inf
    if k < n and (up_h or up_ai):
        pi_c, pi_d = _avg_payoffs_any(cfg, k)
        delta = pi_c - pi_d
        terms = []
        if up_h:
            terms.append(math.log(up_h / pool) + _log_sigma(cfg.beta_h * delta))
        if up_ai:
            terms.append(math.log(up_ai / pool) + _log_sigma(cfg.beta_ai * delta))
        log_up = math.log((n - k) / n) + _log_add(terms)
    if k > 0 and (dn_h or dn_ai):
        pi_c, pi_d = _avg_payoffs_any(cfg, k)
        delta = pi_c - pi_d
        terms = []
        if dn_h:
            terms.append(math.log(dn_h / pool) + _log_sigma(-cfg.beta_h * delta))
        if dn_ai:
            terms.append(math.log(dn_ai / pool) + _log_sigma(-cfg.beta_ai * delta))
        log_dn = math.log(k / n) + _log_add(terms)
    return log_up, log_dn


def _log_add(terms: list[float]) -> float:
    if len(terms) == 1:
        return terms[0]
    return float(np.logaddexp(terms[0], terms[1]))


class FixationRatio(NamedTuple):
    """Product ratio r = prod_k T+(k)/T-(k) with its log.

    ``value`` is exp(log) and may overflow to inf or underflow to 0 for
    strong selection; ``log`` is always finite and is the number to use.
    """

    value: float
    log: float


def fixation_ratio(cfg: WellMixedConfig) -> FixationRatio:
    """Ratio of the two fixation probabilities, rho_C / rho_D.

    Computed as the product over interior states of T+(k)/T-(k),
    accumulated in log space.
    """
    log_r = 0.0
    for k in range(1, cfg.n):
        log_up, log_dn = log_transition_probs(cfg, k)
        log_r += log_up - log_dn
    return FixationRatio(value=math.exp(log_r) if log_r < 709 else math.inf,
                         log=log_r)


def fixation_probability(cfg: WellMixedConfig, invader: Strategy) -> float:
    """Probability that a single human invader takes over the human part.

    Starting from one cooperator among N - 1 defectors (or the mirror
    image for a defector invader), the probability of reaching the
    invader's absorbing boundary before the resident one:

        rho = 1 / (1 + sum_{i=1}^{N-1} prod_{j=1}^{i} gamma_j)

    with gamma_j = T-(j)/T+(j) for a cooperator invader and the roles
    exchanged under the state reversal k -> N - k for a defector.
    """
    n = cfg.n
    logs = [log_transition_probs(cfg, k) for k in range(1, n)]
    if invader == Strategy.COOPERATE:
        log_gammas = [dn - up for up, dn in logs]
    else:
        # walk j = 1.. over the defector count; state reversal k = N - j
        log_gammas = [logs[n - 1 - j][0] - logs[n - 1 - j][1] for j in range(1, n)]
    acc = 0.0
    partials = [0.0]
    for lg in log_gammas:
        acc += lg
        partials.append(acc)
    log_denom = _logsumexp(partials)
    return math.exp(-log_denom)


def _logsumexp(values: list[float]) -> float:
    top = max(values)
    if math.isinf(top):
        return top
    return top + math.log(sum(math.exp(v - top) for v in values))


def cooperation_frequency(cfg: WellMixedConfig) -> float:
    """Long-run frequency of full human cooperation, r / (1 + r).

    Evaluated as the logistic of log r, so saturation toward 0 or 1 is
    smooth rather than a 0/0 overflow.
    """
    return _sigma(fixation_ratio(cfg).log)


def closed_form_f(ai: AIBehavior, n: int, m: int, matrix: PayoffMatrix) -> float:
    """Closed form of the accumulated payoff difference sum_k delta(k).

    F = (N-1)/(N+M-1) [ (P-R) + N(S-P) + M X + (R+P-T-S) N/2 ]

    with X = R-T for Samaritan, S-P for Malicious and R-P for
    Discriminatory AI. The log of the product ratio decomposes as
    log r = beta * F + log G when both intensities are equal.
    """
    x = {
        AIBehavior.SAMARITAN: matrix.r - matrix.t,
        AIBehavior.MALICIOUS: matrix.s - matrix.p,
        AIBehavior.DISCRIMINATORY: matrix.r - matrix.p,
    }[ai]
    core = (matrix.p - matrix.r) + n * (matrix.s - matrix.p) + m * x
    skew = (matrix.r + matrix.p - matrix.t - matrix.s) * n / 2.0
    return (n - 1) / (n + m - 1) * (core + skew)


class GValue(NamedTuple):
    """Combinatorial prefactor of the product ratio, with its log."""

    value: float
    log: float


def closed_form_g(ai: AIBehavior, n: int, m: int) -> GValue:
    """Payoff-independent prefactor G of r = G exp(beta F).

    Samaritan AI tilts every upward step by (k + M)/k so that

        G_C = prod_{k=1}^{N-1} (k + M)/k = (N-1+M)! / ((N-1)! M!),

    Malicious AI tilts every downward step by the mirror factor
    (N - k)/(N - k + M), whose product telescopes to exactly 1/G_C, and
    Discriminatory AI tilts nothing, G_IR = 1. Computed through
    log-gamma so large populations cannot overflow.
    """
    if n < 2 or m < 0:
        raise ValueError("need n >= 2 and m >= 0")
    log_gc = math.lgamma(n + m) - math.lgamma(n) - math.lgamma(m + 1)
    if ai == AIBehavior.SAMARITAN:
        log_g = log_gc
    elif ai == AIBehavior.MALICIOUS:
        log_g = -log_gc
    else:
        log_g = 0.0
    return GValue(value=math.exp(log_g) if log_g < 709 else math.inf, log=log_g)


def risk_dominance(cfg: WellMixedConfig) -> bool:
    """True when cooperation is risk dominant: beta F + log G > 0.

    Defined for a single selection intensity; configs with different
    human and AI intensities raise ValueError.
    """
    if cfg.beta_h != cfg.beta_ai:
        raise ValueError("risk dominance is defined for beta_h == beta_ai")
    f = closed_form_f(cfg.ai, cfg.n, cfg.m, cfg.matrix)
    g = closed_form_g(cfg.ai, cfg.n, cfg.m)
    return cfg.beta_h * f + g.log > 0.0


def stationary_distribution(fixation: np.ndarray) -> np.ndarray:
    """Stationary distribution of the small-mutation strategy chain.

    ``fixation[i][j]`` is the probability that a single j-mutant fixates
    in a population of i-residents. In the rare-mutation limit the
    resident strategy performs a Markov chain with off-diagonal rates
    fixation[i][j] / (q - 1); the stationary row vector of that chain is
    returned. Raises ValueError for non-square input, probabilities
    outside [0, 1], or a reducible chain with more than one stationary
    distribution.
    """
    fix = np.asarray(fixation, dtype=float)
    if fix.ndim != 2 or fix.shape[0] != fix.shape[1]:
        raise ValueError("fixation matrix must be square")
    q = fix.shape[0]
    if q < 2:
        raise ValueError("need at least two strategies")
    off_diag = ~np.eye(q, dtype=bool)
    vals = fix[off_diag]
    if np.any(vals < 0.0) or np.any(vals > 1.0):
        raise ValueError("fixation probabilities must lie in [0, 1]")
    trans = np.where(off_diag, fix / (q - 1), 0.0)
    np.fill_diagonal(trans, 1.0 - trans.sum(axis=1))
    # left eigenvector for eigenvalue 1, via the null space of (T^t - I)
    u, s, vh = np.linalg.svd(trans.T - np.eye(q))
    null_dim = int(np.sum(s < 1e-9))
    if null_dim != 1:
        raise ValueError(
            "stationary distribution is not unique (reducible chain)"
        )
    vec = vh[-1]
    vec = vec * np.sign(vec.sum())
    if np.any(vec < -1e-9):
        raise ValueError("stationary vector has negative entries")
    vec = np.clip(vec, 0.0, None)
    return vec / vec.sum()


def brute_force_absorption(cfg: WellMixedConfig, invader: Strategy) -> float:
    """Absorption probability from a direct linear solve; test oracle.

    Treats both boundaries as absorbing (the convention under which the
    product formula is derived) and solves the first-step equations for
    the probability that a lone invader's target boundary is reached
    first. The solve runs in exact rational arithmetic: every float
    transition probability is a dyadic rational, so elimination over
    Fractions introduces no roundoff and the comparison isolates the
    formula's own error. Limited to N <= 14 to keep the rationals small.
    """
    n = cfg.n
    if n > 14:
        raise ValueError("brute force oracle limited to n <= 14")
    ups = []
    dns = []
    for k in range(n + 1):
        t_up, t_dn = transition_probs(cfg, k)
        ups.append(Fraction(t_up))
        dns.append(Fraction(t_dn))
    # unknowns u_1..u_{n-1}: probability of hitting the target boundary;
    # row i is state k = i + 1 with off-diagonals -dns[k], -ups[k]
    size = n - 1
    diag = [ups[k] + dns[k] for k in range(1, n)]
    rhs = [Fraction(0)] * size
    if invader == Strategy.COOPERATE:
        rhs[size - 1] = ups[n - 1]  # target boundary k = N
        start = 1
    else:
        rhs[0] = dns[1]  # target boundary k = 0
        start = n - 1
    for i in range(1, size):
        w = -dns[i + 1] / diag[i - 1]
        diag[i] += w * ups[i]
        rhs[i] -= w * rhs[i - 1]
    u = [Fraction(0)] * size
    u[size - 1] = rhs[size - 1] / diag[size - 1]
    for i in range(size - 2, -1, -1):
        u[i] = (rhs[i] + ups[i + 1] * u[i + 1]) / diag[i]
    return float(u[start - 1])

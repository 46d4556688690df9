"""Mean-field replicator dynamics of the hybrid population.

In the infinite-population limit the state is x, the fraction of
cooperators among humans, with a fixed share alpha of AI agents in the
total population. The payoff difference felt by a human cooperator is

    Samaritan:       delta_f = (R-T)[(1-a)x + a] + (S-P)(1-a)(1-x)
    Discriminatory:  delta_f = (R-T)(1-a)x + (S-P)(1-a)(1-x) + a(R-P)

and the evolution of x under pairwise comparison reads

    Samaritan:       dx/dt = (1-x) h(x),
                     h(x) = x(1-a) tanh(beta_H delta_f / 2)
                            + a / (1 + exp(-beta_AI delta_f))
    Discriminatory:  dx/dt = (1-x) x (1-a) tanh(beta_H delta_f / 2)

No replicator equation exists for Malicious AI; requesting one is a
domain error. x = 1 is always a fixed point; x = 0 is one for the
discriminatory case. For Samaritan AI an interior fixed point is
guaranteed whenever h(1) < 0, which holds for every alpha below the
critical fraction

    alpha_c = K / (1 + K),
    K = (1 + exp(beta_AI (T-R))) tanh(beta_H (T-R) / 2).

For beta_H = beta_AI = beta this reduces algebraically to
alpha_c = 1 - exp(-beta (T-R)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .game import AIBehavior, PayoffMatrix

STABLE = "stable"
UNSTABLE = "unstable"
MARGINAL = "marginal"


@dataclass(frozen=True)
class ReplicatorConfig:
    """Mean-field model parameters; alpha is the AI share of everyone."""

    alpha: float
    beta_h: float
    ai: AIBehavior
    matrix: PayoffMatrix
    beta_ai: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1); alpha = 1 leaves no humans")
        if self.beta_h < 0.0:
            raise ValueError("beta_h must be >= 0")
        if self.ai == AIBehavior.MALICIOUS:
            raise ValueError(
                "no replicator equation is defined for Malicious AI"
            )
        if self.beta_ai is None:
            object.__setattr__(self, "beta_ai", self.beta_h)
        elif self.beta_ai < 0.0:
            raise ValueError("beta_ai must be >= 0")


def _check_x(x) -> None:
    arr = np.asarray(x)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("x must lie in [0, 1]")


def delta_f(cfg: ReplicatorConfig, x):
    """Payoff difference Pi_C(x) - Pi_D(x); accepts scalars or arrays."""
    _check_x(x)
    m = cfg.matrix
    a = cfg.alpha
    if cfg.ai == AIBehavior.SAMARITAN:
        return (m.r - m.t) * ((1.0 - a) * x + a) + (m.s - m.p) * (1.0 - a) * (1.0 - x)
    return (
        (m.r - m.t) * (1.0 - a) * x
        + (m.s - m.p) * (1.0 - a) * (1.0 - x)
        + a * (m.r - m.p)
    )


def h_function(cfg: ReplicatorConfig, x):
    """Bracketed factor of the Samaritan equation, dx/dt = (1-x) h(x).

    h(0) = alpha p_DC(beta_AI) > 0 whenever alpha > 0, so a sign change
    of h on [0, 1] (h(1) < 0) guarantees an interior fixed point.
    """
    if cfg.ai != AIBehavior.SAMARITAN:
        raise ValueError("h(x) is defined only for Samaritan AI")
    _check_x(x)
    df = delta_f(cfg, x)
    a = cfg.alpha
    return x * (1.0 - a) * np.tanh(0.5 * cfg.beta_h * df) + a * expit(cfg.beta_ai * df)


def rhs(cfg: ReplicatorConfig, x):
    """Time derivative dx/dt of the human cooperator fraction."""
    _check_x(x)
    df = delta_f(cfg, x)
    a = cfg.alpha
    th = np.tanh(0.5 * cfg.beta_h * df)
    if cfg.ai == AIBehavior.SAMARITAN:
        bracket = x * (1.0 - a) * th + a * expit(cfg.beta_ai * df)
        return (1.0 - x) * bracket
    return (1.0 - x) * x * (1.0 - a) * th


def _rhs_scalar(cfg: ReplicatorConfig, x: float) -> float:
    """math-only rhs for hot loops (integration, bisection)."""
    m = cfg.matrix
    a = cfg.alpha
    if cfg.ai == AIBehavior.SAMARITAN:
        df = (m.r - m.t) * ((1.0 - a) * x + a) + (m.s - m.p) * (1.0 - a) * (1.0 - x)
        th = math.tanh(0.5 * cfg.beta_h * df)
        y = cfg.beta_ai * df
        if y >= 0.0:
            sig = 1.0 / (1.0 + math.exp(-y))
        else:
            e = math.exp(y)
            sig = e / (1.0 + e)
        return (1.0 - x) * (x * (1.0 - a) * th + a * sig)
    df = (
        (m.r - m.t) * (1.0 - a) * x
        + (m.s - m.p) * (1.0 - a) * (1.0 - x)
        + a * (m.r - m.p)
    )
    return (1.0 - x) * x * (1.0 - a) * math.tanh(0.5 * cfg.beta_h * df)


def critical_alpha(beta_h: float, beta_ai: float, matrix: PayoffMatrix) -> float:
    """AI fraction below which an interior fixed point is guaranteed.

    Solves h(1) < 0 for alpha. Returns K/(1+K) with
    K = (1 + exp(beta_AI (T-R))) tanh(beta_H (T-R)/2), evaluated through
    log K = softplus(beta_AI (T-R)) + log tanh(...) so large exponents
    cannot overflow. beta_H = 0 gives K = 0 and alpha_c = 0.
    """
    if matrix.t <= matrix.r:
        raise ValueError("critical alpha requires T > R (temptation to defect)")
    if beta_h < 0.0 or beta_ai < 0.0:
        raise ValueError("selection intensities must be >= 0")
    gap = matrix.t - matrix.r
    th = math.tanh(0.5 * beta_h * gap)
    if th == 0.0:
        return 0.0
    y = beta_ai * gap
    softplus = math.log1p(math.exp(y)) if y < 30.0 else y + math.log1p(math.exp(-y))
    log_k = softplus + math.log(th)
    # K/(1+K) is the logistic of log K
    return float(expit(log_k))


@dataclass(frozen=True)
class FixedPoint:
    x: float
    stability: str


def find_fixed_points(
    cfg: ReplicatorConfig,
    grid_points: int = 10_001,
    bisect_tol: float = 1e-10,
    classify_eps: float = 1e-6,
) -> list[FixedPoint]:
    """All roots of rhs in [0, 1], located by grid scan plus bisection.

    The scan uses a uniform grid (default 10001 points); every sign
    change is refined by bisection until the bracketing interval is
    narrower than ``bisect_tol``. Each root is classified from the sign
    of rhs at distance ``classify_eps`` on either side. Roots closer
    together than the grid spacing cannot be separated. The degenerate
    dynamics rhs == 0 everywhere (discriminatory AI at beta_H = 0)
    reports the boundary points as marginal.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    xs = np.linspace(0.0, 1.0, grid_points)
    fs = np.asarray(rhs(cfg, xs), dtype=float)
    if np.all(fs == 0.0):
        return [FixedPoint(0.0, MARGINAL), FixedPoint(1.0, MARGINAL)]
    candidates: list[float] = []
    for i in range(grid_points):
        if fs[i] == 0.0 and (i == 0 or fs[i - 1] != 0.0):
            candidates.append(float(xs[i]))
    for i in range(grid_points - 1):
        if fs[i] * fs[i + 1] < 0.0:
            candidates.append(_bisect(cfg, float(xs[i]), float(xs[i + 1]), bisect_tol))
    roots: list[float] = []
    for x in sorted(candidates):
        if not roots or x - roots[-1] > 1e-9:
            roots.append(x)
    return [FixedPoint(x, _classify(cfg, x, classify_eps)) for x in roots]


def _bisect(cfg: ReplicatorConfig, lo: float, hi: float, tol: float) -> float:
    f_lo = _rhs_scalar(cfg, lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = _rhs_scalar(cfg, mid)
        if f_mid == 0.0:
            return mid
        if (f_lo < 0.0) != (f_mid < 0.0):
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def _classify(cfg: ReplicatorConfig, x: float, eps: float) -> str:
    left = _rhs_scalar(cfg, x - eps) if x - eps >= 0.0 else None
    right = _rhs_scalar(cfg, x + eps) if x + eps <= 1.0 else None
    if left is None:  # boundary x = 0
        if right is None:
            return MARGINAL
        return STABLE if right < 0.0 else UNSTABLE if right > 0.0 else MARGINAL
    if right is None:  # boundary x = 1
        return STABLE if left > 0.0 else UNSTABLE if left < 0.0 else MARGINAL
    if left > 0.0 > right:
        return STABLE
    if left < 0.0 < right:
        return UNSTABLE
    return MARGINAL


def integrate(
    cfg: ReplicatorConfig, x0: float, t_end: float, dt: float = 0.01
) -> np.ndarray:
    """Classic fourth-order one-step integration of dx/dt = rhs(x).

    Returns an array of (t, x) rows including the initial condition.
    x is clamped to [0, 1] after every step; since rhs vanishes on the
    boundary the clamp only ever absorbs round-off.
    """
    if not 0.0 <= x0 <= 1.0:
        raise ValueError("x0 must lie in [0, 1]")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t_end < 0.0:
        raise ValueError("t_end must be >= 0")
    n_steps = max(0, math.ceil(t_end / dt - 1e-9))
    out = np.empty((n_steps + 1, 2))
    out[0] = (0.0, x0)
    x = x0
    t = 0.0
    for i in range(n_steps):
        h = min(dt, t_end - t)
        k1 = _rhs_scalar(cfg, x)
        k2 = _rhs_scalar(cfg, _clamp(x + 0.5 * h * k1))
        k3 = _rhs_scalar(cfg, _clamp(x + 0.5 * h * k2))
        k4 = _rhs_scalar(cfg, _clamp(x + h * k3))
        x = _clamp(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        t = t_end if i == n_steps - 1 else (i + 1) * dt
        out[i + 1] = (t, x)
    return out


def _clamp(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x

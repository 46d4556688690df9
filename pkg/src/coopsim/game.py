"""One-shot prisoner's dilemma primitives and the Fermi imitation rule.

A strict prisoner's dilemma is any payoff matrix with T > R > P > S,
where R is the reward for mutual cooperation, P the punishment for
mutual defection, T the temptation to defect against a cooperator and S
the sucker payoff for cooperating against a defector. The donation game
is the two-parameter special case (R, S, T, P) = (b - c, -c, b, 0) for a
benefit b and a cost c with b > c > 0.

AI agents never update; their behavior is one of three fixed policies:

* Samaritan:       unconditionally cooperates.
* Malicious:       unconditionally defects.
* Discriminatory:  recognizes the opponent's intended action and mirrors
                   it (cooperates with cooperators, defects on defectors;
                   two discriminators cooperate with each other).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum


class Strategy(IntEnum):
    """A human player's action in the one-shot game."""

    COOPERATE = 0
    DEFECT = 1


class AIBehavior(IntEnum):
    """Fixed policy of an AI agent."""

    SAMARITAN = 0
    MALICIOUS = 1
    DISCRIMINATORY = 2


@dataclass(frozen=True)
class PayoffMatrix:
    """Symmetric two-player payoff matrix in (r, s, t, p) form.

    ``r``: both cooperate; ``s``: cooperator against defector;
    ``t``: defector against cooperator; ``p``: both defect.
    Construction does not enforce the dilemma ordering so that tests can
    explore degenerate games; check :attr:`is_strict_pd` where it matters.
    """

    r: float
    s: float
    t: float
    p: float

    @property
    def is_strict_pd(self) -> bool:
        return self.t > self.r > self.p > self.s


@dataclass(frozen=True)
class DonationParams:
    """Benefit/cost pair of the donation game; requires b > c > 0."""

    b: float
    c: float

    def __post_init__(self):
        if not (self.b > self.c > 0.0):
            raise ValueError(
                f"donation game requires b > c > 0, got b={self.b}, c={self.c}"
            )


def donation_matrix(params: DonationParams) -> PayoffMatrix:
    """Payoff matrix (b - c, -c, b, 0) of the donation game."""
    return PayoffMatrix(r=params.b - params.c, s=-params.c, t=params.b, p=0.0)


def donation(b: float, c: float) -> PayoffMatrix:
    """Shorthand for ``donation_matrix(DonationParams(b, c))``."""
    return donation_matrix(DonationParams(b, c))


def payoff(s1: Strategy, s2: Strategy, matrix: PayoffMatrix) -> tuple[float, float]:
    """Payoffs (to player 1, to player 2) for one interaction."""
    if s1 == Strategy.COOPERATE:
        if s2 == Strategy.COOPERATE:
            return matrix.r, matrix.r
        return matrix.s, matrix.t
    if s2 == Strategy.COOPERATE:
        return matrix.t, matrix.s
    return matrix.p, matrix.p


def human_ai_payoffs(
    strategy: Strategy, ai: AIBehavior, matrix: PayoffMatrix
) -> tuple[float, float]:
    """Payoffs (to the human, to the AI) when a human meets an AI agent.

    A discriminatory AI mirrors the human's action, so both sides receive
    the diagonal payoff of the human's strategy.
    """
    if ai == AIBehavior.SAMARITAN:
        return payoff(strategy, Strategy.COOPERATE, matrix)
    if ai == AIBehavior.MALICIOUS:
        return payoff(strategy, Strategy.DEFECT, matrix)
    return payoff(strategy, strategy, matrix)


def indicator(ai: AIBehavior, which: AIBehavior) -> int:
    """1 if ``ai`` is the policy ``which``, else 0."""
    return 1 if ai == which else 0


def fermi_prob(f_self: float, f_other: float, beta: float) -> float:
    """Probability of adopting the other player's strategy.

    The pairwise-comparison rule 1 / (1 + exp(-beta * (f_other - f_self))).
    Evaluated on the side of the sign that only ever exponentiates
    non-positive numbers, so extreme fitness gaps saturate smoothly to
    0.0 or 1.0 instead of overflowing.
    """
    if beta < 0.0:
        raise ValueError("selection intensity beta must be >= 0")
    x = beta * (f_other - f_self)
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def log_fermi_prob(f_self: float, f_other: float, beta: float) -> float:
    """log of :func:`fermi_prob`; finite for all finite inputs."""
    if beta < 0.0:
        raise ValueError("selection intensity beta must be >= 0")
    x = beta * (f_other - f_self)
    if x >= 0.0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))

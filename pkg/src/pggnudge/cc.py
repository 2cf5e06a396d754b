"""Aspiration-driven conditional cooperator.

The agent keeps a single number p, its expected cooperative contribution.
After each round it compares its payoff to its aspiration level, squashes the
difference into a stimulus s = tanh(beta * (payoff - aspiration)), and moves p
up or down depending on whether its last action counted as cooperative and
whether it was satisfied.  The actual contribution is a Gaussian draw around p,
clamped to [0, 1].

Two update conventions exist for the two defect cases (last action below the
cooperation threshold).  The "bounded" form keeps p in [0, 1] for any stimulus
in (-1, 1) with no clamping.  The "as_printed_with_clamp" form swaps the two
defect cases and can leave [0, 1], so it is clamped; it is kept only for
comparison and is not the default.
"""

import math
from dataclasses import dataclass

import numpy as np

from .game import ContractError, GameConfig, RoundResult

# Incremented when the bounded update has to rescue a p outside [0,1].
# The bounded convention guarantees this never happens; fuzz tests assert
# the counter stays at zero.
_bounded_clamp_events = 0


def bounded_clamp_count() -> int:
    return _bounded_clamp_events


@dataclass(frozen=True)
class CcParams:
    aspiration_a: float = 1.0
    threshold_x: float = 0.4
    beta: float = 0.4
    sigma: float = 0.2
    bm_form: str = "bounded"

    def __post_init__(self):
        if self.beta < 0:
            raise ContractError(f"beta must be >= 0, got {self.beta}")
        if self.sigma < 0:
            raise ContractError(f"sigma must be >= 0, got {self.sigma}")
        if not 0.0 <= self.threshold_x <= 1.0:
            raise ContractError(f"threshold_x must be in [0,1], got {self.threshold_x}")

    @classmethod
    def from_game_config(cls, config: GameConfig) -> "CcParams":
        return cls(
            aspiration_a=config.aspiration_a,
            threshold_x=config.threshold_x,
            beta=config.beta,
            sigma=config.sigma,
            bm_form=config.bm_form,
        )


@dataclass
class CcState:
    p: float = 0.0
    last_action: float = 0.0
    initialized: bool = False


def stimulus(payoff: float, params: CcParams) -> float:
    """Satisfaction signal in (-1, 1): positive above aspiration, negative below."""
    return math.tanh(params.beta * (payoff - params.aspiration_a))


def bm_update(p_prev: float, a_prev: float, s_prev: float, params: CcParams) -> float:
    """Move the expected contribution p according to the four-case rule.

    Cooperative last action (a_prev >= X): satisfaction pushes p toward 1 by
    (1-p)*s, dissatisfaction pulls it toward 0 by p*|s|.  Defecting last action:
    under the bounded convention satisfaction pulls p toward 0 by p*s and
    dissatisfaction pushes it toward 1 by (1-p)*|s|.
    """
    global _bounded_clamp_events
    if not 0.0 <= p_prev <= 1.0:
        raise ContractError(f"p_prev must be in [0,1], got {p_prev}")

    cooperative = a_prev >= params.threshold_x
    satisfied = s_prev >= 0.0
    if cooperative:
        if satisfied:
            p = p_prev + (1.0 - p_prev) * s_prev
        else:
            p = p_prev + p_prev * s_prev
    elif params.bm_form == "bounded":
        if satisfied:
            p = p_prev - p_prev * s_prev
        else:
            p = p_prev - (1.0 - p_prev) * s_prev
    else:  # as_printed_with_clamp: defect cases as literally printed
        if satisfied:
            p = p_prev - (1.0 - p_prev) * s_prev
        else:
            p = p_prev - p_prev * s_prev

    if p < 0.0 or p > 1.0:
        if params.bm_form == "bounded":
            _bounded_clamp_events += 1
        p = min(1.0, max(0.0, p))
    return p


def sample_action(p: float, params: CcParams, rng: np.random.Generator) -> float:
    """Gaussian draw around p, clamped (not resampled) to [0, 1]."""
    if params.sigma == 0.0:
        return p
    a = p + params.sigma * rng.standard_normal()
    return min(1.0, max(0.0, a))


def initial_action(rng: np.random.Generator) -> float:
    """Round-1 contribution: a plain uniform draw on [0, 1]."""
    return rng.uniform(0.0, 1.0)


def cc_step(state: CcState, own_payoff: float, params: CcParams,
            rng: np.random.Generator) -> tuple[CcState, float]:
    """One learning step: stimulus from last payoff, p update, new action."""
    if not state.initialized:
        raise ContractError("cc_step called before the round-1 initial_action")
    s = stimulus(own_payoff, params)
    p = bm_update(state.p, state.last_action, s, params)
    action = sample_action(p, params, rng)
    return CcState(p=p, last_action=action, initialized=True), action


class CcAgent:
    """Roster adapter: tracks own payoff between rounds and steps the learner.

    Round 1 contributes a uniform draw and sets p to it, giving the first
    update a defined predecessor.
    """

    label = "cc"

    def __init__(self, seat: int, params: CcParams):
        self.seat = seat
        self.params = params
        self.state = CcState()
        self._last_payoff = math.nan

    def act(self, view, rng: np.random.Generator) -> float:
        if not self.state.initialized:
            a = initial_action(rng)
            self.state = CcState(p=a, last_action=a, initialized=True)
            return a
        self.state, a = cc_step(self.state, self._last_payoff, self.params, rng)
        return a

    def observe(self, result: RoundResult) -> None:
        self._last_payoff = float(result.payoffs[self.seat])

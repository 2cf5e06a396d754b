"""The iterated public goods game.

Each round every player receives one token and contributes a fraction of it
to a common pool; the pool is multiplied by k and split evenly, so player i's
payoff is (k/N) * sum(contributions) + (1 - own contribution).  With k/N < 1
free riding dominates each single round, which is what makes the repeated
game a social dilemma.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Protocol, Sequence

import numpy as np


class ContractError(ValueError):
    """A caller violated an operation's contract (bad shape, range, or state)."""


@dataclass(frozen=True)
class GameConfig:
    """Game and agent constants. Defaults reproduce the reference setup."""

    n_players: int = 4
    t_max: int = 25
    k: float = 1.6
    aspiration_a: float = 1.0    # payoff level that separates satisfied from dissatisfied
    threshold_x: float = 0.4     # own-contribution level that counts as "cooperative"
    beta: float = 0.4            # stimulus sensitivity
    sigma: float = 0.2           # std-dev of the Gaussian action noise
    coop_threshold: float = 0.5  # contribution level counted as cooperative in reports
    bm_form: str = "bounded"     # "bounded" | "as_printed_with_clamp"

    def __post_init__(self):
        if self.n_players < 2:
            raise ContractError(f"n_players must be >= 2, got {self.n_players}")
        if self.t_max < 1:
            raise ContractError(f"t_max must be >= 1, got {self.t_max}")
        if self.k <= 0:
            raise ContractError(f"k must be > 0, got {self.k}")
        if self.sigma < 0:
            raise ContractError(f"sigma must be >= 0, got {self.sigma}")
        if not 0.0 <= self.threshold_x <= 1.0:
            raise ContractError(f"threshold_x must be in [0,1], got {self.threshold_x}")
        if not 0.0 <= self.coop_threshold <= 1.0:
            raise ContractError(f"coop_threshold must be in [0,1], got {self.coop_threshold}")
        if self.bm_form not in ("bounded", "as_printed_with_clamp"):
            raise ContractError(f"unknown bm_form {self.bm_form!r}")


@dataclass(frozen=True)
class RoundResult:
    """Public outcome of one round: what everyone contributed and earned."""

    round_index: int                 # 1-based
    contributions: np.ndarray
    payoffs: np.ndarray


@dataclass
class EpisodeRecord:
    """One full game: config snapshot, roster labels, and all round results."""

    config: GameConfig
    roster: tuple[str, ...]
    rounds: list[RoundResult] = field(default_factory=list)

    def contributions(self) -> np.ndarray:
        """(t_max, n_players) matrix of contributions."""
        return np.array([r.contributions for r in self.rounds])

    def payoffs(self) -> np.ndarray:
        """(t_max, n_players) matrix of payoffs."""
        return np.array([r.payoffs for r in self.rounds])


class GameView(NamedTuple):
    """What an agent sees when asked to act: the round number and, from round
    two on, the previous round's public result."""

    round_index: int
    last_round: RoundResult | None


class Agent(Protocol):
    label: str

    def act(self, view: GameView, rng: np.random.Generator) -> float: ...

    def observe(self, result: RoundResult) -> None: ...


def compute_payoffs(contributions, config: GameConfig) -> np.ndarray:
    """Payoff vector for one round: (k/N) * pool + kept endowment."""
    a = np.asarray(contributions, dtype=float)
    if a.shape != (config.n_players,):
        raise ContractError(
            f"expected {config.n_players} contributions, got shape {a.shape}"
        )
    if np.any(a < 0.0) or np.any(a > 1.0):
        raise ContractError(f"contributions must be in [0,1], got {a}")
    share = (config.k / config.n_players) * a.sum()
    return share + (1.0 - a)


def step(round_index: int, actions, config: GameConfig) -> RoundResult:
    """Execute one round at the given 1-based round index."""
    if not 1 <= round_index <= config.t_max:
        raise ContractError(
            f"round_index must be in [1, {config.t_max}], got {round_index}"
        )
    a = np.asarray(actions, dtype=float)
    payoffs = compute_payoffs(a, config)
    return RoundResult(round_index=round_index, contributions=a, payoffs=payoffs)


def run_episode(agents: Sequence[Agent], config: GameConfig,
                rng: np.random.Generator) -> EpisodeRecord:
    """Play t_max rounds with the given roster.

    Agents act in seat order (all consuming the one episode stream, so a fixed
    seed and roster reproduce the episode bit for bit) and then all observe the
    full public round result.
    """
    if len(agents) != config.n_players:
        raise ContractError(
            f"roster size {len(agents)} != n_players {config.n_players}"
        )
    record = EpisodeRecord(config=config, roster=tuple(a.label for a in agents))
    last: RoundResult | None = None
    for t in range(1, config.t_max + 1):
        view = GameView(round_index=t, last_round=last)
        actions = [agent.act(view, rng) for agent in agents]
        result = step(t, actions, config)
        for agent in agents:
            agent.observe(result)
        record.rounds.append(result)
        last = result
    return record

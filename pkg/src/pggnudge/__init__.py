"""Iterated public goods game with Bush-Mosteller conditional cooperators and a
PPO-trained nudging agent, plus the statistics and figure-data harness used to
evaluate whether the nudging agent raises cooperation."""

__version__ = "0.1.0"

from .game import ContractError, GameConfig, RoundResult, EpisodeRecord
from .cc import CcParams, CcState, CcAgent
from .policy import PolicyParameters
from .ppo import TrainConfig, RolloutBuffer, TrainingDiverged
from .harness import CampaignSpec

__all__ = [
    "ContractError",
    "GameConfig",
    "RoundResult",
    "EpisodeRecord",
    "CcParams",
    "CcState",
    "CcAgent",
    "PolicyParameters",
    "TrainConfig",
    "RolloutBuffer",
    "TrainingDiverged",
    "CampaignSpec",
    "__version__",
]

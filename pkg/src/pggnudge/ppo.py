"""PPO training of the nudging agent against three conditional cooperators.

A training step is one game round.  Rollouts are whole episodes (batch_steps
must be a multiple of t_max) played against freshly initialized cooperators;
the planner's reward each round is computed from the cooperators' same-round
contributions, either their sum or the fraction strictly above 0.5.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import policy
from .cc import CcAgent, CcParams
from .game import ContractError, GameConfig, run_episode
from .rng import STREAM_OPT_BASE, substream

REWARD_KINDS = ("sum", "prop")


@dataclass(frozen=True)
class TrainConfig:
    reward_kind: str = "sum"
    total_steps: int = 4_000_000
    batch_steps: int = 4_000
    minibatch_size: int = 128
    epochs_per_batch: int = 30
    clip_epsilon: float = 0.3
    discount_gamma: float = 1.0
    learning_rate: float = 5e-5
    value_coeff: float = 0.5
    entropy_coeff: float = 0.0
    seed: int = 0
    optimizer: str = "adam"          # "adam" | "sgd"
    advantage_norm: bool = True
    grad_clip_norm: float | None = None
    learning_rate_final: float | None = None  # linear schedule when set

    def __post_init__(self):
        if self.reward_kind not in REWARD_KINDS:
            raise ContractError(f"reward_kind must be one of {REWARD_KINDS}")
        if self.minibatch_size > self.batch_steps:
            raise ContractError("minibatch_size must be <= batch_steps")
        if not 0.0 < self.clip_epsilon < 1.0:
            raise ContractError("clip_epsilon must be in (0, 1)")
        if self.optimizer not in ("adam", "sgd"):
            raise ContractError(f"unknown optimizer {self.optimizer!r}")


def reward_sum(others_contributions) -> float:
    """Total contribution of the cooperators this round."""
    return float(np.sum(others_contributions))


def reward_prop(others_contributions) -> float:
    """Fraction of cooperators contributing strictly above 0.5 this round."""
    a = np.asarray(others_contributions)
    return float(np.count_nonzero(a > 0.5)) / a.size


REWARD_FNS = {"sum": reward_sum, "prop": reward_prop}


class PlannerAgent:
    """Roster adapter around the policy net.

    In "sample" mode actions are drawn from the softmax exactly as during
    training; "argmax" picks the modal action.  With record=True the agent
    keeps the per-step trace (observation, action index, log-prob, value,
    entropy, reward) that rollout collection needs.
    """

    def __init__(self, seat: int, params: policy.PolicyParameters,
                 config: GameConfig, reward_kind: str = "sum",
                 mode: str = "sample", record: bool = False):
        self.label = f"planner-{reward_kind}"
        self.seat = seat
        self.params = params
        self.config = config
        self.mode = mode
        self.record = record
        self._reward_fn = REWARD_FNS[reward_kind]
        self.trace_obs: list[np.ndarray] = []
        self.trace_actions: list[int] = []
        self.trace_log_probs: list[float] = []
        self.trace_values: list[float] = []
        self.trace_entropies: list[float] = []
        self.trace_rewards: list[float] = []

    def act(self, view, rng) -> float:
        obs = policy.encode_observation(view.last_round, view.round_index, self.config)
        probs, value = policy.forward(self.params, obs)
        if self.mode == "argmax":
            idx = int(np.argmax(probs))
            log_prob = float(np.log(probs[idx]))
        else:
            idx, log_prob = policy.sample_policy_action(probs, rng)
        if self.record:
            self.trace_obs.append(obs)
            self.trace_actions.append(idx)
            self.trace_log_probs.append(log_prob)
            self.trace_values.append(value)
            self.trace_entropies.append(float(-(probs * np.log(probs + 1e-300)).sum()))
        return policy.action_value(idx)

    def observe(self, result) -> None:
        if self.record:
            others = np.delete(result.contributions, self.seat)
            self.trace_rewards.append(self._reward_fn(others))


@dataclass
class RolloutBuffer:
    """Per-step trajectories for one optimization batch."""

    obs: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray           # True on the last step of each episode
    entropies: np.ndarray
    episode_rewards: np.ndarray
    returns: np.ndarray | None = None
    advantages: np.ndarray | None = None

    def __len__(self) -> int:
        return self.obs.shape[0]


def make_cc_roster(config: GameConfig, n: int):
    params = CcParams.from_game_config(config)
    return [CcAgent(seat, params) for seat in range(n)]


def collect_rollouts(params: policy.PolicyParameters, train_cfg: TrainConfig,
                     game_cfg: GameConfig, episode_offset: int = 0) -> RolloutBuffer:
    """Play batch_steps/t_max episodes against fresh cooperators.

    Episode e uses the counter-based stream (seed, episode_offset + e), so a
    buffer is identical no matter how collection is scheduled or resumed.
    """
    if train_cfg.batch_steps % game_cfg.t_max != 0:
        raise ContractError("batch_steps must be a multiple of t_max")
    n_episodes = train_cfg.batch_steps // game_cfg.t_max
    obs, actions, log_probs, values, entropies, rewards = [], [], [], [], [], []
    dones = np.zeros(train_cfg.batch_steps, dtype=bool)
    episode_rewards = np.empty(n_episodes)
    for e in range(n_episodes):
        rng = substream(train_cfg.seed, episode_offset + e)
        planner = PlannerAgent(game_cfg.n_players - 1, params, game_cfg,
                               reward_kind=train_cfg.reward_kind, record=True)
        roster = make_cc_roster(game_cfg, game_cfg.n_players - 1) + [planner]
        run_episode(roster, game_cfg, rng)
        obs.extend(planner.trace_obs)
        actions.extend(planner.trace_actions)
        log_probs.extend(planner.trace_log_probs)
        values.extend(planner.trace_values)
        entropies.extend(planner.trace_entropies)
        rewards.extend(planner.trace_rewards)
        dones[(e + 1) * game_cfg.t_max - 1] = True
        episode_rewards[e] = sum(planner.trace_rewards)
    return RolloutBuffer(
        obs=np.array(obs),
        actions=np.array(actions, dtype=int),
        log_probs=np.array(log_probs),
        rewards=np.array(rewards),
        values=np.array(values),
        dones=dones,
        entropies=np.array(entropies),
        episode_rewards=episode_rewards,
    )


def compute_returns_advantages(buffer: RolloutBuffer, gamma: float,
                               normalize: bool = True) -> RolloutBuffer:
    """Fill in return-to-go within each episode and (optionally batch-normalized)
    advantages return - value."""
    n = len(buffer)
    returns = np.empty(n)
    running = 0.0
    for t in range(n - 1, -1, -1):
        if buffer.dones[t]:
            running = 0.0
        running = buffer.rewards[t] + gamma * running
        returns[t] = running
    adv = returns - buffer.values
    if normalize:
        adv = adv - adv.mean()
        std = adv.std()
        if std > 0.0:
            adv = adv / std
    buffer.returns = returns
    buffer.advantages = adv
    return buffer


def ppo_surrogate(new_log_prob, old_log_prob, advantage, clip_epsilon: float):
    """Per-sample clipped objective min(r*A, clip(r)*A), r the probability ratio."""
    ratio = np.exp(np.asarray(new_log_prob) - np.asarray(old_log_prob))
    adv = np.asarray(advantage)
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    return np.minimum(ratio * adv, clipped * adv)


class Adam:
    """Adaptive-moment optimizer over the parameter array dict."""

    def __init__(self, params: policy.PolicyParameters, lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.arrays().items()}
        self.v = {k: np.zeros_like(v) for k, v in params.arrays().items()}

    def step(self, grads: dict) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for k, arr in self.params.arrays().items():
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            arr -= self.lr * (self.m[k] / b1c) / (np.sqrt(self.v[k] / b2c) + self.eps)


class Sgd:
    """Plain gradient descent fallback."""

    def __init__(self, params: policy.PolicyParameters, lr: float):
        self.params = params
        self.lr = lr

    def step(self, grads: dict) -> None:
        for k, arr in self.params.arrays().items():
            arr -= self.lr * grads[k]


def clip_gradients(grads: dict, max_norm: float) -> dict:
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm and total > 0.0:
        scale = max_norm / total
        grads = {k: g * scale for k, g in grads.items()}
    return grads


@dataclass
class BatchStats:
    batch: int
    mean_episodic_reward: float
    policy_loss: float
    value_loss: float
    entropy: float
    wall_clock: float


class TrainingDiverged(RuntimeError):
    """Raised when a non-finite loss or gradient appears; carries diagnostics."""

    def __init__(self, message: str, batch: int, losses: dict | None = None):
        super().__init__(message)
        self.batch = batch
        self.losses = losses or {}


def train(train_cfg: TrainConfig, game_cfg: GameConfig | None = None,
          on_batch=None) -> tuple[policy.PolicyParameters, list[BatchStats]]:
    """Full PPO loop; returns trained parameters and the per-batch log."""
    game_cfg = game_cfg or GameConfig()
    n_batches = train_cfg.total_steps // train_cfg.batch_steps
    params = policy.init_params(game_cfg.n_players + 1, train_cfg.seed)
    params.meta = {"reward_kind": train_cfg.reward_kind}
    opt_cls = Adam if train_cfg.optimizer == "adam" else Sgd
    opt = opt_cls(params, train_cfg.learning_rate)
    episodes_per_batch = train_cfg.batch_steps // game_cfg.t_max

    log: list[BatchStats] = []
    t0 = time.perf_counter()
    for b in range(n_batches):
        if train_cfg.learning_rate_final is not None and n_batches > 1:
            frac = b / (n_batches - 1)
            opt.lr = (1.0 - frac) * train_cfg.learning_rate + frac * train_cfg.learning_rate_final

        buffer = collect_rollouts(params, train_cfg, game_cfg,
                                  episode_offset=b * episodes_per_batch)
        compute_returns_advantages(buffer, train_cfg.discount_gamma,
                                   normalize=train_cfg.advantage_norm)
        shuffle_rng = substream(train_cfg.seed, STREAM_OPT_BASE + b)
        n = len(buffer)
        pol_losses, val_losses = [], []
        try:
            for _ in range(train_cfg.epochs_per_batch):
                perm = shuffle_rng.permutation(n)
                for start in range(0, n, train_cfg.minibatch_size):
                    sel = perm[start:start + train_cfg.minibatch_size]
                    grads, losses = policy.backward(
                        params, buffer.obs[sel], buffer.actions[sel],
                        buffer.log_probs[sel], buffer.advantages[sel],
                        buffer.returns[sel], train_cfg.clip_epsilon,
                        train_cfg.value_coeff, train_cfg.entropy_coeff)
                    if train_cfg.grad_clip_norm is not None:
                        grads = clip_gradients(grads, train_cfg.grad_clip_norm)
                    opt.step(grads)
                    pol_losses.append(losses["policy_loss"])
                    val_losses.append(losses["value_loss"])
        except FloatingPointError as exc:
            raise TrainingDiverged(str(exc), batch=b,
                                   losses={"policy_loss": pol_losses[-1:],
                                           "value_loss": val_losses[-1:]}) from exc

        stats = BatchStats(
            batch=b,
            mean_episodic_reward=float(buffer.episode_rewards.mean()),
            policy_loss=float(np.mean(pol_losses)),
            value_loss=float(np.mean(val_losses)),
            entropy=float(buffer.entropies.mean()),
            wall_clock=time.perf_counter() - t0,
        )
        log.append(stats)
        if on_batch is not None:
            on_batch(stats)
    return params, log

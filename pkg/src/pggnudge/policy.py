"""Policy and value network for the nudging agent.

A small fully connected net: shared tanh trunk, a softmax head over the 101
contributions {0.00, 0.01, ..., 1.00}, and a scalar value head.  Forward and
backward passes are plain numpy; backward returns analytic gradients of the
PPO loss (clipped surrogate + value MSE - entropy bonus) that are checked
against central finite differences in the test suite.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .game import ContractError, GameConfig, RoundResult
from .rng import STREAM_INIT, substream

ACTION_STEP = 0.01
N_ACTIONS = 101
HIDDEN = (64, 64)
FORMAT_VERSION = 1


def action_value(index: int) -> float:
    """Contribution encoded by a grid index."""
    return index / 100.0


def encode_observation(last_round: RoundResult | None, round_index: int,
                       config: GameConfig) -> np.ndarray:
    """Feature vector: previous contributions (zeros in round 1, planner's own
    last) plus the normalized round index."""
    obs = np.zeros(config.n_players + 1)
    if last_round is not None:
        obs[: config.n_players] = last_round.contributions
    obs[-1] = round_index / config.t_max
    return obs


@dataclass
class PolicyParameters:
    """Weights and biases, plus metadata carried into the model file."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w_pi: np.ndarray
    b_pi: np.ndarray
    w_v: np.ndarray
    b_v: np.ndarray
    version: int = FORMAT_VERSION
    meta: dict = field(default_factory=dict)

    ARRAY_NAMES = ("w1", "b1", "w2", "b2", "w_pi", "b_pi", "w_v", "b_v")

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.ARRAY_NAMES}

    def copy(self) -> "PolicyParameters":
        return PolicyParameters(
            **{k: v.copy() for k, v in self.arrays().items()},
            version=self.version, meta=dict(self.meta),
        )

    def obs_dim(self) -> int:
        return self.w1.shape[1]

    def n_actions(self) -> int:
        return self.w_pi.shape[0]


def params_equal(a: PolicyParameters, b: PolicyParameters) -> bool:
    return all(np.array_equal(a.arrays()[k], b.arrays()[k]) for k in a.ARRAY_NAMES)


def init_params(obs_dim: int, seed: int, hidden: tuple[int, int] = HIDDEN,
                n_actions: int = N_ACTIONS) -> PolicyParameters:
    """Deterministic init: scaled-uniform fan-in for the trunk and value head,
    zeros for the policy head so the initial policy is exactly uniform."""
    rng = substream(seed, STREAM_INIT)
    h1, h2 = hidden

    def fan_in(shape):
        bound = 1.0 / np.sqrt(shape[1])
        return rng.uniform(-bound, bound, size=shape)

    return PolicyParameters(
        w1=fan_in((h1, obs_dim)),
        b1=np.zeros(h1),
        w2=fan_in((h2, h1)),
        b2=np.zeros(h2),
        w_pi=np.zeros((n_actions, h2)),
        b_pi=np.zeros(n_actions),
        w_v=fan_in((1, h2)),
        b_v=np.zeros(1),
    )


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_trunk(params: PolicyParameters, x: np.ndarray):
    h1 = np.tanh(x @ params.w1.T + params.b1)
    h2 = np.tanh(h1 @ params.w2.T + params.b2)
    logits = h2 @ params.w_pi.T + params.b_pi
    values = h2 @ params.w_v.T + params.b_v
    return h1, h2, logits, values[..., 0]


def forward(params: PolicyParameters, obs) -> tuple[np.ndarray, float]:
    """Action probabilities over the grid and the value estimate for one
    observation. Pure: identical inputs give bit-identical outputs."""
    x = np.asarray(obs, dtype=float)
    _, _, logits, value = _forward_trunk(params, x[None, :])
    if not (np.all(np.isfinite(logits)) and np.isfinite(value[0])):
        raise FloatingPointError("non-finite network output")
    return _softmax(logits)[0], float(value[0])


def sample_policy_action(probs, rng: np.random.Generator) -> tuple[int, float]:
    """Draw an action index from the distribution; returns (index, log-prob)."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or np.any(p < 0.0) or abs(p.sum() - 1.0) > 1e-6:
        raise ContractError("probs must be a normalized distribution")
    cum = np.cumsum(p)
    cum /= cum[-1]
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    return idx, float(np.log(p[idx]))


def backward(params: PolicyParameters, obs, action_idx, old_log_prob, advantage,
             value_target, clip_epsilon: float, value_coeff: float = 0.5,
             entropy_coeff: float = 0.0):
    """Gradients of the mean-reduced PPO loss over a minibatch.

    Loss = -mean(clipped surrogate) + value_coeff * mean((v - target)^2)
           - entropy_coeff * mean(policy entropy).

    Returns (grads keyed like the parameter arrays, loss components dict).
    """
    x = np.atleast_2d(np.asarray(obs, dtype=float))
    a = np.asarray(action_idx, dtype=int)
    old_lp = np.asarray(old_log_prob, dtype=float)
    adv = np.asarray(advantage, dtype=float)
    target = np.asarray(value_target, dtype=float)
    n = x.shape[0]
    if n == 0:
        raise ContractError("empty minibatch")

    h1, h2, logits, values = _forward_trunk(params, x)
    probs = _softmax(logits)
    log_probs = logits - logits.max(axis=1, keepdims=True)
    log_probs = log_probs - np.log(np.exp(log_probs).sum(axis=1, keepdims=True))
    lp = log_probs[np.arange(n), a]

    ratio = np.exp(lp - old_lp)
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    unclipped_active = ratio * adv <= clipped * adv
    surrogate = np.minimum(ratio * adv, clipped * adv)
    entropy = -(probs * log_probs).sum(axis=1)

    policy_loss = -surrogate.mean()
    value_loss = ((values - target) ** 2).mean()
    total = policy_loss + value_coeff * value_loss - entropy_coeff * entropy.mean()
    if not np.isfinite(total):
        raise FloatingPointError("non-finite loss")

    # d(loss)/d(logits): surrogate term flows through the chosen action's
    # log-prob only where the unclipped branch is active; entropy term uses
    # dH/dz_j = -p_j (log p_j + H).
    dlp = np.where(unclipped_active, -ratio * adv / n, 0.0)
    dlogits = dlp[:, None] * (np.eye(probs.shape[1])[a] - probs)
    if entropy_coeff != 0.0:
        dlogits += (entropy_coeff / n) * probs * (log_probs + entropy[:, None])
    dvalues = 2.0 * value_coeff * (values - target) / n

    dh2 = dlogits @ params.w_pi + dvalues[:, None] * params.w_v
    dz2 = dh2 * (1.0 - h2 ** 2)
    dh1 = dz2 @ params.w2
    dz1 = dh1 * (1.0 - h1 ** 2)

    grads = {
        "w1": dz1.T @ x,
        "b1": dz1.sum(axis=0),
        "w2": dz2.T @ h1,
        "b2": dz2.sum(axis=0),
        "w_pi": dlogits.T @ h2,
        "b_pi": dlogits.sum(axis=0),
        "w_v": dvalues[None, :] @ h2,
        "b_v": np.array([dvalues.sum()]),
    }
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient in {name}")
    losses = {
        "total": float(total),
        "policy_loss": float(policy_loss),
        "value_loss": float(value_loss),
        "entropy": float(entropy.mean()),
    }
    return grads, losses


def loss_only(params: PolicyParameters, obs, action_idx, old_log_prob, advantage,
              value_target, clip_epsilon: float, value_coeff: float = 0.5,
              entropy_coeff: float = 0.0) -> float:
    """Scalar loss with no gradients; the finite-difference oracle calls this."""
    x = np.atleast_2d(np.asarray(obs, dtype=float))
    a = np.asarray(action_idx, dtype=int)
    n = x.shape[0]
    _, _, logits, values = _forward_trunk(params, x)
    probs = _softmax(logits)
    log_probs = np.log(probs)
    lp = log_probs[np.arange(n), a]
    ratio = np.exp(lp - np.asarray(old_log_prob, dtype=float))
    adv = np.asarray(advantage, dtype=float)
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    surrogate = np.minimum(ratio * adv, clipped * adv)
    entropy = -(probs * log_probs).sum(axis=1)
    value_loss = ((values - np.asarray(value_target, dtype=float)) ** 2).mean()
    return float(-surrogate.mean() + value_coeff * value_loss
                 - entropy_coeff * entropy.mean())


def save_params(params: PolicyParameters, path, extra_meta: dict | None = None) -> None:
    """Write the versioned JSON model file (flat row-major arrays)."""
    meta = dict(params.meta)
    if extra_meta:
        meta.update(extra_meta)
    doc = {
        "format_version": params.version,
        "action_grid_step": ACTION_STEP,
        "shapes": {k: list(v.shape) for k, v in params.arrays().items()},
        "arrays": {k: v.ravel(order="C").tolist() for k, v in params.arrays().items()},
        "meta": meta,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_params(path) -> PolicyParameters:
    """Load a model file; bit-exact inverse of save_params."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ContractError(f"cannot load model file {path}: {exc}") from exc
    if doc.get("format_version") != FORMAT_VERSION:
        raise ContractError(f"unsupported model format version {doc.get('format_version')!r}")
    arrays = {}
    for name in PolicyParameters.ARRAY_NAMES:
        shape = tuple(doc["shapes"][name])
        flat = np.array(doc["arrays"][name], dtype=float)
        expected = int(np.prod(shape))
        if flat.size != expected:
            raise ContractError(f"array {name}: expected {expected} values, got {flat.size}")
        if not np.all(np.isfinite(flat)):
            raise ContractError(f"array {name} contains non-finite values")
        arrays[name] = flat.reshape(shape, order="C")
    return PolicyParameters(**arrays, version=doc["format_version"],
                            meta=doc.get("meta", {}))

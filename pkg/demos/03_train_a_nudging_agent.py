"""Train a small nudging agent and watch the reward trend.

The planner replaces one of the four cooperators.  Its reward each round is
the other three agents' total contribution, so the only way to earn more is
to coax the cooperators into contributing.  This demo runs a fraction of the
desk-scale budget (a minute or two); the real presets are
`pggnudge train --preset desk` (800k steps) and `--preset paper` (4M steps).
"""

from pggnudge.game import GameConfig
from pggnudge.policy import save_params
from pggnudge.ppo import TrainConfig, train

config = TrainConfig(reward_kind="sum", total_steps=60_000, batch_steps=4_000, seed=7)

print(f"training: {config.total_steps} steps, "
      f"{config.total_steps // config.batch_steps} batches of {config.batch_steps}")
params, log = train(config, GameConfig(),
                    on_batch=lambda b: print(
                        f"  batch {b.batch:>3}: mean episodic reward "
                        f"{b.mean_episodic_reward:6.2f}  entropy {b.entropy:.3f}"))

save_params(params, "demo_model.json", extra_meta={"reward_kind": "sum"})
print("\nsaved demo_model.json")
print(f"reward moved from {log[0].mean_episodic_reward:.2f} to "
      f"{log[-1].mean_episodic_reward:.2f}; entropy fell from "
      f"{log[0].entropy:.2f} to {log[-1].entropy:.2f} as the policy committed.")

"""Compare games with a trained nudging agent against the all-cooperator
baseline, the way the evaluation harness does.

Expects demo_model.json from 03_train_a_nudging_agent.py (falls back to a
quick training run if it is missing).  Uses small campaigns so it finishes in
seconds; the CLI equivalents run 10,000 games by default.
"""

import os

from pggnudge import stats
from pggnudge.game import GameConfig
from pggnudge.harness import CampaignSpec, run_campaign
from pggnudge.policy import save_params
from pggnudge.ppo import TrainConfig, train

MODEL = "demo_model.json"
if not os.path.exists(MODEL):
    print("no demo model found, training a quick one first...")
    params, _ = train(TrainConfig(reward_kind="sum", total_steps=60_000, seed=7),
                      GameConfig())
    save_params(params, MODEL, extra_meta={"reward_kind": "sum"})

GAMES = 500
base_records, base = run_campaign(CampaignSpec("baseline", games=GAMES, master_seed=1))
drl_records, drl = run_campaign(CampaignSpec("sum-drl", games=GAMES, master_seed=2,
                                             model_path=MODEL))

print(f"{GAMES} games per group")
print(f"  baseline: sum contribution {base.sum_contribution_mean:7.3f}   "
      f"prop > 0.5 {base.prop_over_threshold_mean:.4f}")
print(f"  sum-drl:  sum contribution {drl.sum_contribution_mean:7.3f}   "
      f"prop > 0.5 {drl.prop_over_threshold_mean:.4f}")

b_sums, b_props = stats.per_game_metrics(base_records)
t_sums, t_props = stats.per_game_metrics(drl_records)
u, p = stats.mann_whitney_u(b_sums, t_sums)
print(f"\nMann-Whitney on per-game totals: U={u:.0f}, two-sided p={p:.3g}")
print(f"percentage change: sum {stats.percentage_change(b_sums.mean(), t_sums.mean()):+.2f}%, "
      f"prop {stats.percentage_change(b_props.mean(), t_props.mean()):+.2f}%")

print("\nper-round means (cooperators vs planner):")
print(f"{'round':>5} {'cc (baseline)':>14} {'cc (nudged)':>12} {'planner':>9}")
for t in range(0, 25, 4):
    print(f"{t + 1:>5} {base.cc_per_round_mean[t]:>14.3f} "
          f"{drl.cc_per_round_mean[t]:>12.3f} {drl.planner_per_round_mean[t]:>9.3f}")

"""Play one public goods game with four conditional cooperators and watch the
group dynamics round by round.

Each round every player gets one token, contributes a fraction to a pool that
is multiplied by 1.6 and split evenly, and then adjusts its willingness to
cooperate by comparing its payoff to an aspiration level.  Run it a few times
with different seeds: some games climb toward full cooperation, others decay
into a low-contribution loop.
"""

from pggnudge.cc import CcAgent, CcParams
from pggnudge.game import GameConfig, run_episode
from pggnudge.rng import substream

config = GameConfig()
params = CcParams.from_game_config(config)
agents = [CcAgent(seat, params) for seat in range(config.n_players)]

record = run_episode(agents, config, substream(master_seed=2, index=0))

print(f"{'round':>5}  {'contributions':<28}  {'payoffs':<28}  group mean")
for result in record.rounds:
    contribs = " ".join(f"{c:.2f}" for c in result.contributions)
    payoffs = " ".join(f"{p:.2f}" for p in result.payoffs)
    print(f"{result.round_index:>5}  {contribs:<28}  {payoffs:<28}  "
          f"{result.contributions.mean():.3f}")

total = record.contributions().sum()
print(f"\ntotal contribution over the game: {total:.2f} (max possible "
      f"{config.n_players * config.t_max})")

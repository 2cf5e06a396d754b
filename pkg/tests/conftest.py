import numpy as np
import pytest

from pggnudge.game import EpisodeRecord, GameConfig, RoundResult, compute_payoffs


def make_record(contributions, roster=None, config=None) -> EpisodeRecord:
    """Fabricate an EpisodeRecord from a (t, n) contribution matrix."""
    c = np.asarray(contributions, dtype=float)
    t_max, n = c.shape
    config = config or GameConfig(n_players=n, t_max=t_max)
    roster = tuple(roster) if roster is not None else ("cc",) * n
    rec = EpisodeRecord(config=config, roster=roster)
    for t in range(t_max):
        rec.rounds.append(RoundResult(round_index=t + 1, contributions=c[t],
                                      payoffs=compute_payoffs(c[t], config)))
    return rec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

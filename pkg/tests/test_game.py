import numpy as np
import pytest

from pggnudge.cc import CcAgent, CcParams
from pggnudge.game import (ContractError, GameConfig, compute_payoffs,
                           run_episode, step)
from pggnudge.rng import substream


class ConstantAgent:
    label = "cc"

    def __init__(self, value):
        self.value = value

    def act(self, view, rng):
        return self.value

    def observe(self, result):
        pass


def test_payoffs_full_cooperation():
    cfg = GameConfig()
    np.testing.assert_allclose(compute_payoffs([1, 1, 1, 1], cfg), [1.6] * 4)


def test_payoffs_zero_contribution():
    cfg = GameConfig()
    np.testing.assert_allclose(compute_payoffs([0, 0, 0, 0], cfg), [1.0] * 4)


def test_payoffs_single_free_rider():
    # (1.6/4)*3 = 1.2 pool share; the free rider keeps its endowment
    cfg = GameConfig()
    np.testing.assert_allclose(compute_payoffs([0, 1, 1, 1], cfg),
                               [2.2, 1.2, 1.2, 1.2], atol=1e-12)


def test_payoffs_contract_violations():
    cfg = GameConfig()
    with pytest.raises(ContractError):
        compute_payoffs([0.5, 0.5, 0.5], cfg)
    with pytest.raises(ContractError):
        compute_payoffs([0.5, 0.5, 0.5, 1.5], cfg)
    with pytest.raises(ContractError):
        compute_payoffs([0.5, 0.5, 0.5, -0.1], cfg)


def test_step_half_contributions():
    cfg = GameConfig()
    result = step(1, [0.5] * 4, cfg)
    np.testing.assert_allclose(result.payoffs, [1.3] * 4, atol=1e-12)
    assert result.round_index == 1


def test_step_final_round_and_out_of_range():
    cfg = GameConfig()
    result = step(25, [0, 0, 0, 0], cfg)
    np.testing.assert_allclose(result.payoffs, [1.0] * 4)
    for bad in (0, 26, -3):
        with pytest.raises(ContractError):
            step(bad, [0, 0, 0, 0], cfg)


def test_config_invariants():
    for kwargs in ({"n_players": 1}, {"t_max": 0}, {"k": 0.0}, {"sigma": -0.1},
                   {"threshold_x": 1.5}, {"coop_threshold": -0.2},
                   {"bm_form": "mystery"}):
        with pytest.raises(ContractError):
            GameConfig(**kwargs)


def test_run_episode_deterministic():
    cfg = GameConfig()
    params = CcParams.from_game_config(cfg)

    def play():
        agents = [CcAgent(i, params) for i in range(4)]
        return run_episode(agents, cfg, substream(42, 0))

    a, b = play(), play()
    assert len(a.rounds) == 25
    assert a.roster == ("cc",) * 4
    np.testing.assert_array_equal(a.contributions(), b.contributions())
    np.testing.assert_array_equal(a.payoffs(), b.payoffs())


def test_run_episode_roster_mismatch():
    cfg = GameConfig()
    params = CcParams.from_game_config(cfg)
    with pytest.raises(ContractError):
        run_episode([CcAgent(i, params) for i in range(3)], cfg, substream(1, 0))


def test_run_episode_full_contributors():
    cfg = GameConfig()
    rec = run_episode([ConstantAgent(1.0) for _ in range(4)], cfg, substream(1, 0))
    assert rec.contributions().sum() == 100.0
    np.testing.assert_allclose(rec.payoffs(), 1.6)


def test_payoff_conservation_fuzz(rng):
    # sum(payoffs) = N + (k-1) * sum(contributions)
    cfg = GameConfig()
    a = rng.random((100_000, 4))
    share = (cfg.k / 4) * a.sum(axis=1, keepdims=True)
    payoffs = share + (1.0 - a)
    lhs = payoffs.sum(axis=1)
    rhs = 4 + (cfg.k - 1) * a.sum(axis=1)
    assert np.max(np.abs(lhs - rhs)) < 1e-12
    # spot-check the vectorized form against the real operation
    for i in range(50):
        np.testing.assert_allclose(compute_payoffs(a[i], cfg), payoffs[i], atol=1e-15)


def test_free_rider_dominance(rng):
    # with k/N < 1, raising one's own contribution strictly lowers one's payoff
    cfg = GameConfig()
    for _ in range(500):
        a = rng.random(4)
        bumped = a.copy()
        bumped[0] = min(1.0, a[0] + rng.uniform(0.01, 0.5))
        if bumped[0] == a[0]:
            continue
        assert compute_payoffs(bumped, cfg)[0] < compute_payoffs(a, cfg)[0]

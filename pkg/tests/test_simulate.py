"""Simulator tests: determinism, degenerate strategies, estimator, group play."""

import numpy as np
import pytest

from pdqre.game import MarkovStrategy
from pdqre.simulate import (
    GameLog,
    SimulationConfig,
    estimate_markov,
    estimate_markov_pooled,
    export_log,
    simulate,
    simulate_group,
)

ALWAYS_C = MarkovStrategy(1.0, 1.0)
ALWAYS_D = MarkovStrategy(0.0, 0.0)
TFT = MarkovStrategy(0.0, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(rounds=0, seed=1)
    with pytest.raises(ValueError):
        SimulationConfig(rounds=10, seed=-1)
    with pytest.raises(ValueError):
        SimulationConfig(rounds=10, seed=2**64)
    with pytest.raises(ValueError):
        SimulationConfig(rounds=10, seed=1, initial_coop_prob=(1.5, 0.5))


def test_always_defect_pair():
    cfg = SimulationConfig(rounds=200, seed=3, initial_coop_prob=(0.0, 0.0))
    log = simulate(ALWAYS_D, ALWAYS_D, cfg)
    assert log.cooperation_rate(1) == 0.0
    assert log.cooperation_rate(2) == 0.0
    assert np.all(log.payoffs1 == 1.0)
    assert np.all(log.payoffs2 == 1.0)


def test_always_cooperate_pair():
    cfg = SimulationConfig(rounds=200, seed=3, initial_coop_prob=(1.0, 1.0))
    log = simulate(ALWAYS_C, ALWAYS_C, cfg)
    assert log.cooperation_rate(1) == 1.0
    assert log.cooperation_rate(2) == 1.0
    assert log.mean_payoff(1) == 5.0
    assert log.mean_payoff(2) == 5.0


def test_tft_pair_alternates_after_mixed_start():
    cfg = SimulationConfig(rounds=6, seed=11, initial_coop_prob=(1.0, 0.0))
    log = simulate(TFT, TFT, cfg)
    assert log.choices1.tolist() == [True, False, True, False, True, False]
    assert log.choices2.tolist() == [False, True, False, True, False, True]


def test_same_seed_reproduces_bitwise():
    cfg = SimulationConfig(rounds=1000, seed=2026)
    s = MarkovStrategy(0.3, 0.8)
    a = simulate(s, s, cfg)
    b = simulate(s, s, cfg)
    assert np.array_equal(a.choices1, b.choices1)
    assert np.array_equal(a.choices2, b.choices2)
    assert np.array_equal(a.payoffs1, b.payoffs1)


def test_different_seed_differs():
    s = MarkovStrategy(0.3, 0.8)
    a = simulate(s, s, SimulationConfig(rounds=1000, seed=1))
    b = simulate(s, s, SimulationConfig(rounds=1000, seed=2))
    assert not np.array_equal(a.choices1, b.choices1)


def test_players_draw_from_independent_streams():
    # identical strategies must not mirror each other's choices
    s = MarkovStrategy(0.5, 0.5)
    log = simulate(s, s, SimulationConfig(rounds=2000, seed=5))
    assert not np.array_equal(log.choices1, log.choices2)


def _manual_log(choices1, choices2):
    c1 = np.asarray(choices1, dtype=bool)
    c2 = np.asarray(choices2, dtype=bool)
    zeros = np.zeros(len(c1))
    cfg = SimulationConfig(rounds=len(c1), seed=0)
    s = MarkovStrategy(0.5, 0.5)
    return GameLog(c1, c2, zeros, zeros, s, s, cfg)


def test_estimator_worked_example():
    # player C,D,C against opponent C,C,C: gamma-hat = 1/2, no alpha events
    log = _manual_log([1, 0, 1], [1, 1, 1])
    est1, est2 = estimate_markov(log)
    assert est1.gamma == pytest.approx(0.5, abs=1e-15)
    assert est1.alpha is None
    assert est1.gamma_count == 2
    assert est1.alpha_count == 0
    assert est2.gamma == pytest.approx(1.0, abs=1e-15)
    assert est2.alpha == pytest.approx(1.0, abs=1e-15)


def test_estimator_requires_two_rounds():
    with pytest.raises(ValueError):
        estimate_markov(_manual_log([1], [0]))


def test_estimator_recovers_markov_parameters():
    s = MarkovStrategy(0.2, 0.5)
    cfg = SimulationConfig(rounds=100_000, seed=20260815)
    log = simulate(s, s, cfg)
    est1, est2 = estimate_markov(log)
    for est in (est1, est2):
        assert est.alpha == pytest.approx(0.2, abs=0.015)
        assert est.gamma == pytest.approx(0.5, abs=0.015)
    # symmetric stationary cooperation rate is alpha / (1 + alpha - gamma)
    assert log.cooperation_rate(1, burn_in=100) == pytest.approx(2.0 / 7.0, abs=0.015)
    assert log.mean_payoff(1, burn_in=100) == pytest.approx(145.0 / 49.0, abs=0.05)


def test_burn_in_bounds_checked():
    log = simulate(ALWAYS_C, ALWAYS_C, SimulationConfig(rounds=5, seed=1))
    with pytest.raises(ValueError):
        log.cooperation_rate(1, burn_in=5)
    with pytest.raises(ValueError):
        log.mean_payoff(1, burn_in=9)


def test_group_play_requires_even_count():
    with pytest.raises(ValueError):
        simulate_group([ALWAYS_C, ALWAYS_C, ALWAYS_D], SimulationConfig(rounds=5, seed=1))


def test_group_play_pairing_invariants():
    strategies = [ALWAYS_C, ALWAYS_C, ALWAYS_D, ALWAYS_D]
    cfg = SimulationConfig(rounds=50, seed=99, initial_coop_prob=(1.0, 1.0))
    logs = simulate_group(strategies, cfg)
    assert len(logs) == 4
    for t in range(cfg.rounds):
        for i, log in enumerate(logs):
            j = int(log.partners[t])
            assert int(logs[j].partners[t]) == i  # pairing is symmetric
            if t >= 1:
                # the conditioning bit is the current partner's previous move
                assert log.conditioning[t] == logs[j].choices[t - 1]
            mine = log.choices[t]
            theirs = logs[j].choices[t]
            want = {
                (True, True): 5.0,
                (True, False): 0.0,
                (False, True): 10.0,
                (False, False): 1.0,
            }[(bool(mine), bool(theirs))]
            assert log.payoffs[t] == want


def test_group_play_deterministic():
    strategies = [MarkovStrategy(0.3, 0.7)] * 4
    cfg = SimulationConfig(rounds=100, seed=8)
    a = simulate_group(strategies, cfg)
    b = simulate_group(strategies, cfg)
    for la, lb in zip(a, b):
        assert np.array_equal(la.choices, lb.choices)
        assert np.array_equal(la.partners, lb.partners)


def test_pooled_estimator_recovers_parameters():
    strategies = [MarkovStrategy(0.3, 0.7)] * 6
    cfg = SimulationConfig(rounds=20_000, seed=17)
    logs = simulate_group(strategies, cfg)
    est = estimate_markov_pooled(logs[0])
    assert est.alpha == pytest.approx(0.3, abs=0.03)
    assert est.gamma == pytest.approx(0.7, abs=0.03)
    assert est.alpha_count + est.gamma_count == cfg.rounds - 1


def test_export_log_golden(tmp_path):
    cfg = SimulationConfig(rounds=3, seed=7, initial_coop_prob=(1.0, 0.0))
    log = simulate(ALWAYS_C, ALWAYS_D, cfg)
    out = tmp_path / "log.csv"
    export_log(log, out)
    want = (
        "# generator=PCG64\n"
        "# seed=7\n"
        "# rounds=3\n"
        "# initial_coop_prob=1,0\n"
        "# strategy1=1,1\n"
        "# strategy2=0,0\n"
        "round,choice1,choice2,payoff1,payoff2\n"
        "1,C,D,0,10\n"
        "2,C,D,0,10\n"
        "3,C,D,0,10\n"
    )
    assert out.read_text(encoding="utf-8") == want

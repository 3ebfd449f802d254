import dataclasses
import io

import numpy as np
import pytest

from smithian.episode import (Guide, Hunter, TRACE_COLUMNS, WumpusGame, episode_streams, read_trials,
                              run_episode, trials_to_csv, write_trace)
from smithian.signaling import SignalerConfig
from smithian.wumpus import (Action, EpisodeConfig, HUNTER_TILES, Obs, START, TERMINAL_INDEX, WUMPUS_TILES,
                             adjacency, build_model, is_hit, move_destination, shot_targets, state_index,
                             stench_prob)


@pytest.fixture(scope="module")
def model():
    return build_model(EpisodeConfig(moving_cost=-3))


def test_illegal_move_returns_home(model):
    s = state_index((0, 1), (1, 1))
    assert move_destination((0, 1), Action.MOVE_VERTICAL) == START
    assert model.transition[Action.MOVE_VERTICAL, s, state_index(START, (1, 1))] == 1.0
    assert model.reward[s, Action.MOVE_VERTICAL] == -3


def test_moves_onto_wumpus_tiles_also_return_home():
    assert move_destination((1, 0), Action.MOVE_VERTICAL) == START  # (1,1) is a Wumpus tile
    assert move_destination((1, 0), Action.MOVE_HORIZONTAL) == START
    assert move_destination((0, 0), Action.MOVE_HORIZONTAL) == (1, 0)


def test_hit_and_miss(model):
    s = state_index((0, 1), (0, 2))
    assert model.transition[Action.SHOOT_UP, s, TERMINAL_INDEX] == 1.0
    assert model.reward[s, Action.SHOOT_UP] == 100
    assert model.reward[state_index((0, 1), (1, 1)), Action.SHOOT_UP] == -100
    assert model.reward[state_index((0, 1), (1, 1)), Action.SHOOT_RIGHT] == 100


def test_stench_probabilities(model):
    assert stench_prob((0, 1), (2, 0)) == 0.15
    assert stench_prob((0, 1), (0, 2)) == 0.85
    assert model.observation[0, state_index((0, 1), (2, 0)), Obs.STENCH] == 0.15
    assert model.observation[0, TERMINAL_INDEX, Obs.NOTHING] == 1.0


def test_adjacency():
    assert adjacency((0, 1), (0, 2))
    assert not adjacency((0, 0), (1, 1))
    assert adjacency((1, 0), (1, 1))
    assert not adjacency((0, 0), (0, 0))


def test_off_map_shot_misses():
    assert shot_targets((0, 0), Action.SHOOT_UP) == [(0, 1)]
    assert not any(is_hit((0, 0), w, Action.SHOOT_UP) for w in WUMPUS_TILES)


def test_ray_shooting_flag():
    assert is_hit((0, 0), (0, 2), Action.SHOOT_UP, "ray")
    assert not is_hit((0, 0), (0, 2), Action.SHOOT_UP, "adjacent")
    ray = build_model(EpisodeConfig(shooting="ray"))
    assert ray.reward[state_index((0, 0), (2, 0)), Action.SHOOT_RIGHT] == 100


def test_config_validation():
    with pytest.raises(ValueError):
        EpisodeConfig(moving_cost=0)
    with pytest.raises(ValueError):
        EpisodeConfig(shooting="lob")
    with pytest.raises(ValueError):
        EpisodeConfig(max_steps=0)


def test_every_state_reachable_in_one_move_plus_shot():
    for w in WUMPUS_TILES:
        ok = [h for h in HUNTER_TILES for a in (Action.SHOOT_UP, Action.SHOOT_RIGHT) if is_hit(h, w, a)]
        assert ok and all(h != START for h in ok)


@pytest.mark.parametrize("hunter,wumpus", [((0, 1), (0, 2)), ((0, 1), (2, 0)), ((1, 0), (1, 1)), ((0, 0), (0, 2))])
def test_observation_sampling_frequency(hunter, wumpus):
    # draws the way the episode loop does
    env, _ = episode_streams(123)
    rate = np.mean(env.random(10_000) < stench_prob(hunter, wumpus))
    target = 0.85 if adjacency(hunter, wumpus) else 0.15
    assert abs(rate - target) <= 0.02


# --------------------------------------------------------------------------
# episodes

GUIDE = Guide(SignalerConfig(5.0))


@pytest.mark.parametrize("hunter", list(Hunter))
def test_one_shot_and_positions(game5, hunter):
    for seed in range(40):
        rec = run_episode(game5, hunter, GUIDE, seed, trace=True)
        shots = [s for s in rec.trace if s.action in ("SHOOT_UP", "SHOOT_RIGHT")]
        assert len(shots) == (0 if rec.cap_hit else 1)
        if shots:
            assert rec.trace[-1] is shots[0]
        assert all(s.hunter_pos in HUNTER_TILES for s in rec.trace)
        assert rec.total_reward == pytest.approx(sum(s.reward for s in rec.trace))
        assert rec.steps == len(rec.trace)
        assert rec.n_stench == sum(s.observation == "STENCH" for s in rec.trace)


def test_deterministic(game5):
    for hunter in Hunter:
        a = run_episode(game5, hunter, GUIDE, 99, trace=True)
        b = run_episode(game5, hunter, GUIDE, 99, trace=True)
        assert a == b and a.trace == b.trace


def test_baseline_ignores_guide(game5):
    for seed in range(60):
        with_guide = run_episode(game5, Hunter.BASELINE, GUIDE, seed)
        alone = run_episode(game5, Hunter.BASELINE, None, seed)
        assert dataclasses.replace(with_guide, n_points=0) == alone


def test_guide_stream_does_not_touch_environment(game5):
    # the Wumpus draw and the first observation are the same for every condition
    for seed in range(30):
        recs = [run_episode(game5, h, GUIDE, seed, trace=True) for h in Hunter]
        assert len({r.wumpus_pos for r in recs}) == 1
        assert len({(r.trace[0].action, r.trace[0].observation) for r in recs}) == 1


def test_informed_hunter_scores_bound(game5):
    for w in WUMPUS_TILES:
        m = dataclasses.replace(game5.model, initial_belief=game5.model.degenerate(state_index(START, w)))
        g = WumpusGame(game5.cfg, m, game5.policy, game5.fo_values)
        rec = run_episode(g, Hunter.PRAGMATIC, GUIDE, seed=5, wumpus_pos=w)
        assert rec.hit
        assert rec.total_reward == 100 + (rec.steps - 1) * game5.cfg.moving_cost
        assert rec.steps == 2


def test_wumpus_override(game5):
    rec = run_episode(game5, Hunter.BASELINE, None, 3, wumpus_pos=(2, 0))
    assert rec.wumpus_pos == (2, 0)


def test_step_cap_flagged():
    cfg = EpisodeConfig(moving_cost=-1, max_steps=1)
    g = WumpusGame.solve(cfg)
    rec = run_episode(g, Hunter.BASELINE, None, 0)
    assert rec.steps == 1 and rec.cap_hit and rec.shot_action is None and not rec.hit


def test_signals_only_on_stench(game5):
    for seed in range(40):
        rec = run_episode(game5, Hunter.PRAGMATIC, GUIDE, seed, trace=True)
        for s in rec.trace:
            assert (s.signal is not None) == (s.observation == "STENCH")


def test_trial_csv_roundtrip(game5):
    recs = [run_episode(game5, h, GUIDE, s) for h in Hunter for s in range(5)]
    text = trials_to_csv(recs)
    assert text.splitlines()[0] == ("condition,moving_cost,seed,steps,shot_action,shot_tile,wumpus_pos,hit,"
                                     "total_reward,cap_hit,n_points,n_stench")
    assert read_trials(io.StringIO(text)) == recs


def test_trace_csv(game5):
    rec = run_episode(game5, Hunter.PRAGMATIC, GUIDE, 7, trace=True)
    buf = io.StringIO()
    write_trace(rec.trace, buf, {"seed": 7})
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",") == ["seed", *TRACE_COLUMNS]
    assert len(lines) == len(rec.trace) + 1
    before = lines[1].split(",")[-2].split(";")
    assert len(before) == 10 and abs(sum(map(float, before)) - 1) < 1e-9

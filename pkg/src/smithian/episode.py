"""Episode engine for the guided hunt, plus trial/trace CSV serialization."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from . import wumpus as W
from .pomdp import Policy, PomdpModel, SolverConfig, belief_update, pbvi_solve, solve_fully_observable
from .signaling import (POINT, LiteralReceiver, RolloutEvaluator, SignalerConfig, SignalingContext,
                        guide_step, level1_signaler, pragmatic_interpret)


class Hunter(str, Enum):
    BASELINE = "baseline"
    LITERAL_DOUBLE = "literal_double"
    PRAGMATIC = "pragmatic"


@dataclass(frozen=True)
class Guide:
    """Fully informed signaler; ``continuation`` is passed to ``SignalingContext``."""

    config: SignalerConfig = SignalerConfig()
    continuation: str = "auto"


@dataclass(frozen=True, eq=False)
class WumpusGame:
    """A configured game with its solved hunter policy."""

    cfg: W.EpisodeConfig
    model: PomdpModel
    policy: Policy
    fo_values: np.ndarray

    @classmethod
    def solve(cls, cfg: W.EpisodeConfig, solver: SolverConfig = SolverConfig()) -> WumpusGame:
        model = W.build_model(cfg)
        return cls.from_policy(cfg, pbvi_solve(model, solver))

    @classmethod
    def from_policy(cls, cfg: W.EpisodeConfig, policy: Policy) -> WumpusGame:
        model = W.build_model(cfg)
        return cls(cfg, model, policy, solve_fully_observable(model))

    @cached_property
    def rollout(self) -> RolloutEvaluator:
        return RolloutEvaluator(self.model, self.policy, self.cfg.max_steps)


@dataclass(frozen=True)
class StepRecord:
    step: int
    hunter_pos: tuple
    action: str
    reward: float
    observation: str | None
    signal: str | None = None
    svi_point: float | None = None
    svi_no_point: float | None = None
    p_point: float | None = None
    belief_before: tuple = ()
    belief_after: tuple = ()


@dataclass(frozen=True)
class TrialRecord:
    condition: str
    moving_cost: float
    seed: int
    steps: int
    shot_action: str | None
    shot_tile: tuple | None
    wumpus_pos: tuple
    hit: bool
    total_reward: float
    cap_hit: bool
    n_points: int
    n_stench: int
    trace: tuple = field(default=(), compare=False, repr=False)


def episode_streams(seed: int):
    """Independent (environment, guide) generators derived from one seed."""
    env_ss, guide_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(env_ss), np.random.default_rng(guide_ss)


def run_episode(game: WumpusGame, hunter: Hunter | str, guide: Guide | None = None,
                seed: int = 0, trace: bool = False, wumpus_pos=None) -> TrialRecord:
    """Play one game.

    The environment stream draws the Wumpus tile and every observation; the
    guide stream is used only for sampling signals, so the guide can never
    change what the environment does. With ``trace`` each step records the
    hunter's belief after its own observation update and after any signal.
    """
    hunter = Hunter(hunter)
    model, policy, cfg = game.model, game.policy, game.cfg
    env, guide_rng = episode_streams(seed)
    drawn = W.WUMPUS_TILES[int(env.integers(len(W.WUMPUS_TILES)))]
    wumpus = tuple(wumpus_pos) if wumpus_pos is not None else drawn

    pos = W.START
    b = model.initial_belief.copy()
    total, n_points, n_stench = 0.0, 0, 0
    shot_action = shot_tile = None
    hit = False
    steps = []
    t = 0
    for t in range(1, cfg.max_steps + 1):
        a = policy.greedy_action(b)
        s = W.state_index(pos, wumpus)
        r = float(model.reward[s, a])
        total += r
        if W.Action(a) in W.SHOTS:
            shot_action = W.Action(a).name
            shot_tile = W.shot_targets(pos, a, cfg.shooting)[0]
            hit = W.is_hit(pos, wumpus, a, cfg.shooting)
            if trace:
                steps.append(StepRecord(t, pos, shot_action, r, None,
                                        belief_before=tuple(b), belief_after=tuple(b)))
            break
        pos = W.move_destination(pos, a)
        stench = env.random() < W.stench_prob(pos, wumpus)
        o = W.Obs.STENCH if stench else W.Obs.NOTHING
        b = belief_update(model, b, a, o)
        event = None
        b_before_signal = b
        if stench:
            n_stench += 1
            if guide is not None:
                ctx = SignalingContext(model, model.degenerate(W.state_index(pos, wumpus)), b, policy,
                                       game.fo_values, continuation=guide.continuation,
                                       rollout=game.rollout if guide.continuation == "rollout" else None)
                literal = LiteralReceiver(model, int(o), a)
                event = guide_step(ctx, guide.config, guide_rng, literal)
                n_points += event.signal == POINT
                if hunter is Hunter.LITERAL_DOUBLE:
                    b = literal(b, event.signal)
                elif hunter is Hunter.PRAGMATIC:
                    b = pragmatic_interpret(b, event.signal, level1_signaler(ctx, guide.config, literal))
        if trace:
            steps.append(StepRecord(
                t, pos, W.Action(a).name, r, o.name,
                signal=event and event.signal,
                svi_point=event and event.svi_point,
                svi_no_point=event and event.svi_no_point,
                p_point=event and event.p_point,
                belief_before=tuple(b_before_signal),
                belief_after=tuple(b)))

    return TrialRecord(
        condition=hunter.value, moving_cost=float(cfg.moving_cost), seed=int(seed), steps=t,
        shot_action=shot_action, shot_tile=shot_tile, wumpus_pos=wumpus, hit=hit,
        total_reward=total, cap_hit=shot_action is None, n_points=int(n_points),
        n_stench=n_stench, trace=tuple(steps))


# --------------------------------------------------------------------------
# CSV

TRIAL_COLUMNS = ("condition", "moving_cost", "seed", "steps", "shot_action", "shot_tile",
                 "wumpus_pos", "hit", "total_reward", "cap_hit", "n_points", "n_stench")
TRACE_COLUMNS = ("step", "hunter_pos", "action", "reward", "observation", "stench", "svi_point",
                 "svi_no_point", "p_point", "signal", "belief_before", "belief_after")


def _tile(t):
    return "" if t is None else f"({t[0]},{t[1]})"


def _parse_tile(text):
    if not text:
        return None
    x, y = text.strip("()").split(",")
    return int(x), int(y)


def _num(x):
    return "" if x is None else repr(float(x))


def format_belief(b) -> str:
    return ";".join(repr(float(p)) for p in b)


def write_trials(records, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRIAL_COLUMNS)
    for r in records:
        w.writerow([r.condition, _num(r.moving_cost), r.seed, r.steps, r.shot_action or "",
                    _tile(r.shot_tile), _tile(r.wumpus_pos), int(r.hit), _num(r.total_reward),
                    int(r.cap_hit), r.n_points, r.n_stench])


def read_trials(fh) -> list[TrialRecord]:
    out = []
    for row in csv.DictReader(fh):
        out.append(TrialRecord(
            condition=row["condition"], moving_cost=float(row["moving_cost"]), seed=int(row["seed"]),
            steps=int(row["steps"]), shot_action=row["shot_action"] or None,
            shot_tile=_parse_tile(row["shot_tile"]), wumpus_pos=_parse_tile(row["wumpus_pos"]),
            hit=row["hit"] == "1", total_reward=float(row["total_reward"]),
            cap_hit=row["cap_hit"] == "1", n_points=int(row["n_points"]),
            n_stench=int(row["n_stench"])))
    return out


def trials_to_csv(records) -> str:
    buf = io.StringIO()
    write_trials(records, buf)
    return buf.getvalue()


def write_trace(steps, fh, extra: dict | None = None, header: bool = True):
    """One row per step; ``extra`` columns (e.g. condition, seed) are prepended."""
    extra = extra or {}
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(tuple(extra) + TRACE_COLUMNS)
    for st in steps:
        w.writerow(list(extra.values()) + [
            st.step, _tile(st.hunter_pos), st.action, _num(st.reward), st.observation or "",
            int(st.observation == "STENCH"), _num(st.svi_point), _num(st.svi_no_point),
            _num(st.p_point), st.signal or "", format_belief(st.belief_before),
            format_belief(st.belief_after)])

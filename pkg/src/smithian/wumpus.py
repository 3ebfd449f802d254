"""The guided Wumpus hunting game as a finite POMDP.

Tiles are ``(column, row)``. The hunter walks on three tiles, the Wumpus
sits on one of three others, and the hunter smells a stench with
probability 0.85 next to the Wumpus and 0.15 elsewhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .pomdp import PomdpModel

HUNTER_TILES = ((0, 0), (0, 1), (1, 0))
WUMPUS_TILES = ((0, 2), (1, 1), (2, 0))
START = (0, 0)
GRID_SIZE = 3

STENCH_NEAR = 0.85
STENCH_FAR = 0.15


class Action(IntEnum):
    MOVE_VERTICAL = 0
    MOVE_HORIZONTAL = 1
    SHOOT_UP = 2
    SHOOT_RIGHT = 3


class Obs(IntEnum):
    STENCH = 0
    NOTHING = 1


MOVES = {Action.MOVE_VERTICAL: (0, 1), Action.MOVE_HORIZONTAL: (1, 0)}
SHOTS = {Action.SHOOT_UP: (0, 1), Action.SHOOT_RIGHT: (1, 0)}
SHOOTING_MODES = ("adjacent", "ray")


@dataclass(frozen=True)
class WumpusState:
    hunter_pos: tuple | None
    wumpus_pos: tuple | None
    terminal: bool = False

    def __str__(self):
        if self.terminal:
            return "terminal"
        return f"hunter={self.hunter_pos} wumpus={self.wumpus_pos}"


TERMINAL = WumpusState(None, None, True)
STATES = tuple(WumpusState(h, w) for h in HUNTER_TILES for w in WUMPUS_TILES) + (TERMINAL,)
TERMINAL_INDEX = len(STATES) - 1


def state_index(hunter_pos, wumpus_pos) -> int:
    return HUNTER_TILES.index(tuple(hunter_pos)) * len(WUMPUS_TILES) + WUMPUS_TILES.index(tuple(wumpus_pos))


def hunter_slice(hunter_pos) -> slice:
    """Indices of the states that share ``hunter_pos``."""
    i = HUNTER_TILES.index(tuple(hunter_pos)) * len(WUMPUS_TILES)
    return slice(i, i + len(WUMPUS_TILES))


def adjacency(tile_a, tile_b) -> bool:
    """True iff the tiles are 4-neighbours (Manhattan distance 1)."""
    return abs(tile_a[0] - tile_b[0]) + abs(tile_a[1] - tile_b[1]) == 1


def move_destination(pos, action) -> tuple:
    dx, dy = MOVES[Action(action)]
    dest = (pos[0] + dx, pos[1] + dy)
    # anything off the walkable tiles sends the hunter back to the start
    return dest if dest in HUNTER_TILES else START


def shot_targets(pos, action, shooting="adjacent") -> list:
    dx, dy = SHOTS[Action(action)]
    tiles = []
    x, y = pos[0] + dx, pos[1] + dy
    while 0 <= x < GRID_SIZE and 0 <= y < GRID_SIZE:
        tiles.append((x, y))
        if shooting == "adjacent":
            break
        x, y = x + dx, y + dy
    if not tiles:
        tiles.append((pos[0] + dx, pos[1] + dy))
    return tiles


def is_hit(pos, wumpus_pos, action, shooting="adjacent") -> bool:
    return tuple(wumpus_pos) in shot_targets(pos, action, shooting)


def stench_prob(hunter_pos, wumpus_pos) -> float:
    return STENCH_NEAR if adjacency(hunter_pos, wumpus_pos) else STENCH_FAR


@dataclass(frozen=True)
class EpisodeConfig:
    moving_cost: float = -5.0
    hit_reward: float = 100.0
    miss_reward: float = -100.0
    max_steps: int = 20
    seed: int = 0
    discount: float = 0.95
    shooting: str = "adjacent"

    def __post_init__(self):
        if self.moving_cost >= 0:
            raise ValueError(f"moving_cost must be negative, got {self.moving_cost}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if self.shooting not in SHOOTING_MODES:
            raise ValueError(f"shooting must be one of {SHOOTING_MODES}")


def build_model(cfg: EpisodeConfig) -> PomdpModel:
    S, A, O = len(STATES), len(Action), len(Obs)
    T = np.zeros((A, S, S))
    Z = np.zeros((A, S, O))
    R = np.zeros((S, A))
    T[:, TERMINAL_INDEX, TERMINAL_INDEX] = 1.0
    Z[:, TERMINAL_INDEX, Obs.NOTHING] = 1.0

    for s, st in enumerate(STATES[:-1]):
        for a in Action:
            if a in MOVES:
                dest = move_destination(st.hunter_pos, a)
                T[a, s, state_index(dest, st.wumpus_pos)] = 1.0
                R[s, a] = cfg.moving_cost
            else:
                T[a, s, TERMINAL_INDEX] = 1.0
                hit = is_hit(st.hunter_pos, st.wumpus_pos, a, cfg.shooting)
                R[s, a] = cfg.hit_reward if hit else cfg.miss_reward
            p = stench_prob(st.hunter_pos, st.wumpus_pos)
            Z[a, s] = (p, 1.0 - p)

    init = np.zeros(S)
    init[hunter_slice(START)] = 1.0 / len(WUMPUS_TILES)
    terminal = np.zeros(S, bool)
    terminal[TERMINAL_INDEX] = True
    return PomdpModel(states=STATES, actions=tuple(a.name for a in Action),
                      observations=tuple(o.name for o in Obs), transition=T,
                      observation=Z, reward=R, discount=cfg.discount,
                      terminal=terminal, initial_belief=init)


def wumpus_marginal(b) -> np.ndarray:
    """Collapse a belief over all states to a distribution over Wumpus tiles."""
    b = np.asarray(b)
    return b[:-1].reshape(len(HUNTER_TILES), len(WUMPUS_TILES)).sum(axis=0)


def belief_at(hunter_pos, wumpus_probs) -> np.ndarray:
    """Belief with the hunter known to be at ``hunter_pos``."""
    b = np.zeros(len(STATES))
    w = np.asarray(wumpus_probs, float)
    b[hunter_slice(hunter_pos)] = w / w.sum()
    return b

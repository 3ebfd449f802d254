"""Finite POMDPs: belief arithmetic, point-based value iteration, and exact oracles.

Models are stored as dense arrays:

    transition[a, s, s']   P(s' | s, a)
    observation[a, s', o]  P(o | s', a)
    reward[s, a]           immediate reward

Beliefs are plain 1-d float arrays over state indices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ROW_TOL = 1e-9


class ImpossibleObservation(ValueError):
    """Raised when an observation has zero probability under the current belief."""


def _frozen(arr, dtype=float):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PomdpModel:
    states: tuple
    actions: tuple
    observations: tuple
    transition: np.ndarray
    observation: np.ndarray
    reward: np.ndarray
    discount: float = 0.95
    terminal: np.ndarray | None = None
    initial_belief: np.ndarray | None = None

    def __post_init__(self):
        S, A, O = len(self.states), len(self.actions), len(self.observations)
        T = _frozen(self.transition)
        Z = _frozen(self.observation)
        R = _frozen(self.reward)
        if T.shape != (A, S, S):
            raise ValueError(f"transition must have shape {(A, S, S)}, got {T.shape}")
        if Z.shape != (A, S, O):
            raise ValueError(f"observation must have shape {(A, S, O)}, got {Z.shape}")
        if R.shape != (S, A):
            raise ValueError(f"reward must have shape {(S, A)}, got {R.shape}")
        if not np.allclose(T.sum(axis=2), 1.0, atol=ROW_TOL, rtol=0):
            raise ValueError("transition rows must sum to 1")
        if not np.allclose(Z.sum(axis=2), 1.0, atol=ROW_TOL, rtol=0):
            raise ValueError("observation rows must sum to 1")
        if not 0.0 < self.discount <= 1.0:
            raise ValueError("discount must lie in (0, 1]")
        term = np.zeros(S, bool) if self.terminal is None else np.asarray(self.terminal, bool)
        for s in np.flatnonzero(term):
            if not np.all(T[:, s, s] == 1.0) or np.any(R[s] != 0.0):
                raise ValueError(f"terminal state {self.states[s]!r} must self-loop with zero reward")
        object.__setattr__(self, "transition", T)
        object.__setattr__(self, "observation", Z)
        object.__setattr__(self, "reward", R)
        object.__setattr__(self, "terminal", _frozen(term, bool))
        if self.initial_belief is None:
            init = np.where(term, 0.0, 1.0)
            init = init / init.sum()
        else:
            init = check_belief(self, self.initial_belief)
        object.__setattr__(self, "initial_belief", _frozen(init))

    @property
    def n_states(self):
        return len(self.states)

    @property
    def n_actions(self):
        return len(self.actions)

    @property
    def n_observations(self):
        return len(self.observations)

    def state_index(self, state):
        return self.states.index(state)

    def degenerate(self, state_index: int) -> np.ndarray:
        b = np.zeros(self.n_states)
        b[state_index] = 1.0
        return b

    def to_dict(self) -> dict:
        """Plain JSON-able dump of the whole model (see docs/formats.md)."""
        return {
            "format": "smithian.pomdp/1",
            "states": [str(s) for s in self.states],
            "actions": [str(a) for a in self.actions],
            "observations": [str(o) for o in self.observations],
            "discount": self.discount,
            "terminal": self.terminal.tolist(),
            "initial_belief": self.initial_belief.tolist(),
            "transition": self.transition.tolist(),
            "observation": self.observation.tolist(),
            "reward": self.reward.tolist(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def check_belief(model: PomdpModel, b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape != (model.n_states,):
        raise ValueError(f"belief must have {model.n_states} entries, got shape {b.shape}")
    if np.any(b < -ROW_TOL) or abs(b.sum() - 1.0) > ROW_TOL:
        raise ValueError("belief must be a probability vector")
    return b


def is_degenerate(b, tol=1e-12) -> bool:
    return bool(np.max(b) >= 1.0 - tol)


def predict(model: PomdpModel, b, a: int) -> np.ndarray:
    """Next-state distribution sum_s P(s'|s,a) b(s)."""
    return np.asarray(b) @ model.transition[a]


def observation_probs(model: PomdpModel, b, a: int) -> np.ndarray:
    return predict(model, b, a) @ model.observation[a]


def belief_update(model: PomdpModel, b, a: int, o: int) -> np.ndarray:
    """Bayes filter: b'(s') ∝ P(o|s',a) sum_s P(s'|s,a) b(s)."""
    unnorm = model.observation[a, :, o] * predict(model, b, a)
    z = unnorm.sum()
    if z <= 0.0:
        raise ImpossibleObservation(
            f"observation {model.observations[o]!r} has zero probability after {model.actions[a]!r}")
    return unnorm / z


def reweight(b, likelihood) -> np.ndarray:
    """Condition a belief on an extra likelihood vector without a state transition."""
    unnorm = np.asarray(likelihood, float) * np.asarray(b, float)
    z = unnorm.sum()
    if z <= 0.0:
        raise ImpossibleObservation("likelihood is zero on the whole support of the belief")
    return unnorm / z


@dataclass(frozen=True)
class AlphaVector:
    coeffs: np.ndarray
    action: int

    def value(self, b) -> float:
        return float(self.coeffs @ b)


EXPANSIONS = ("reachable", "simulate")


@dataclass(frozen=True)
class SolverConfig:
    belief_points: int = 64
    expansion_rounds: int = 3
    backup_iterations: int = 200
    tolerance: float = 1e-6
    seed: int = 0
    # "reachable": breadth-first successors; "simulate": greedy trajectories
    expansion: str = "reachable"

    def __post_init__(self):
        if self.expansion not in EXPANSIONS:
            raise ValueError(f"expansion must be one of {EXPANSIONS}")


@dataclass(frozen=True, eq=False)
class SolveInfo:
    iterations: int
    residual: float
    converged: bool
    belief_points: np.ndarray
    # values at the final belief set after every backup, for diagnostics
    value_trace: tuple = field(repr=False, default=())


@dataclass(frozen=True, eq=False)
class Policy:
    """Piecewise-linear value function given by alpha vectors.

    Greedy action selection picks the best vector at ``b``; vectors whose
    value is within ``tie_tol`` of the best are treated as ties and the
    lowest action index wins.
    """

    alphas: np.ndarray
    actions: np.ndarray
    tie_tol: float = 1e-9
    info: SolveInfo | None = field(default=None, compare=False)

    def __post_init__(self):
        alphas = _frozen(np.atleast_2d(self.alphas))
        actions = _frozen(np.asarray(self.actions).reshape(-1), int)
        if len(alphas) == 0 or len(alphas) != len(actions):
            raise ValueError("policy needs one action per alpha vector and at least one vector")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "actions", actions)

    @classmethod
    def from_vectors(cls, vectors: Sequence[AlphaVector], **kw) -> Policy:
        return cls(np.array([v.coeffs for v in vectors]), np.array([v.action for v in vectors]), **kw)

    @property
    def vectors(self) -> list[AlphaVector]:
        return [AlphaVector(c, int(a)) for c, a in zip(self.alphas, self.actions)]

    def value(self, b) -> float:
        return float(np.max(self.alphas @ b))

    def greedy_action(self, b) -> int:
        vals = self.alphas @ b
        best = vals.max()
        tied = vals >= best - self.tie_tol * max(1.0, abs(best))
        return int(self.actions[tied].min())

    def action_values(self, b, n_actions: int) -> np.ndarray:
        """Best alpha-vector value per action (-inf for actions with no vector)."""
        vals = self.alphas @ b
        out = np.full(n_actions, -np.inf)
        np.maximum.at(out, self.actions, vals)
        return out

    def fingerprint(self) -> str:
        import hashlib
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.alphas).tobytes())
        h.update(np.ascontiguousarray(self.actions).astype(np.int64).tobytes())
        return h.hexdigest()


def greedy_action(policy: Policy, b) -> int:
    return policy.greedy_action(b)


def expected_utility(model: PomdpModel, b, a: int, value_fn: Policy) -> float:
    """One-step lookahead: E[r | b, a] + discount * E_o[value_fn(b')]."""
    b = np.asarray(b, float)
    total = float(b @ model.reward[:, a])
    cont = 0.0
    for o, p in enumerate(observation_probs(model, b, a)):
        if p <= 0.0:
            continue
        cont += p * value_fn.value(belief_update(model, b, a, o))
    return total + model.discount * cont


def q_values(model: PomdpModel, b, value_fn: Policy) -> np.ndarray:
    return np.array([expected_utility(model, b, a, value_fn) for a in range(model.n_actions)])


# --------------------------------------------------------------------------
# point-based value iteration

def blind_lower_bound(model: PomdpModel) -> np.ndarray:
    """Values of the |A| open-loop "always do a" policies, one row per action."""
    if model.discount >= 1.0:
        raise ValueError("point-based value iteration requires discount < 1")
    S = model.n_states
    rows = []
    for a in range(model.n_actions):
        lhs = np.eye(S) - model.discount * model.transition[a]
        rows.append(np.linalg.solve(lhs, model.reward[:, a]))
    return np.array(rows)


def _backup(model: PomdpModel, B: np.ndarray, alphas: np.ndarray):
    """Point-based Bellman backup of ``alphas`` at every row of ``B``."""
    A, O = model.n_actions, model.n_observations
    N, S = B.shape
    cand = np.empty((A, N, S))
    for a in range(A):
        cand[a] = model.reward[:, a]
        for o in range(O):
            # g[s, k] = gamma * sum_s' T(s,s') Z(s',o) alpha_k(s')
            g = model.discount * model.transition[a] @ (model.observation[a, :, o][:, None] * alphas.T)
            best = np.argmax(B @ g, axis=1)
            cand[a] += g[:, best].T
    vals = np.einsum("ans,ns->an", cand, B)
    act = np.argmax(vals, axis=0)
    new = cand[act, np.arange(N)]
    return new, act, vals[act, np.arange(N)]


def _successors(model: PomdpModel, B, length: int, cap: int) -> list:
    """Beliefs reachable from ``B`` breadth first, skipping ones already seen."""
    live = ~model.terminal
    seen = {np.round(b, 12).tobytes() for b in B}
    out, frontier = [], list(B)
    for _ in range(length):
        nxt = []
        for b in frontier:
            if b[live].sum() <= 0.0:
                continue
            for a in range(model.n_actions):
                for o, p in enumerate(observation_probs(model, b, a)):
                    if p <= 0.0:
                        continue
                    b2 = belief_update(model, b, a, o)
                    key = np.round(b2, 12).tobytes()
                    if key not in seen:
                        seen.add(key)
                        nxt.append(b2)
        out.extend(nxt)
        frontier = nxt
        if not frontier or len(out) >= cap:
            break
    return out


def _simulate(model: PomdpModel, B, policy: Policy, rng, length: int) -> list:
    """Beliefs along greedy trajectories from each point (first action random)."""
    out = []
    for b0 in B:
        for _ in range(model.n_actions):
            b = b0
            s = rng.choice(model.n_states, p=b)
            for t in range(length):
                if model.terminal[s]:
                    break
                a = int(rng.integers(model.n_actions)) if t == 0 else policy.greedy_action(b)
                s = rng.choice(model.n_states, p=model.transition[a, s])
                o = rng.choice(model.n_observations, p=model.observation[a, s])
                b = belief_update(model, b, a, o)
                out.append(b)
    return out


def _expand(model: PomdpModel, B: np.ndarray, quota: int, rng: np.random.Generator,
            policy: Policy | None = None, length: int = 10) -> np.ndarray:
    """Add up to ``quota`` candidate beliefs, farthest (L1) from the current set first.

    Candidates are reachable successors of ``B``, or the beliefs visited by
    ``policy`` in simulation when a policy is given.
    """
    if quota <= 0:
        return B
    if policy is None:
        cands = _successors(model, B, length, cap=32 * quota)
    else:
        cands = _simulate(model, B, policy, rng, length)
    if not cands:
        return B
    cands = np.array(cands)[rng.permutation(len(cands))]  # seed decides ties
    dist = np.abs(cands[:, None, :] - B[None, :, :]).sum(axis=2).min(axis=1)
    points = list(B)
    for _ in range(quota):
        i = int(np.argmax(dist))
        if dist[i] <= 1e-9:
            break
        points.append(cands[i])
        dist = np.minimum(dist, np.abs(cands - cands[i]).sum(axis=1))
    return np.array(points)


def pbvi_solve(model: PomdpModel, config: SolverConfig = SolverConfig()) -> Policy:
    """Approximate the optimal value function with point-based value iteration.

    The belief set starts as the initial belief plus every degenerate belief
    and is grown ``expansion_rounds`` times with reachable (or, with
    ``expansion="simulate"``, greedily visited) beliefs, picking the ones
    farthest from the set. Alpha vectors start from the blind-policy
    lower bound; a point keeps its old vector whenever a backup would lower
    its value, so values at the belief points never decrease.
    """
    rng = np.random.default_rng(config.seed)
    B = np.vstack([model.initial_belief[None, :], np.eye(model.n_states)])
    B = B[: max(config.belief_points, 1)]
    blind = blind_lower_bound(model)
    alphas, actions = blind, np.arange(model.n_actions)

    trace = []
    iterations, residual = 0, np.inf
    for rnd in range(config.expansion_rounds + 1):
        old_vals = (B @ alphas.T).max(axis=1)
        for _ in range(config.backup_iterations):
            new, act, new_vals = _backup(model, B, alphas)
            prev = (B @ alphas.T)
            keep = new_vals < prev.max(axis=1)
            if np.any(keep):
                idx = prev.argmax(axis=1)
                new[keep] = alphas[idx[keep]]
                act[keep] = actions[idx[keep]]
                new_vals[keep] = prev.max(axis=1)[keep]
            residual = float(np.max(new_vals - old_vals))
            alphas, actions = _dedupe(new, act)
            old_vals = new_vals
            iterations += 1
            trace.append(new_vals.copy())
            if residual < config.tolerance:
                break
        rounds_left = config.expansion_rounds - rnd
        if rounds_left > 0 and len(B) < config.belief_points:
            quota = -(-(config.belief_points - len(B)) // rounds_left)
            guide = Policy(alphas, actions) if config.expansion == "simulate" else None
            B = _expand(model, B, quota, rng, guide)

    info = SolveInfo(iterations=iterations, residual=residual,
                     converged=residual < config.tolerance, belief_points=B,
                     value_trace=tuple(trace))
    return Policy(alphas, actions, info=info)


def _dedupe(alphas, actions):
    key = np.hstack([alphas, actions[:, None]])
    _, idx = np.unique(key, axis=0, return_index=True)
    idx = np.sort(idx)
    return alphas[idx], actions[idx]


# --------------------------------------------------------------------------
# exact oracles

class NodeBudgetExceeded(RuntimeError):
    pass


def expectimax_q(model: PomdpModel, b, horizon: int, node_budget: int = 2_000_000,
                 memo: bool = False) -> np.ndarray:
    """Exact finite-horizon Q-value of every first action by full enumeration.

    With ``memo`` the tree is collapsed into a DAG by caching on the belief
    (rounded to 12 decimals), which makes much deeper horizons tractable.
    """
    b = check_belief(model, b)
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    counter = [0]
    live = ~model.terminal
    cache = {}

    def value(b, h):
        if memo:
            key = (np.round(b, 12).tobytes(), h)
            if key in cache:
                return cache[key]
        counter[0] += 1
        if counter[0] > node_budget:
            raise NodeBudgetExceeded(f"expectimax exceeded {node_budget} nodes at horizon {horizon}")
        if h == 0 or b[live].sum() <= 0.0:
            v = 0.0
        else:
            v = max(q(b, a, h) for a in range(model.n_actions))
        if memo:
            cache[key] = v
        return v

    def q(b, a, h):
        total = float(b @ model.reward[:, a])
        if h == 1:
            return total
        cont = 0.0
        for o, p in enumerate(observation_probs(model, b, a)):
            if p > 0.0:
                cont += p * value(belief_update(model, b, a, o), h - 1)
        return total + model.discount * cont

    if horizon == 0:
        return np.zeros(model.n_actions)
    return np.array([q(b, a, horizon) for a in range(model.n_actions)])


def exact_expectimax(model: PomdpModel, b, horizon: int, node_budget: int = 2_000_000,
                     tie_tol: float = 1e-9, memo: bool = False) -> tuple[float, int]:
    """Optimal ``horizon``-step discounted value at ``b`` and a first action achieving it.

    Horizon 0 returns value 0 with action 0 (the tie-break action).
    """
    qs = expectimax_q(model, b, horizon, node_budget, memo)
    best = qs.max()
    action = int(np.flatnonzero(qs >= best - tie_tol * max(1.0, abs(best)))[0])
    return float(best), action


def solve_fully_observable(model: PomdpModel, discount: float | None = None,
                           tol: float = 1e-9, max_iter: int = 100_000) -> np.ndarray:
    """State values of the underlying MDP by value iteration.

    ``discount`` defaults to the model's; pass 1.0 for undiscounted episode
    totals (valid when every policy worth following reaches a terminal state).
    """
    gamma = model.discount if discount is None else discount
    V = np.zeros(model.n_states)
    for _ in range(max_iter):
        Q = model.reward + gamma * np.einsum("ast,t->sa", model.transition, V)
        newV = np.where(model.terminal, 0.0, Q.max(axis=1))
        if np.max(np.abs(newV - V)) < tol:
            return newV
        V = newV
    return V

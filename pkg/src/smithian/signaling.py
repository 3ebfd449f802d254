"""Smithian utilities, Smithian value of information, and pointing as a speech act.

The signaler predicts the receiver's action from the receiver's belief and
scores it with her own belief. A signal's value is how much it raises that
score once the receiver has interpreted it. Signals are drawn from a
softmax over those values, and a pragmatic receiver inverts the softmax
by Bayes' rule.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .pomdp import (ImpossibleObservation, Policy, PomdpModel, belief_update, expected_utility,
                    is_degenerate, reweight)

POINT = "POINT"
NO_POINT = "NO_POINT"
SIGNALS = (POINT, NO_POINT)

ReceiverInterpretation = Callable[[np.ndarray, str], np.ndarray]


class IncoherentSignal(ValueError):
    """The received signal has zero probability under every supported state."""


@dataclass(frozen=True)
class SignalerConfig:
    alpha: float = 5.0

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("alpha must be non-negative")

    def cost(self, u: str) -> float:
        return 0.0


class RolloutEvaluator:
    """Discounted return of a receiver that follows ``policy`` from its own belief
    while the world is actually in state ``s``, over at most ``horizon`` steps.

    Results are cached on the full input (rounded belief, state, steps left).
    """

    def __init__(self, model: PomdpModel, policy: Policy, horizon: int = 20):
        self.model, self.policy, self.horizon = model, policy, horizon
        self._cache = {}

    def action_value(self, b_rec, s: int, a: int, h: int | None = None) -> float:
        m = self.model
        h = self.horizon if h is None else h
        v = float(m.reward[s, a])
        for s2 in np.flatnonzero(m.transition[a, s]):
            for o in np.flatnonzero(m.observation[a, s2]):
                p = m.transition[a, s, s2] * m.observation[a, s2, o]
                v += m.discount * p * self.value(belief_update(m, b_rec, a, o), int(s2), h - 1)
        return v

    def value(self, b_rec, s: int, h: int | None = None) -> float:
        h = self.horizon if h is None else h
        if h <= 0 or self.model.terminal[s]:
            return 0.0
        key = (np.round(b_rec, 12).tobytes(), s, h)
        v = self._cache.get(key)
        if v is None:
            v = self.action_value(b_rec, s, self.policy.greedy_action(b_rec), h)
            self._cache[key] = v
        return v


@dataclass(frozen=True, eq=False)
class SignalingContext:
    """Everything the signaler needs to evaluate one signaling decision.

    ``continuation`` selects how outcomes are scored after the receiver's
    action:

    - ``"policy"``: the receiver policy's value at the signaler's updated belief
    - ``"fully_observable"``: ``fo_values`` at the next state
    - ``"rollout"``: the receiver keeps acting on its own belief (``rollout``)
    - ``"auto"``: ``"fully_observable"`` when the signaler is certain, else ``"policy"``

    ``action_temperature`` of None gives a deterministic greedy receiver.
    """

    model: PomdpModel
    signaler_belief: np.ndarray
    receiver_belief: np.ndarray
    receiver_policy: Policy
    fo_values: np.ndarray | None = None
    continuation: str = "auto"
    action_temperature: float | None = None
    rollout: RolloutEvaluator | None = None

    def with_receiver(self, b_rec) -> SignalingContext:
        return replace(self, receiver_belief=np.asarray(b_rec, float))

    def with_signaler(self, b_sig) -> SignalingContext:
        return replace(self, signaler_belief=np.asarray(b_sig, float))


def action_distribution(policy: Policy, b, n_actions: int, temperature: float | None = None) -> np.ndarray:
    """P(a | b) for a receiver following ``policy``."""
    if temperature is None:
        p = np.zeros(n_actions)
        p[policy.greedy_action(b)] = 1.0
        return p
    vals = policy.action_values(b, n_actions)
    z = (vals - vals.max()) / temperature
    w = np.where(np.isfinite(z), np.exp(z), 0.0)
    return w / w.sum()


def smithian_utility_of_action(ctx: SignalingContext, a: int) -> float:
    m = ctx.model
    bs = np.asarray(ctx.signaler_belief, float)
    mode = ctx.continuation
    if mode == "auto":
        mode = "fully_observable" if ctx.fo_values is not None and is_degenerate(bs) else "policy"
    if mode == "policy":
        return expected_utility(m, bs, a, ctx.receiver_policy)
    if mode == "rollout":
        return float(sum(p * ctx.rollout.action_value(ctx.receiver_belief, int(s), a)
                         for s, p in enumerate(bs) if p > 0.0))
    if mode != "fully_observable":
        raise ValueError(f"unknown continuation mode {ctx.continuation!r}")
    # sum_s' U_sig(s') sum_s P(s'|s,a) b_sig(s), with U_sig = r(s,a) + gamma V(s')
    nxt = bs @ m.transition[a]
    return float(bs @ m.reward[:, a] + m.discount * nxt @ ctx.fo_values)


def smithian_utility_of_belief(ctx: SignalingContext, b_rec) -> float:
    ctx = ctx.with_receiver(b_rec)
    probs = action_distribution(ctx.receiver_policy, b_rec, ctx.model.n_actions, ctx.action_temperature)
    return float(sum(p * smithian_utility_of_action(ctx, a) for a, p in enumerate(probs) if p > 0.0))


def svi(ctx: SignalingContext, u: str, receiver_model: ReceiverInterpretation) -> float:
    b_rec = ctx.receiver_belief
    return smithian_utility_of_belief(ctx, receiver_model(b_rec, u)) - smithian_utility_of_belief(ctx, b_rec)


def svi_values(ctx: SignalingContext, receiver_model: ReceiverInterpretation) -> np.ndarray:
    """SVI of every signal in ``SIGNALS`` order, sharing the pre-signal utility."""
    before = smithian_utility_of_belief(ctx, ctx.receiver_belief)
    return np.array([smithian_utility_of_belief(ctx, receiver_model(ctx.receiver_belief, u)) - before
                     for u in SIGNALS])


def signal_softmax(values, alpha: float) -> np.ndarray:
    """P(u) ∝ exp(alpha * value); alpha = inf is argmax with ties to NO_POINT."""
    values = np.asarray(values, float)
    if np.isinf(alpha):
        best = np.flatnonzero(values >= values.max())
        p = np.zeros(len(values))
        p[best.max()] = 1.0  # NO_POINT is last in SIGNALS
        return p
    z = alpha * (values - values.max())
    w = np.exp(z)
    return w / w.sum()


def signaler_distribution(ctx: SignalingContext, cfg: SignalerConfig,
                          receiver_model: ReceiverInterpretation) -> np.ndarray:
    """Distribution over ``SIGNALS`` (POINT first)."""
    vals = svi_values(ctx, receiver_model) - np.array([cfg.cost(u) for u in SIGNALS])
    return signal_softmax(vals, cfg.alpha)


@dataclass(frozen=True)
class LiteralReceiver:
    """Reads POINT as a second, independent sample of the pointed observation."""

    model: PomdpModel
    last_obs: int
    last_action: int

    def __call__(self, b, u):
        return literal_interpret(self.model, b, u, self.last_obs, self.last_action)


def literal_interpret(model: PomdpModel, b_rec, u: str, last_obs: int, last_action: int) -> np.ndarray:
    if u == NO_POINT:
        return np.asarray(b_rec, float)
    if u != POINT:
        raise ValueError(f"unknown signal {u!r}")
    return reweight(b_rec, model.observation[last_action, :, last_obs])


def pragmatic_interpret(b_rec, u: str, signaler_fn: Callable[[int], np.ndarray]) -> np.ndarray:
    """b'(s) ∝ P_sig(u | s) b(s), with ``signaler_fn(s)`` giving P_sig(. | s) over ``SIGNALS``."""
    b_rec = np.asarray(b_rec, float)
    k = SIGNALS.index(u)
    lik = np.zeros_like(b_rec)
    for s in np.flatnonzero(b_rec > 0.0):
        lik[s] = signaler_fn(int(s))[k]
    try:
        return reweight(b_rec, lik)
    except ImpossibleObservation:
        raise IncoherentSignal(f"signal {u} is impossible under every state the receiver considers") from None


def level1_signaler(ctx: SignalingContext, cfg: SignalerConfig,
                    receiver_model: ReceiverInterpretation) -> Callable[[int], np.ndarray]:
    """P_sig(u | s): the signaler's distribution had she been certain of state ``s``."""
    cache = {}

    def fn(s):
        if s not in cache:
            cache[s] = signaler_distribution(ctx.with_signaler(ctx.model.degenerate(s)), cfg, receiver_model)
        return cache[s]

    return fn


@dataclass(frozen=True)
class SignalEvent:
    signal: str
    svi_point: float
    svi_no_point: float
    p_point: float


def guide_step(ctx: SignalingContext, cfg: SignalerConfig, rng: np.random.Generator,
               receiver_model: ReceiverInterpretation) -> SignalEvent:
    """Sample one signal; SVI is computed against ``receiver_model`` (the literal reading)."""
    vals = svi_values(ctx, receiver_model)
    probs = signal_softmax(vals, cfg.alpha)
    k = int(rng.random() >= probs[0])
    return SignalEvent(SIGNALS[k], float(vals[0]), float(vals[1]), float(probs[0]))

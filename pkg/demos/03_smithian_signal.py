"""When is pointing at a stench worth it?

The guide knows the Wumpus is at (1,1). The hunter stands at (1,0) after a
stench and is leaning toward (1,1), but not enough to shoot. Pointing
doubles the stench evidence, which tips the hunter into shooting up.

Run with ``python demos/03_smithian_signal.py``.
"""
# %%
import numpy as np

from smithian.episode import WumpusGame
from smithian.signaling import (POINT, LiteralReceiver, SignalerConfig, SignalingContext, level1_signaler,
                                pragmatic_interpret, signaler_distribution, svi_values)
from smithian.wumpus import Action, EpisodeConfig, Obs, belief_at, state_index, wumpus_marginal

np.set_printoptions(precision=4, suppress=True)
game = WumpusGame.solve(EpisodeConfig(moving_cost=-5))

receiver = belief_at((1, 0), [0.25, 0.65, 0.10])
guide = game.model.degenerate(state_index((1, 0), (1, 1)))
ctx = SignalingContext(game.model, guide, receiver, game.policy, game.fo_values)
literal = LiteralReceiver(game.model, int(Obs.STENCH), int(Action.MOVE_HORIZONTAL))

print("hunter would:", Action(game.policy.greedy_action(receiver)).name)
print("after a literal POINT:", Action(game.policy.greedy_action(literal(receiver, POINT))).name)
print("SVI(POINT), SVI(NO_POINT):", svi_values(ctx, literal))

# %%
for alpha in (0.01, 0.1, 1.0, 10.0):
    p = signaler_distribution(ctx, SignalerConfig(alpha), literal)
    print(f"alpha {alpha:5}: P(POINT) = {p[0]:.4f}")

# %%
# A pragmatic hunter asks which Wumpus tile would make the guide point.
sig = level1_signaler(ctx, SignalerConfig(0.05), literal)
print("pragmatic reading of POINT:", wumpus_marginal(pragmatic_interpret(receiver, POINT, sig)))
print("literal reading of POINT:  ", wumpus_marginal(literal(receiver, POINT)))

"""Tracking where the Wumpus might be.

Run with ``python demos/01_belief_update.py``.
"""
# %%
import numpy as np

from smithian.pomdp import belief_update, observation_probs
from smithian.wumpus import Action, EpisodeConfig, Obs, build_model, wumpus_marginal

np.set_printoptions(precision=4, suppress=True)
model = build_model(EpisodeConfig(moving_cost=-5))

# The hunter starts at (0,0) and knows nothing about the Wumpus.
b = model.initial_belief
print("prior over (0,2), (1,1), (2,0):", wumpus_marginal(b))

# %%
# Step up to (0,1). Two of the three candidate tiles touch it.
print("P(stench, nothing) after moving up:", observation_probs(model, b, Action.MOVE_VERTICAL))
b = belief_update(model, b, Action.MOVE_VERTICAL, Obs.STENCH)
print("after a stench at (0,1):", wumpus_marginal(b))

# %%
# Walking home and over to (1,0) separates (0,2) from (1,1).
b = belief_update(model, b, Action.MOVE_VERTICAL, Obs.NOTHING)   # bounced back to (0,0)
b = belief_update(model, b, Action.MOVE_HORIZONTAL, Obs.STENCH)  # now at (1,0)
print("after a second stench at (1,0):", wumpus_marginal(b))

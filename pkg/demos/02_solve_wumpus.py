"""Planning with point-based value iteration, checked against brute force.

Run with ``python demos/02_solve_wumpus.py``.
"""
# %%
from smithian.pomdp import exact_expectimax, pbvi_solve, solve_fully_observable
from smithian.wumpus import Action, EpisodeConfig, START, WUMPUS_TILES, build_model, state_index

for cost in (-1, -5, -9):
    model = build_model(EpisodeConfig(moving_cost=cost))
    policy = pbvi_solve(model)
    b0 = model.initial_belief
    deep, _ = exact_expectimax(model, b0, 40, memo=True)
    short, _ = exact_expectimax(model, b0, 6)
    print(f"cost {cost:3d}: pbvi {policy.value(b0):7.3f}   expectimax h40 {deep:7.3f}   h6 {short:7.3f}   "
          f"first move {Action(policy.greedy_action(b0)).name}   vectors {len(policy.alphas)}")

# %%
# With the Wumpus in plain view the hunter needs one move and one shot,
# so the undiscounted total is 100 + cost wherever the Wumpus hides.
model = build_model(EpisodeConfig(moving_cost=-9))
V = solve_fully_observable(model, discount=1.0)
print("known-Wumpus totals from (0,0):", [float(V[state_index(START, w)]) for w in WUMPUS_TILES])

"""Belief-space planning with Smithian pointing, and the guided Wumpus hunt."""

__version__ = "0.1.0"

from .pomdp import (AlphaVector, ImpossibleObservation, Policy, PomdpModel, SolverConfig,
                    belief_update, exact_expectimax, expected_utility, greedy_action, pbvi_solve,
                    solve_fully_observable)
from .signaling import (NO_POINT, POINT, SIGNALS, SignalerConfig, SignalingContext, guide_step,
                        literal_interpret, pragmatic_interpret, signaler_distribution,
                        smithian_utility_of_action, smithian_utility_of_belief, svi)
from .wumpus import Action, EpisodeConfig, Obs, adjacency, build_model
from .episode import Guide, Hunter, TrialRecord, WumpusGame, run_episode
from .experiment import ExperimentPlan, StatsReport, run_experiment, summarize

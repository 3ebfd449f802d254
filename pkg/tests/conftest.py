import pytest

from smithian.episode import WumpusGame
from smithian.experiment import CANONICAL_COSTS
from smithian.wumpus import EpisodeConfig


@pytest.fixture(scope="session")
def games():
    """Solved games for every canonical cost, shared by the whole session."""
    return {c: WumpusGame.solve(EpisodeConfig(moving_cost=c)) for c in CANONICAL_COSTS}


@pytest.fixture(scope="session")
def game5(games):
    return games[-5.0]

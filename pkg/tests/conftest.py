import numpy as np
import pytest

from dpeq.game import PolymatrixGame, validate_game


def build_pair(u01, u10=None, zero_sum=False, actions=None):
    """Two players on one edge; u10 defaults to the zero-sum mirror."""
    u01 = np.asarray(u01, dtype=np.float64)
    u10 = -u01.T if u10 is None else np.asarray(u10, dtype=np.float64)
    game = PolymatrixGame(
        n_players=2,
        actions=actions or [u01.shape[0], u01.shape[1]],
        edges={(0, 1)},
        utilities={(0, 1): u01, (1, 0): u10},
        zero_sum=zero_sum,
    )
    validate_game(game)
    return game


def build_chain(matrices, zero_sum=True):
    """Chain from forward matrices; reverse matrices are the zero-sum mirrors."""
    n = len(matrices) + 1
    utilities = {}
    actions = []
    for i, u in enumerate(matrices):
        u = np.asarray(u, dtype=np.float64)
        utilities[(i, i + 1)] = u
        utilities[(i + 1, i)] = -u.T
        actions.append(u.shape[0])
    actions.append(np.asarray(matrices[-1]).shape[1])
    game = PolymatrixGame(
        n_players=n,
        actions=actions,
        edges={(i, i + 1) for i in range(n - 1)},
        utilities=utilities,
        zero_sum=zero_sum,
    )
    validate_game(game)
    return game


@pytest.fixture
def pennies():
    """Matching-pennies-style zero-sum edge."""
    return build_pair([[1.0, -1.0], [-1.0, 1.0]], zero_sum=True)


@pytest.fixture
def zero_pair():
    """Two players, one edge, all-zero utilities."""
    return build_pair(np.zeros((2, 2)), np.zeros((2, 2)), zero_sum=True)

import numpy as np
import pytest

from dpeq.dynamics import changed_edges
from dpeq.errors import FixtureTooLarge
from dpeq.game import (
    gradient_at,
    random_profile,
    uniform_profile,
    validate_game,
    zero_sum_residual,
)
from dpeq.graphs import (
    bfs_distances,
    fixture_chain_flip,
    fixture_triplet_chain,
    gen_chain,
    gen_dense,
    gen_sparse,
    resample_edge,
)
from dpeq.oracle import best_response, best_response_dynamics, verify_pure_ne


def test_dense_p1_complete():
    game = gen_dense(8, 1.0, 2, seed=0)
    assert all(game.degree(i) == 7 for i in range(8))
    assert len(game.edges) == 8 * 7 // 2


def test_dense_zero_sum_residual():
    rng = np.random.default_rng(0)
    game = gen_dense(12, 0.4, 3, zero_sum=True, seed=1)
    validate_game(game)
    for _ in range(20):
        assert abs(zero_sum_residual(game, random_profile(game, rng))) < 1e-9


def test_dense_mean_degree_concentration():
    # two directional draws per pair merge: P(edge) = 1 - (1-p)^2
    n, p = 256, 0.25
    expected = (1.0 - (1.0 - p) ** 2) * (n - 1)
    means = []
    for seed in range(20):
        game = gen_dense(n, p, 2, seed=seed)
        means.append(2.0 * len(game.edges) / n)
    avg = float(np.mean(means))
    assert abs(avg - expected) <= 0.15 * expected


def test_dense_deterministic():
    a = gen_dense(30, 0.3, 3, zero_sum=True, seed=9)
    b = gen_dense(30, 0.3, 3, zero_sum=True, seed=9)
    assert a.edges == b.edges
    assert all(np.array_equal(a.utilities[k], b.utilities[k]) for k in a.utilities)
    c = gen_dense(30, 0.3, 3, zero_sum=True, seed=10)
    assert c.edges != a.edges or any(
        not np.array_equal(c.utilities[k], a.utilities[k]) for k in a.utilities
    )


def test_sparse_edge_budget_and_degrees():
    for seed in range(10):
        c = 2 + seed % 2
        game = gen_sparse(100, c, 2, seed=seed)
        validate_game(game)
        assert len(game.edges) <= c * 100
        assert game.max_degree <= 2 * c


def test_sparse_c1_matching():
    game = gen_sparse(64, 1, 2, seed=3)
    assert len(game.edges) == 32
    assert game.max_degree == 1


def test_sparse_deterministic():
    a = gen_sparse(50, 2, 4, seed=7)
    b = gen_sparse(50, 2, 4, seed=7)
    assert a.edges == b.edges
    assert all(np.array_equal(a.utilities[k], b.utilities[k]) for k in a.utilities)


def test_chain_generator():
    game = gen_chain(6, 3, zero_sum=True, seed=0)
    assert game.edges == {(i, i + 1) for i in range(5)}
    validate_game(game)


def test_bfs_chain_example():
    game = gen_chain(5, 2, seed=0)
    assert np.array_equal(bfs_distances(game, (0, 1)), [0, 0, 1, 2, 3])


def test_bfs_source_zero_and_unreachable():
    game_two = gen_chain(2, 2, seed=0)
    utilities = dict(game_two.utilities)
    # two disconnected pairs
    from dpeq.game import PolymatrixGame

    u = np.zeros((2, 2))
    game = PolymatrixGame(
        4,
        [2] * 4,
        {(0, 1), (2, 3)},
        {(0, 1): u, (1, 0): u, (2, 3): u, (3, 2): u},
    )
    validate_game(game)
    dist = bfs_distances(game, (0, 1))
    assert dist[0] == 0 and dist[1] == 0
    assert np.isinf(dist[2]) and np.isinf(dist[3])
    assert utilities  # silence unused warning


def test_bfs_triangle_consistency():
    for seed in range(5):
        game = gen_sparse(60, 2, 2, seed=seed)
        sources = sorted(game.edges)[0]
        dist = bfs_distances(game, sources)
        for (i, j) in game.edges:
            if np.isfinite(dist[i]) and np.isfinite(dist[j]):
                assert abs(dist[i] - dist[j]) <= 1.0


def test_chain_fixture_stated_ne():
    game, ne = fixture_chain_flip(4)
    assert [int(np.argmax(v)) for v in ne] == [0, 1, 0, 1]
    assert verify_pure_ne(game, ne)
    game8, ne8 = fixture_chain_flip(8)
    assert verify_pure_ne(game8, ne8)


def test_chain_fixture_flipped_ne():
    game, ne = fixture_chain_flip(4, flipped=True)
    assert [int(np.argmax(v)) for v in ne] == [1, 0, 1, 0]
    assert verify_pure_ne(game, ne)


def test_chain_fixture_avg_exploitability():
    from dpeq.game import avg_exploitability

    for flipped in (False, True):
        game, ne = fixture_chain_flip(6, flipped=flipped)
        assert avg_exploitability(game, ne) <= 1e-9


def test_chain_fixture_size_limits():
    with pytest.raises(FixtureTooLarge):
        fixture_chain_flip(17)
    with pytest.raises(FixtureTooLarge):
        fixture_chain_flip(1)


def test_triplet_fixture_base():
    game, ne = fixture_triplet_chain(3)
    assert verify_pure_ne(game, ne)
    result = best_response_dynamics(game)
    assert result.converged
    assert [int(np.argmax(v)) for v in result.profile] == [0] * 9


def test_triplet_fixture_adjacent_flip():
    base, _ = fixture_triplet_chain(3)
    changed, ne = fixture_triplet_chain(3, changed_triplet=1)
    assert changed_edges(base, changed) == {(3, 4)}
    assert verify_pure_ne(changed, ne)
    # middle and last triplet members best-respond with a2
    assert best_response(changed, ne, 4) == 1
    assert best_response(changed, ne, 5) == 1
    result = best_response_dynamics(changed)
    assert result.converged
    assert [int(np.argmax(v)) for v in result.profile] == [0, 0, 0, 0, 1, 1, 0, 0, 0]


def test_triplet_fixture_zero_off_triplet():
    game, _ = fixture_triplet_chain(2)
    profile = uniform_profile(game)
    base = gradient_at(game, profile, 2)
    # player 2's inter-triplet edge carries a zero matrix: varying player 3 is inert
    perturbed = list(profile)
    perturbed[3] = np.array([1.0, 0.0])
    assert np.array_equal(gradient_at(game, perturbed, 2), base)


def test_resample_edge_adjacent():
    game = gen_sparse(30, 2, 3, zero_sum=True, seed=1)
    edge = sorted(game.edges)[2]
    adjacent = resample_edge(game, edge, np.random.default_rng(5))
    validate_game(adjacent)
    assert changed_edges(game, adjacent) == {edge}


def test_generated_games_validate():
    for seed in range(5):
        validate_game(gen_dense(20, 0.3, 2, zero_sum=True, seed=seed))
        validate_game(gen_sparse(20, 2, 2, zero_sum=True, seed=seed))

"""Random game generators, BFS distances, and hard-instance chain fixtures.

Generators are pure functions of their seed. Utility entries are sampled
iid uniform on [-1, 1]; with zero_sum=True the reverse matrix is the
negated transpose.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import FixtureTooLarge
from .game import PolymatrixGame, StrategyProfile, pure_profile, validate_game

_MAX_REROLLS = 20


@dataclass
class GraphSpec:
    kind: str  # dense | sparse | chain
    n: int
    actions: int = 2
    p: float = 0.25
    c: int = 2
    zero_sum: bool = False
    seed: int = 0


def generate(spec: GraphSpec) -> PolymatrixGame:
    if spec.kind == "dense":
        return gen_dense(spec.n, spec.p, spec.actions, spec.zero_sum, spec.seed)
    if spec.kind == "sparse":
        return gen_sparse(spec.n, spec.c, spec.actions, spec.zero_sum, spec.seed)
    if spec.kind == "chain":
        return gen_chain(spec.n, spec.actions, spec.zero_sum, spec.seed)
    raise ValueError(f"unknown graph kind {spec.kind!r}")


def _fill_utilities(edges, actions, zero_sum, rng):
    ordered = sorted(edges)
    utilities = {}
    if len(set(actions)) == 1 and ordered:
        # bulk draw: one block for all edges instead of one rng call each
        a = actions[0]
        fwd = rng.uniform(-1.0, 1.0, size=(len(ordered), a, a))
        bwd = -fwd.transpose(0, 2, 1) if zero_sum else rng.uniform(-1.0, 1.0, size=fwd.shape)
        for e, (i, j) in enumerate(ordered):
            utilities[(i, j)] = fwd[e]
            utilities[(j, i)] = bwd[e]
        return utilities
    for (i, j) in ordered:
        u = rng.uniform(-1.0, 1.0, size=(actions[i], actions[j]))
        utilities[(i, j)] = u
        utilities[(j, i)] = -u.T if zero_sum else rng.uniform(-1.0, 1.0, size=(actions[j], actions[i]))
    return utilities


def _build(n, actions_per_player, edges, zero_sum, rng) -> PolymatrixGame:
    game = PolymatrixGame(
        n_players=n,
        actions=list(actions_per_player),
        edges=set(edges),
        utilities=_fill_utilities(edges, actions_per_player, zero_sum, rng),
        zero_sum=zero_sum,
    )
    validate_game(game)
    return game


def gen_dense(n: int, p: float, actions: int, zero_sum: bool = False, seed: int = 0) -> PolymatrixGame:
    """Erdos-Renyi-style graph from per-node directional coin flips.

    Each node links to every other node with probability p; the two
    directional draws merge into one undirected edge (per-pair probability
    1 - (1-p)^2). Nodes left isolated re-roll their draws, then fall back
    to a uniform random partner.
    """
    if n < 2 or not (0.0 < p <= 1.0):
        raise ValueError(f"need n >= 2 and p in (0, 1], got n={n}, p={p}")
    rng = np.random.default_rng(seed)
    flips = rng.random((n, n)) < p
    np.fill_diagonal(flips, False)
    adj = flips | flips.T
    for i in range(n):
        tries = 0
        while not adj[i].any() and tries < _MAX_REROLLS:
            row = rng.random(n) < p
            row[i] = False
            adj[i] |= row
            adj[:, i] |= row
            tries += 1
        if not adj[i].any():
            j = int(rng.integers(n - 1))
            j += j >= i
            adj[i, j] = adj[j, i] = True
    edges = {(i, j) for i, j in zip(*np.nonzero(np.triu(adj, 1)))}
    edges = {(int(i), int(j)) for i, j in edges}
    return _build(n, [actions] * n, edges, zero_sum, rng)


def gen_sparse(n: int, c: int, actions: int, zero_sum: bool = False, seed: int = 0) -> PolymatrixGame:
    """Bounded-degree graph from pairing a shuffled multiset with c copies of each node.

    Consecutive stream entries form candidate edges; self-loops and
    duplicates are dropped, so |E| <= c*n and every degree is <= 2c.
    """
    if n < 2 or c < 1:
        raise ValueError(f"need n >= 2 and c >= 1, got n={n}, c={c}")
    rng = np.random.default_rng(seed)
    stream = np.repeat(np.arange(n), c)
    rng.shuffle(stream)
    edges = set()
    for a, b in zip(stream[0::2], stream[1::2]):
        if a != b:
            edges.add((int(min(a, b)), int(max(a, b))))
    degree = np.zeros(n, dtype=int)
    for i, j in edges:
        degree[i] += 1
        degree[j] += 1
    for i in range(n):
        if degree[i] == 0:
            j = int(rng.integers(n - 1))
            j += j >= i
            edges.add((min(i, j), max(i, j)))
            degree[i] += 1
            degree[j] += 1
    return _build(n, [actions] * n, edges, zero_sum, rng)


def gen_chain(n: int, actions: int, zero_sum: bool = False, seed: int = 0) -> PolymatrixGame:
    """Path graph 0-1-...-(n-1) with random utilities."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    edges = {(i, i + 1) for i in range(n - 1)}
    return _build(n, [actions] * n, edges, zero_sum, rng)


def resample_edge(game: PolymatrixGame, edge, rng: np.random.Generator) -> PolymatrixGame:
    """Adjacent game: fresh uniform [-1, 1] utilities on one edge, all else shared."""
    i, j = min(edge), max(edge)
    if (i, j) not in game.edges:
        raise ValueError(f"edge {edge} not in the game")
    utilities = dict(game.utilities)
    u = rng.uniform(-1.0, 1.0, size=(game.actions[i], game.actions[j]))
    utilities[(i, j)] = u
    utilities[(j, i)] = -u.T if game.zero_sum else rng.uniform(
        -1.0, 1.0, size=(game.actions[j], game.actions[i])
    )
    return PolymatrixGame(
        n_players=game.n_players,
        actions=list(game.actions),
        edges=set(game.edges),
        utilities=utilities,
        zero_sum=game.zero_sum,
    )


def bfs_distances(game: PolymatrixGame, sources) -> np.ndarray:
    """Per-player min graph distance to any source; +inf when unreachable."""
    dist = np.full(game.n_players, np.inf)
    queue = deque()
    for v in sources:
        if not (0 <= v < game.n_players):
            raise ValueError(f"source {v} out of range")
        if dist[v] > 0:
            dist[v] = 0.0
            queue.append(v)
    while queue:
        u = queue.popleft()
        for w in game.neighbors(u):
            if not np.isfinite(dist[w]):
                dist[w] = dist[u] + 1.0
                queue.append(w)
    return dist


def _chain_game(n, matrices) -> PolymatrixGame:
    """Zero-sum chain from forward matrices: U[i+1, i] = -U[i, i+1]^T."""
    utilities = {}
    for i, u in enumerate(matrices):
        utilities[(i, i + 1)] = u
        utilities[(i + 1, i)] = -u.T
    game = PolymatrixGame(
        n_players=n,
        actions=[2] * n,
        edges={(i, i + 1) for i in range(n - 1)},
        utilities=utilities,
        zero_sum=True,
    )
    validate_game(game)
    return game


def fixture_chain_flip(n: int, flipped: bool = False):
    """Epsilon-chain with a known alternating pure equilibrium.

    Edge (i, i+1) carries eps = 0.1 * 10^(-i); the equilibrium alternates
    a1, a2, a1, ... With flipped=True the first edge's matrix is replaced
    by its reversed variant and the equilibrium flips to a2, a1, a2, ...

    Returns (game, known_ne).
    """
    if not (2 <= n <= 16):
        raise FixtureTooLarge(f"chain fixture needs 2 <= n <= 16, got {n}")
    matrices = []
    for i in range(n - 1):
        e = 0.1 * 10.0 ** (-i)
        matrices.append(np.array([[0.5, 0.5 - e], [0.5 - 3 * e, 0.5 - 2 * e]]))
    if flipped:
        e = 0.1
        matrices[0] = np.array([[0.5 - 2 * e, 0.5 - 3 * e], [0.5 - e, 0.5]])
    game = _chain_game(n, matrices)
    first = 1 if flipped else 0
    ne = pure_profile(game, [(first + k) % 2 for k in range(n)])
    return game, ne


# Triplet interaction matrices, written for the higher-indexed (row) player
# of each edge. MID_VS_FIRST gives the middle player a strict preference for
# a1; LAST_VS_MID makes the last player strictly follow the middle player's
# action while leaving all-a1 the unique pure attractor of the base game.
# CHANGED replaces MID_VS_FIRST in the adjacent variant and drags the middle
# and last players to a2.
_MID_VS_FIRST = np.array([[1.0, 1.0], [0.0, 0.0]])
_LAST_VS_MID = np.array([[0.9, 0.0], [0.8, 0.1]])
_CHANGED = np.array([[0.5, 0.0], [0.0, 0.5]])


def fixture_triplet_chain(n_triplets: int, changed_triplet=None):
    """Zero-sum chain of player triplets whose unique equilibrium is all-a1.

    Triplet k holds players (3k, 3k+1, 3k+2); the two nonzero matrices sit
    on edges (3k, 3k+1) and (3k+1, 3k+2), links between triplets are zero.
    Passing changed_triplet=k swaps edge (3k, 3k+1) to a coordination
    matrix; the equilibrium of players 3k+1 and 3k+2 then moves to a2 and
    every other player is unaffected.

    Returns (game, known_ne).
    """
    if n_triplets < 1:
        raise ValueError("need at least one triplet")
    n = 3 * n_triplets
    matrices = []
    for i in range(n - 1):
        pos = i % 3
        if pos == 0:
            upper = _CHANGED if changed_triplet == i // 3 else _MID_VS_FIRST
        elif pos == 1:
            upper = _LAST_VS_MID
        else:
            upper = None
        # _chain_game wants the forward matrix U[i, i+1]; `upper` is the
        # reverse direction U[i+1, i], so store its negated transpose.
        matrices.append(np.zeros((2, 2)) if upper is None else -upper.T)
    game = _chain_game(n, matrices)
    choices = [0] * n
    if changed_triplet is not None:
        choices[3 * changed_triplet + 1] = 1
        choices[3 * changed_triplet + 2] = 1
    return game, pure_profile(game, choices)

"""Polymatrix game data model, validation, gradients, and equilibrium-gap metrics.

A game is a graph of pairwise bilinear interactions: each undirected edge
{i, j} carries two utility matrices U[i,j] (shape |A_i| x |A_j|) and U[j,i],
entries in [-1, 1]. Player i's utility at a profile is the degree-normalized
sum (1/|N(i)|) * sum_j pi_i^T U[i,j] pi_j, and the loss gradient is
g_i = -(1/|N(i)|) * sum_j U[i,j] pi_j.

Games and profiles are immutable after construction by convention; every
operation here is pure.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundViolation,
    EmptyTrace,
    IsolatedPlayer,
    MissingMatrix,
    NeighborCountMismatch,
    ShapeMismatch,
    ValidationError,
    ZeroSumViolation,
)

PROFILE_TOL = 1e-9


@dataclass
class PolymatrixGame:
    n_players: int
    actions: list
    edges: set  # undirected, stored as (i, j) with i < j
    utilities: dict  # directed (i, j) -> ndarray of shape (|A_i|, |A_j|)
    zero_sum: bool = False
    _neighbors: list = field(default=None, repr=False, compare=False)
    _arrays: object = field(default=None, repr=False, compare=False)

    def neighbors(self, i: int) -> list:
        if self._neighbors is None:
            adj = [[] for _ in range(self.n_players)]
            for a, b in self.edges:
                adj[a].append(b)
                adj[b].append(a)
            self._neighbors = [sorted(v) for v in adj]
        return self._neighbors[i]

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    @property
    def max_actions(self) -> int:
        return max(self.actions)

    @property
    def max_degree(self) -> int:
        return max(self.degree(i) for i in range(self.n_players))

    def arrays(self) -> "GameArrays":
        if self._arrays is None:
            self._arrays = GameArrays(self)
        return self._arrays


class GameArrays:
    """Flat edge-indexed view of a game for vectorized passes.

    Directed edges are stacked: mats[e] is the zero-padded utility matrix of
    owner src[e] against neighbor dst[e]. Gradient and residual evaluations
    become one einsum plus a bincount reduction.
    """

    def __init__(self, game: PolymatrixGame):
        n = game.n_players
        amax = game.max_actions
        src, dst = [], []
        for (i, j) in sorted(game.utilities):
            src.append(i)
            dst.append(j)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.mats = np.zeros((len(src), amax, amax))
        uniform = all(a == amax for a in game.actions)
        for e, (i, j) in enumerate(zip(src, dst)):
            u = game.utilities[(i, j)]
            if uniform:
                self.mats[e] = u
            else:
                self.mats[e, : u.shape[0], : u.shape[1]] = u
        self.deg = np.asarray([max(1, game.degree(i)) for i in range(n)], dtype=np.float64)
        self.dims = np.asarray(game.actions, dtype=np.int64)
        self.pad_mask = np.arange(amax)[None, :] >= self.dims[:, None]
        self.n = n
        self.amax = amax

    def unnormalized_gradients(self, padded: np.ndarray) -> np.ndarray:
        """-sum_j U[i,j] pi_j per player, padded columns zero."""
        contrib = np.einsum("eab,eb->ea", self.mats, padded[self.dst])
        out = np.empty((self.n, self.amax))
        for a in range(self.amax):
            out[:, a] = np.bincount(self.src, weights=contrib[:, a], minlength=self.n)
        return -out

    def gradients(self, padded: np.ndarray) -> np.ndarray:
        return self.unnormalized_gradients(padded) / self.deg[:, None]

    def bilinear_sum(self, pa: np.ndarray, pb: np.ndarray) -> float:
        """sum over directed edges of pa_i^T U[i,j] pb_j (no degree normalization)."""
        return float(np.einsum("ea,eab,eb->", pa[self.src], self.mats, pb[self.dst]))


@dataclass
class StrategyProfile:
    strategies: list  # one vector per player, length |A_i|

    def __iter__(self):
        return iter(self.strategies)

    def __getitem__(self, i):
        return self.strategies[i]


def pure_profile(game: PolymatrixGame, choices) -> StrategyProfile:
    """Profile with each player i concentrated on action choices[i]."""
    vecs = []
    for i, a in enumerate(choices):
        v = np.zeros(game.actions[i])
        v[a] = 1.0
        vecs.append(v)
    return StrategyProfile(vecs)


def uniform_profile(game: PolymatrixGame) -> StrategyProfile:
    return StrategyProfile([np.full(a, 1.0 / a) for a in game.actions])


def random_profile(game: PolymatrixGame, rng: np.random.Generator) -> StrategyProfile:
    """Dirichlet(1) sample per player: uniform over each simplex."""
    return StrategyProfile([rng.dirichlet(np.ones(a)) for a in game.actions])


def pad_profile(game: PolymatrixGame, profile) -> np.ndarray:
    """(N, A_max) array with zero padding beyond each player's action count."""
    out = np.zeros((game.n_players, game.max_actions))
    for i, v in enumerate(profile):
        out[i, : len(v)] = v
    return out


def validate_profile(game: PolymatrixGame, profile) -> None:
    strategies = list(profile)
    if len(strategies) != game.n_players:
        raise ValidationError(
            f"profile has {len(strategies)} strategies for {game.n_players} players"
        )
    for i, v in enumerate(strategies):
        v = np.asarray(v)
        if v.shape != (game.actions[i],):
            raise ValidationError(f"player {i}: strategy shape {v.shape} != ({game.actions[i]},)")
        if v.min() < -1e-12 or abs(v.sum() - 1.0) > PROFILE_TOL:
            raise ValidationError(f"player {i}: strategy off the simplex: {v}")


def validate_game(game: PolymatrixGame) -> None:
    """Check all structural invariants; raises a specific error on the first violation."""
    n = game.n_players
    if n < 1 or len(game.actions) != n:
        raise ValidationError(f"need one action count per player, got {len(game.actions)} for n={n}")
    if any(a < 1 for a in game.actions):
        raise ValidationError("every action count must be >= 1")
    directed = set()
    for (i, j) in game.edges:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValidationError(f"bad edge ({i}, {j})")
        directed.add((i, j))
        directed.add((j, i))
    if set(game.utilities) - directed:
        extra = sorted(set(game.utilities) - directed)[0]
        raise ValidationError(f"utility matrix for non-edge {extra}")
    for (i, j) in sorted(directed):
        if (i, j) not in game.utilities:
            raise MissingMatrix(f"no utility matrix for directed edge ({i}, {j})")
        shape = np.shape(game.utilities[(i, j)])
        if shape != (game.actions[i], game.actions[j]):
            raise ShapeMismatch(
                f"U[{i},{j}] has shape {shape}, expected ({game.actions[i]}, {game.actions[j]})"
            )
    for i in range(n):
        if game.degree(i) == 0:
            raise IsolatedPlayer(f"player {i} has no neighbors")
    # one pass over the stacked matrices; NaN fails the comparison too
    arr = game.arrays()
    if not np.abs(arr.mats).max() <= 1.0:
        for (i, j), u in sorted(game.utilities.items()):
            u = np.asarray(u)
            if not np.all(np.isfinite(u)) or abs(u).max() > 1.0:
                raise BoundViolation(f"U[{i},{j}] has entries outside [-1, 1]")
    if game.zero_sum:
        for (i, j) in game.edges:
            if not np.array_equal(game.utilities[(j, i)], -game.utilities[(i, j)].T):
                raise ZeroSumViolation(f"U[{j},{i}] != -U[{i},{j}]^T on edge ({i}, {j})")


def gradient(game: PolymatrixGame, received, i: int) -> np.ndarray:
    """Loss gradient of player i from per-neighbor strategy vectors.

    received must hold one simplex vector per neighbor, in ascending
    neighbor order. Entries of the result lie in [-1, 1].
    """
    nbrs = game.neighbors(i)
    received = list(received)
    if len(received) != len(nbrs):
        raise NeighborCountMismatch(
            f"player {i} has {len(nbrs)} neighbors, received {len(received)} vectors"
        )
    g = np.zeros(game.actions[i])
    for j, pi_j in zip(nbrs, received):
        g -= game.utilities[(i, j)] @ np.asarray(pi_j)
    return g / len(nbrs)


def gradient_at(game: PolymatrixGame, profile, i: int) -> np.ndarray:
    """Loss gradient of player i at a full strategy profile."""
    strategies = list(profile)
    return gradient(game, [strategies[j] for j in game.neighbors(i)], i)


def exploitability(game: PolymatrixGame, profile, i: int) -> float:
    """Best unilateral improvement for player i: <g_i, pi_i> - min_a g_i(a). Always >= 0."""
    g = gradient_at(game, profile, i)
    pi_i = np.asarray(list(profile)[i])
    return float(g @ pi_i - g.min())


def avg_exploitability(game: PolymatrixGame, profile) -> float:
    """Player-averaged exploitability, computed on the clean profile."""
    padded = pad_profile(game, profile)
    arr = game.arrays()
    grads = arr.gradients(padded)
    gap = np.einsum("ia,ia->i", grads, padded)
    gmin = np.where(arr.pad_mask, np.inf, grads).min(axis=1)
    return float(np.mean(gap - gmin))


def _trace_clean(trace) -> np.ndarray:
    clean = np.asarray(trace.clean if hasattr(trace, "clean") else trace)
    if clean.ndim != 3 or clean.shape[0] < 1:
        raise EmptyTrace("trace has no recorded rounds")
    return clean


def time_avg_regret(game: PolymatrixGame, trace, i: int, comparator="best", clamp=False) -> float:
    """Time-averaged regret of player i against a fixed comparator strategy.

    comparator "best" maximizes over the simplex; the maximum sits at a pure
    action because the objective is linear in the comparator. May be
    negative; clamp=True applies max(., 0).
    """
    clean = _trace_clean(trace)
    arr = game.arrays()
    t_rounds = clean.shape[0]
    d = game.actions[i]
    gain = 0.0
    gsum = np.zeros(d)
    for t in range(t_rounds):
        g = arr.gradients(clean[t])[i, :d]
        gain += g @ clean[t, i, :d]
        gsum += g
    if isinstance(comparator, str):
        if comparator != "best":
            raise ValueError(f"unknown comparator {comparator!r}")
        best = gsum.min()
    else:
        best = gsum @ np.asarray(comparator)
    value = (gain - best) / t_rounds
    return float(max(value, 0.0) if clamp else value)


def avg_clamped_regret(game: PolymatrixGame, trace) -> float:
    """(1/N) sum_i max(time_avg_regret_i, 0) with the best pure comparator per player."""
    clean = _trace_clean(trace)
    arr = game.arrays()
    t_rounds = clean.shape[0]
    gains = np.zeros(game.n_players)
    gsum = np.zeros((game.n_players, game.max_actions))
    for t in range(t_rounds):
        g = arr.gradients(clean[t])
        gains += np.einsum("ia,ia->i", g, clean[t])
        gsum += g
    best = np.where(arr.pad_mask, np.inf, gsum).min(axis=1)
    return float(np.mean(np.maximum((gains - best) / t_rounds, 0.0)))


def zero_sum_residual(game: PolymatrixGame, profile) -> float:
    """Unnormalized total utility sum_i sum_{j in N(i)} pi_i^T U[i,j] pi_j.

    Identically zero for games built with U[j,i] = -U[i,j]^T.
    """
    padded = pad_profile(game, profile)
    return game.arrays().bilinear_sum(padded, padded)


def monotonicity_gap(game: PolymatrixGame, profile_a, profile_b) -> float:
    """sum_i <G_i(a) - G_i(b), pi_a_i - pi_b_i> with unnormalized pairwise sums G.

    Uses the unnormalized form (no 1/|N(i)|): that operator is skew for
    zero-sum games, so the gap vanishes there regardless of the degree
    sequence; sign is unconstrained for general-sum games.
    """
    pa = pad_profile(game, profile_a)
    pb = pad_profile(game, profile_b)
    arr = game.arrays()
    diff = arr.unnormalized_gradients(pa) - arr.unnormalized_gradients(pb)
    return float(np.einsum("ia,ia->", diff, pa - pb))


def save_game(game: PolymatrixGame, path) -> None:
    """Write the JSON game format; doubles round-trip losslessly via repr."""
    payload = {
        "n": game.n_players,
        "actions": list(game.actions),
        "zero_sum": bool(game.zero_sum),
        "edges": sorted([list(e) for e in game.edges]),
        "utilities": {
            f"{i},{j}": np.asarray(u).tolist() for (i, j), u in sorted(game.utilities.items())
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_game(path) -> PolymatrixGame:
    with open(path) as fh:
        payload = json.load(fh)
    utilities = {}
    for key, rows in payload["utilities"].items():
        i, j = key.split(",")
        utilities[(int(i), int(j))] = np.asarray(rows, dtype=np.float64)
    game = PolymatrixGame(
        n_players=int(payload["n"]),
        actions=[int(a) for a in payload["actions"]],
        edges={(min(i, j), max(i, j)) for i, j in payload["edges"]},
        utilities=utilities,
        zero_sum=bool(payload["zero_sum"]),
    )
    validate_game(game)
    return game

"""Noisy proximal-gradient equilibrium dynamics with degree-adaptive regularization.

Every player starts uniform, broadcasts her strategy plus iid Gaussian
noise each round, projects what she receives back onto the simplex, and
takes a regularized proximal step from her own noisy-projected strategy:

    pi_i <- Proj[ (pibar_i - eta * g_i) / (1 + eta * tau_i) ]

with tau_i = c / |N(i)| and c = Nbar^(5/9) / ln N by default (Nbar the
harmonic mean degree). Noise is drawn from counter-based streams keyed by
(master_seed, round), so runs are bitwise reproducible under any worker
count and coupled runs share their noise by construction.

A run performs exactly T proximal updates. The recorded trace holds the T
broadcasts that follow the first update (timesteps 1..T); the round-0
broadcast of the uniform profile drives the first update but is excluded,
matching the observation stream the privacy accounting sums over.
"""

import csv
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from . import game as gamelib
from .errors import DegenerateSchedule, NotAdjacent, TooFewPlayers
from .game import PolymatrixGame, StrategyProfile
from .simplex import project_rows

__all__ = [
    "RunConfig",
    "TauSchedule",
    "Trace",
    "harmonic_mean_degree",
    "tau_schedule",
    "run",
    "run_coupled",
    "changed_edges",
    "coupled_displacement",
    "hyperparams_dense",
    "hyperparams_sparse",
    "dense_rounds",
    "sparse_rounds",
    "convergence_bound_rhs",
    "export_trace",
    "read_trace_csv",
]


@dataclass
class RunConfig:
    eta: float
    sigma: float
    t_rounds: int
    tau_constant: float = None  # None -> harmonic-mean default
    master_seed: int = 0
    record_noise: bool = True

    def validated(self) -> "RunConfig":
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.t_rounds < 1:
            raise ValueError(f"t_rounds must be >= 1, got {self.t_rounds}")
        return self


@dataclass
class TauSchedule:
    tau: np.ndarray  # per-player regularizer weights
    constant: float  # c with tau_i = c / |N(i)|
    nbar: float  # harmonic mean degree


@dataclass
class Trace:
    """Recorded execution: row t-1 holds timestep t (strategies after t updates)."""

    actions: list
    clean: np.ndarray  # (T, N, A_max)
    noises: np.ndarray  # (T, N, A_max) or None
    observations: np.ndarray  # clean + noises, exact; or None
    config: RunConfig
    tau: np.ndarray
    nbar: float

    @property
    def t_rounds(self) -> int:
        return self.clean.shape[0]

    def profile_at(self, t: int) -> StrategyProfile:
        """Strategy profile at timestep t in 1..T."""
        row = self.clean[t - 1]
        return StrategyProfile([row[i, : a] for i, a in enumerate(self.actions)])


def harmonic_mean_degree(game: PolymatrixGame) -> float:
    """N / sum_i 1/|N(i)|; lies between the min and max degree."""
    inv = sum(1.0 / game.degree(i) for i in range(game.n_players))
    return game.n_players / inv


def tau_schedule(game: PolymatrixGame, constant: float = None) -> TauSchedule:
    """Per-player tau_i = c / |N(i)|, default c = Nbar^(5/9) / ln N."""
    if game.n_players < 2:
        raise TooFewPlayers("tau schedule needs N >= 2 so that ln N > 0")
    nbar = harmonic_mean_degree(game)
    if constant is None:
        constant = nbar ** (5.0 / 9.0) / math.log(game.n_players)
    if constant < 0:
        raise ValueError(f"tau constant must be >= 0, got {constant}")
    deg = np.asarray([game.degree(i) for i in range(game.n_players)], dtype=np.float64)
    return TauSchedule(tau=constant / deg, constant=constant, nbar=nbar)


def _noise_block(master_seed: int, t: int, shape, sigma: float) -> np.ndarray:
    """Round-t Gaussian block; row i is player i's counter-based stream."""
    if sigma == 0.0:
        return np.zeros(shape)
    bits = np.random.Philox(key=master_seed & 0xFFFFFFFFFFFFFFFF, counter=[0, 0, 0, t])
    return np.random.Generator(bits).standard_normal(shape) * sigma


def _uniform_rows(game: PolymatrixGame) -> np.ndarray:
    rows = np.zeros((game.n_players, game.max_actions))
    for i, a in enumerate(game.actions):
        rows[i, :a] = 1.0 / a
    return rows


def run(game: PolymatrixGame, config: RunConfig) -> Trace:
    """Execute the dynamics for config.t_rounds proximal updates."""
    config = config.validated()
    if game.n_players < 2:
        raise TooFewPlayers("dynamics need N >= 2")
    arr = game.arrays()
    sched = tau_schedule(game, config.tau_constant)
    tau_col = sched.tau[:, None]
    live = ~arr.pad_mask
    t_rounds = config.t_rounds
    pi = _uniform_rows(game)
    clean = np.empty((t_rounds, game.n_players, game.max_actions))
    noises = np.empty_like(clean) if config.record_noise else None
    observations = np.empty_like(clean) if config.record_noise else None
    for t in range(t_rounds + 1):
        noise = _noise_block(config.master_seed, t, pi.shape, config.sigma) * live
        obs = pi + noise
        if t >= 1:
            clean[t - 1] = pi
            if config.record_noise:
                noises[t - 1] = noise
                observations[t - 1] = obs
        if t == t_rounds:
            break
        pi_bar = project_rows(obs, arr.dims)
        grads = arr.gradients(pi_bar)
        pi = project_rows((pi_bar - config.eta * grads) / (1.0 + config.eta * tau_col), arr.dims)
    return Trace(
        actions=list(game.actions),
        clean=clean,
        noises=noises,
        observations=observations,
        config=config,
        tau=sched.tau,
        nbar=sched.nbar,
    )


def changed_edges(game_a: PolymatrixGame, game_b: PolymatrixGame) -> set:
    """Undirected edges whose utility matrices differ; raises NotAdjacent beyond one."""
    if (
        game_a.n_players != game_b.n_players
        or list(game_a.actions) != list(game_b.actions)
        or game_a.edges != game_b.edges
    ):
        raise NotAdjacent("games differ in players, action sets, or edge set")
    diff = set()
    for (i, j) in game_a.edges:
        if not (
            np.array_equal(game_a.utilities[(i, j)], game_b.utilities[(i, j)])
            and np.array_equal(game_a.utilities[(j, i)], game_b.utilities[(j, i)])
        ):
            diff.add((i, j))
    if len(diff) > 1:
        raise NotAdjacent(f"games differ on {len(diff)} edges: {sorted(diff)}")
    return diff


def run_coupled(game_a: PolymatrixGame, game_b: PolymatrixGame, config: RunConfig):
    """Run two adjacent games with the identical per-(player, round) noise stream."""
    changed_edges(game_a, game_b)
    return run(game_a, config), run(game_b, config)


def coupled_displacement(
    n_actions: int,
    eta: float,
    tau: float,
    sigma: float,
    n_steps: int,
    master_seed: int,
    grads_a,
    grads_b,
) -> np.ndarray:
    """Trajectory gap of one player fed two gradient streams under shared noise.

    grads_a / grads_b are (n_steps, n_actions) arrays with entries in
    [-1, 1]. Returns the per-step distances ||pi_t - pi'_t||; the
    regularizer caps them at 2 * sqrt(n_actions) / tau.
    """
    grads_a = np.asarray(grads_a, dtype=np.float64)
    grads_b = np.asarray(grads_b, dtype=np.float64)
    pi_a = np.full(n_actions, 1.0 / n_actions)
    pi_b = pi_a.copy()
    out = np.empty(n_steps)
    for t in range(n_steps):
        noise = _noise_block(master_seed, t, (1, n_actions), sigma)[0]
        stacked = project_rows(np.vstack([pi_a + noise, pi_b + noise]))
        pre = np.vstack(
            [stacked[0] - eta * grads_a[t], stacked[1] - eta * grads_b[t]]
        ) / (1.0 + eta * tau)
        pi_a, pi_b = project_rows(pre)
        out[t] = np.linalg.norm(pi_a - pi_b)
    return out


def _round_at_least_one(raw: float) -> int:
    if not math.isfinite(raw) or raw <= 0.0:
        raise DegenerateSchedule(f"schedule round count came out as {raw}")
    return max(1, math.floor(raw + 0.5))


def dense_rounds(n: int, p: float) -> int:
    """T = N^(8p/9) / (ln N)^4, rounded half-up and floored at 1."""
    if n < 3 or not (0.0 < p <= 1.0):
        raise DegenerateSchedule(f"dense schedule needs N >= 3 and p in (0, 1], got N={n}, p={p}")
    return _round_at_least_one(n ** (8.0 * p / 9.0) / math.log(n) ** 4)


def sparse_rounds(n: int, n_max: int, default_t: int = 100) -> int:
    """T = (1 - log_N ln N) * log_{Nmax} N for Nmax >= 2; free (default) at Nmax = 1."""
    if n < 3:
        raise DegenerateSchedule(f"sparse schedule needs N >= 3, got N={n}")
    if n_max < 1:
        raise DegenerateSchedule(f"max degree must be >= 1, got {n_max}")
    if n_max == 1:
        # spade is at most 2/N for every T, so the horizon is unconstrained
        return default_t
    ln_n = math.log(n)
    return _round_at_least_one((1.0 - math.log(ln_n) / ln_n) * ln_n / math.log(n_max))


def hyperparams_dense(n: int, p: float, actions: int, clubsuit_value: float) -> RunConfig:
    """Accuracy/privacy trade-off schedule for dense graphs: sigma = 1/sqrt(T), eta = 1/(T * club^(1/3))."""
    if not (math.isfinite(clubsuit_value) and clubsuit_value > 0):
        raise DegenerateSchedule(f"clubsuit must be positive, got {clubsuit_value}")
    t_rounds = dense_rounds(n, p)
    return RunConfig(
        eta=1.0 / (t_rounds * clubsuit_value ** (1.0 / 3.0)),
        sigma=1.0 / math.sqrt(t_rounds),
        t_rounds=t_rounds,
    )


def hyperparams_sparse(n: int, n_max: int, actions: int, spadesuit_value: float) -> RunConfig:
    """Trade-off schedule for sparse graphs; spadesuit_value feeds the step size."""
    if not (math.isfinite(spadesuit_value) and spadesuit_value > 0):
        raise DegenerateSchedule(f"spadesuit must be positive, got {spadesuit_value}")
    t_rounds = sparse_rounds(n, n_max)
    return RunConfig(
        eta=1.0 / (t_rounds * spadesuit_value ** (1.0 / 3.0)),
        sigma=1.0 / math.sqrt(t_rounds),
        t_rounds=t_rounds,
    )


def convergence_bound_rhs(
    eta: float, sigma: float, t_rounds: int, a_max: int, nbar: float, n: int
) -> float:
    """Theoretical ceiling on the player-averaged time-averaged regret.

    1/(eta T) + A sigma^2/(2 eta) + (2 eta^2/sigma + 7 sigma/2) A^(3/2)
      + 1/(2 Nbar^(4/9) ln N) + 2 eta sqrt(A) / (sigma Nbar^(4/9) ln N)
    """
    if sigma <= 0:
        return math.inf
    reg = nbar ** (4.0 / 9.0) * math.log(n)
    return (
        1.0 / (eta * t_rounds)
        + a_max * sigma**2 / (2.0 * eta)
        + (2.0 * eta**2 / sigma + 3.5 * sigma) * a_max**1.5
        + 1.0 / (2.0 * reg)
        + 2.0 * eta * math.sqrt(a_max) / (sigma * reg)
    )


def export_trace(trace: Trace, csv_path, config_path=None) -> None:
    """Write the trace as CSV rows (t, player, kind, a0..); doubles via repr."""
    a_max = max(trace.actions)
    header = ["t", "player", "kind"] + [f"a{k}" for k in range(a_max)]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t in range(trace.t_rounds):
            for i, a in enumerate(trace.actions):
                row = [t + 1, i, "clean"] + [repr(float(x)) for x in trace.clean[t, i, :a]]
                writer.writerow(row + [""] * (a_max - a))
                if trace.observations is not None:
                    row = [t + 1, i, "obs"] + [
                        repr(float(x)) for x in trace.observations[t, i, :a]
                    ]
                    writer.writerow(row + [""] * (a_max - a))
    if config_path is not None:
        payload = {
            "eta": trace.config.eta,
            "sigma": trace.config.sigma,
            "t_rounds": trace.config.t_rounds,
            "tau_constant": trace.config.tau_constant,
            "master_seed": trace.config.master_seed,
            "record_noise": trace.config.record_noise,
            "nbar": trace.nbar,
            "tau": trace.tau.tolist(),
        }
        with open(config_path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")


def read_trace_csv(path) -> dict:
    """Parse an exported trace CSV back into {(t, player, kind): vector}."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            values = np.asarray([float(x) for x in row[3:] if x != ""])
            out[(int(row[0]), int(row[1]), row[2])] = values
    return out


def with_seed(config: RunConfig, master_seed: int) -> RunConfig:
    return replace(config, master_seed=master_seed)

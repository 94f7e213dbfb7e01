"""Independent ground truth for small games: brute-force best responses,
pure-equilibrium verification, best-response dynamics, and the noiseless
regularized fixed point.

Everything here recomputes utilities with explicit Python loops so the
vectorized metric paths have a second opinion to be checked against.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import TauSchedule, tau_schedule
from .game import (
    PolymatrixGame,
    StrategyProfile,
    gradient_at,
    pad_profile,
    pure_profile,
    uniform_profile,
)
from .simplex import project_rows

PURE_NE_TOL = 1e-9


@dataclass
class OracleResult:
    profile: StrategyProfile
    certificate: np.ndarray  # per-player gap; see each procedure's docstring
    converged: bool
    iterations: int


def brute_force_exploitability(game: PolymatrixGame, profile, i: int) -> float:
    """max_a u_i(a) - u_i(pi_i), recomputed entrywise without the gradient path."""
    strategies = [np.asarray(v) for v in profile]
    nbrs = game.neighbors(i)
    utils = []
    for a in range(game.actions[i]):
        total = 0.0
        for j in nbrs:
            row = game.utilities[(i, j)][a]
            total += sum(float(row[b]) * float(strategies[j][b]) for b in range(game.actions[j]))
        utils.append(total / len(nbrs))
    current = sum(float(strategies[i][a]) * utils[a] for a in range(game.actions[i]))
    return max(utils) - current


def best_response(game: PolymatrixGame, profile, i: int) -> int:
    """Pure loss minimizer of player i; ties break to the lowest index."""
    return int(np.argmin(gradient_at(game, profile, i)))


def verify_pure_ne(game: PolymatrixGame, profile) -> bool:
    """True iff no player can gain more than 1e-9 by a unilateral deviation."""
    for v in profile:
        v = np.asarray(v)
        if not np.all((v == 0.0) | (v == 1.0)):
            raise ValueError("verify_pure_ne expects a pure profile")
    return all(
        brute_force_exploitability(game, profile, i) <= PURE_NE_TOL
        for i in range(game.n_players)
    )


def best_response_dynamics(game: PolymatrixGame, max_iters: int = 200, tol: float = PURE_NE_TOL) -> OracleResult:
    """Simultaneous best responses from the uniform profile.

    Stops at a fixed point, on revisiting a pure profile (cycle), or at
    max_iters. certificate holds per-player brute-force exploitability at
    the final profile; converged is honest (fixed point and gap <= tol).
    """
    profile = uniform_profile(game)
    seen = set()
    choices = None
    iterations = 0
    fixed = False
    for iterations in range(1, max_iters + 1):
        new_choices = tuple(best_response(game, profile, i) for i in range(game.n_players))
        if new_choices == choices:
            fixed = True
            break
        if new_choices in seen:
            choices = new_choices
            profile = pure_profile(game, choices)
            break
        seen.add(new_choices)
        choices = new_choices
        profile = pure_profile(game, choices)
    certificate = np.asarray(
        [brute_force_exploitability(game, profile, i) for i in range(game.n_players)]
    )
    return OracleResult(
        profile=profile,
        certificate=certificate,
        converged=fixed and bool(certificate.max() <= tol),
        iterations=iterations,
    )


def regularized_fixed_point(
    game: PolymatrixGame,
    taus: TauSchedule = None,
    eta: float = 0.1,
    max_iters: int = 20000,
    tol: float = 1e-12,
) -> OracleResult:
    """Noiseless limit of the proximal dynamics: iterate until successive
    strategies move less than tol.

    With a large tau the regularizer dominates and the fixed point is near
    uniform; with tau = 0 and a strict pure equilibrium the iteration lands
    on it. certificate holds the per-player fixed-point residual
    ||pi_i - prox(pi_i)||; converged=False is reported, never thrown.
    """
    if taus is None:
        taus = tau_schedule(game)
    tau_col = np.asarray(taus.tau if isinstance(taus, TauSchedule) else taus)[:, None]
    arr = game.arrays()
    pi = pad_profile(game, uniform_profile(game))
    converged = False
    iterations = 0
    residual = None
    for iterations in range(1, max_iters + 1):
        grads = arr.gradients(pi)
        nxt = project_rows((pi - eta * grads) / (1.0 + eta * tau_col), arr.dims)
        residual = np.linalg.norm(nxt - pi, axis=1)
        pi = nxt
        if residual.max() <= tol:
            converged = True
            break
    profile = StrategyProfile([pi[i, : a] for i, a in enumerate(game.actions)])
    return OracleResult(
        profile=profile, certificate=residual, converged=converged, iterations=iterations
    )

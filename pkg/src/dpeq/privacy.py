"""Renyi-DP budget accounting: closed-form dense/sparse factors, the coupled
empirical auditor, and conversion to (epsilon, delta)-DP.

The per-round factors are

    club  = 16 A^3 (ln N)^2 / Nbar^(4/9) + 4A/N          (dense regime)
    spade = (2A/N) * #{i : T > min(dist(i,v1), dist(i,v2))}  (sparse regime)

and the theoretical budget over T observed rounds is
alpha * eta^2 / sigma^2 * min(club, spade) * T. The empirical auditor
re-derives a realized budget from two coupled traces: the observations are
Gaussians centered on the clean strategies, so each round contributes
alpha * ||pi_i - pi'_i||^2 / (2 sigma^2) per player and rounds add up.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import RunConfig, Trace, changed_edges, harmonic_mean_degree, run_coupled
from .errors import (
    DimMismatch,
    EdgeNotInGame,
    InvalidAlpha,
    InvalidDelta,
    TraceMismatch,
    ZeroSigma,
)
from .game import PolymatrixGame


def clubsuit_value(n: int, nbar: float, a_max: int) -> float:
    """Dense-regime factor from raw quantities (natural log)."""
    return 16.0 * a_max**3 * math.log(n) ** 2 / nbar ** (4.0 / 9.0) + 4.0 * a_max / n


def clubsuit(game: PolymatrixGame, a_max: int = None) -> float:
    if a_max is None:
        a_max = game.max_actions
    return clubsuit_value(game.n_players, harmonic_mean_degree(game), a_max)


def _count_within(game: PolymatrixGame, sources, radius: int) -> int:
    """Nodes at graph distance <= radius from the sources (bounded BFS).

    Equals counting min BFS distances below radius+1 but only touches the
    reachable ball, which keeps worst-case-over-edges scans cheap on
    bounded-degree graphs. Unreachable nodes are never visited.
    """
    seen = set(sources)
    frontier = list(sources)
    for _ in range(radius):
        grown = []
        for u in frontier:
            for w in game.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    grown.append(w)
        if not grown:
            break
        frontier = grown
    return len(seen)


def spadesuit(game: PolymatrixGame, t_rounds: int, changed_edge, a_max: int = None) -> float:
    """Sparse-regime factor for a specific changed edge.

    Players disconnected from the edge have infinite distance and never
    trigger the indicator.
    """
    v1, v2 = changed_edge
    edge = (min(v1, v2), max(v1, v2))
    if edge not in game.edges:
        raise EdgeNotInGame(f"edge {changed_edge} not in the game")
    if t_rounds < 1:
        raise ValueError(f"t_rounds must be >= 1, got {t_rounds}")
    if a_max is None:
        a_max = game.max_actions
    count = _count_within(game, edge, t_rounds - 1)
    return 2.0 * a_max / game.n_players * count


def spadesuit_worst_case(game: PolymatrixGame, t_rounds: int, a_max: int = None) -> float:
    """Max of spadesuit over all edges; never exceeds 2A."""
    if a_max is None:
        a_max = game.max_actions
    if t_rounds == 1:
        # only the two endpoints sit at distance 0, whatever the edge
        return 4.0 * a_max / game.n_players
    best = 0.0
    ceiling = 2.0 * a_max
    for e in sorted(game.edges):
        best = max(best, spadesuit(game, t_rounds, e, a_max))
        if best >= ceiling:
            break
    return best


def theoretical_budget(
    alpha: float,
    eta: float,
    sigma: float,
    t_rounds: int,
    game: PolymatrixGame,
    a_max: int = None,
    changed_edge=None,
) -> float:
    """alpha * eta^2 / sigma^2 * min(club, spade) * T.

    changed_edge=None uses the worst case over edges for spade. sigma = 0
    with eta > 0 reports the +inf sentinel (no noise, no guarantee).
    """
    if alpha < 1:
        raise InvalidAlpha(f"alpha must be >= 1, got {alpha}")
    if eta == 0.0:
        return 0.0
    if sigma == 0.0:
        return math.inf
    club = clubsuit(game, a_max)
    if changed_edge is None:
        spade = spadesuit_worst_case(game, t_rounds, a_max)
    else:
        spade = spadesuit(game, t_rounds, changed_edge, a_max)
    return alpha * eta**2 / sigma**2 * min(club, spade) * t_rounds


def gaussian_renyi(m1, m2, sigma: float, alpha: float) -> float:
    """Order-alpha Renyi divergence between isotropic Gaussians: alpha*||m1-m2||^2/(2 sigma^2)."""
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    if m1.shape != m2.shape:
        raise DimMismatch(f"mean shapes differ: {m1.shape} vs {m2.shape}")
    if sigma == 0.0:
        raise ZeroSigma("Renyi divergence of zero-variance Gaussians is undefined")
    if alpha < 1:
        raise InvalidAlpha(f"alpha must be >= 1, got {alpha}")
    diff = m1 - m2
    return float(alpha * (diff @ diff) / (2.0 * sigma**2))


def empirical_budget(trace_a: Trace, trace_b: Trace, sigma: float, alpha: float) -> np.ndarray:
    """Per-player realized budget on coupled traces: sum_t alpha*||pi - pi'||^2/(2 sigma^2).

    Uses the clean strategies (the Gaussian observation means); requires the
    traces to share noise, length, and action sets.
    """
    if sigma == 0.0:
        raise ZeroSigma("empirical auditing needs sigma > 0")
    if alpha < 1:
        raise InvalidAlpha(f"alpha must be >= 1, got {alpha}")
    if list(trace_a.actions) != list(trace_b.actions) or trace_a.clean.shape != trace_b.clean.shape:
        raise TraceMismatch("coupled traces disagree in shape or action sets")
    diff = trace_a.clean - trace_b.clean
    return alpha * np.einsum("tia,tia->i", diff, diff) / (2.0 * sigma**2)


def rdp_to_dp(alpha: float, eps: float, delta: float = None) -> float:
    """(alpha, eps)-Renyi DP to epsilon of (epsilon, delta)-DP.

    Finite alpha > 1 gives eps + ln(1/delta)/(alpha - 1); alpha = +inf is
    exactly (eps, 0)-DP and ignores delta.
    """
    if alpha == math.inf:
        return eps
    if alpha <= 1:
        raise InvalidAlpha(f"finite alpha must be > 1, got {alpha}")
    if delta is None or not (0.0 < delta < 1.0):
        raise InvalidDelta(f"delta must lie in (0, 1), got {delta}")
    return eps + math.log(1.0 / delta) / (alpha - 1.0)


@dataclass
class PrivacyReport:
    alpha: float
    clubsuit: float
    spadesuit: float
    t_rounds: int
    eta: float
    sigma: float
    theoretical_budget: float
    empirical_budget_per_player: np.ndarray
    empirical_budget_avg: float
    audited_edge: tuple

    def dp_epsilon(self, delta: float) -> float:
        """epsilon of the induced (epsilon, delta)-DP guarantee."""
        return rdp_to_dp(self.alpha, self.theoretical_budget, delta)

    # An adversary tapping k channels pays k times the single-channel
    # budget (Renyi composition); reported as a multiplier, not simulated.
    def budget_for_channels(self, k: int) -> float:
        return k * self.theoretical_budget


def audit(
    game_a: PolymatrixGame,
    game_b: PolymatrixGame,
    config: RunConfig,
    alpha: float,
    report_edge="worst",
) -> PrivacyReport:
    """Run the coupled pair and assemble theory-vs-realized budgets.

    report_edge selects the spade reported: "worst" (default, safe upper
    bound over edges), "changed" (the audited edge), or an explicit pair.
    """
    if config.sigma == 0.0:
        raise ZeroSigma("auditing needs sigma > 0")
    diff = changed_edges(game_a, game_b)
    audited = next(iter(diff)) if diff else None
    trace_a, trace_b = run_coupled(game_a, game_b, config)
    club = clubsuit(game_a)
    if report_edge == "worst":
        spade = spadesuit_worst_case(game_a, config.t_rounds)
    elif report_edge == "changed":
        if audited is None:
            raise EdgeNotInGame("games are identical; no changed edge to report on")
        spade = spadesuit(game_a, config.t_rounds, audited)
    else:
        spade = spadesuit(game_a, config.t_rounds, report_edge)
    per_player = empirical_budget(trace_a, trace_b, config.sigma, alpha)
    return PrivacyReport(
        alpha=alpha,
        clubsuit=club,
        spadesuit=spade,
        t_rounds=config.t_rounds,
        eta=config.eta,
        sigma=config.sigma,
        theoretical_budget=alpha * config.eta**2 / config.sigma**2 * min(club, spade) * config.t_rounds,
        empirical_budget_per_player=per_player,
        empirical_budget_avg=float(per_player.mean()),
        audited_edge=audited,
    )

"""Release gate: one test per acceptance criterion, each printing a
pass/fail line and enforcing the criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s`.
"""

import math
import time

import numpy as np
import pytest

from dpeq.cli import sweep_rows
from dpeq.dynamics import (
    RunConfig,
    convergence_bound_rhs,
    coupled_displacement,
    harmonic_mean_degree,
    hyperparams_dense,
    hyperparams_sparse,
    run,
    run_coupled,
    sparse_rounds,
    tau_schedule,
)
from dpeq.game import (
    avg_clamped_regret,
    exploitability,
    monotonicity_gap,
    random_profile,
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
from dpeq.oracle import best_response, best_response_dynamics, brute_force_exploitability, verify_pure_ne
from dpeq.privacy import (
    clubsuit,
    empirical_budget,
    rdp_to_dp,
    spadesuit_worst_case,
    theoretical_budget,
)
from dpeq.simplex import project_simplex


def report(num: int, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def by_n(rows, column):
    out = {}
    for row in rows:
        assert row["status"] == "ok", row
        out.setdefault(row["n"], []).append(row[column])
    return {n: float(np.mean(vs)) for n, vs in out.items()}


def test_criterion_1_dense_scaling_trend():
    start = time.perf_counter()
    n_list = [64, 128, 256, 512, 1024]
    rows = sweep_rows("dense", n_list, list(range(10)), 0.25, 2, 4, False, 2.0)
    elapsed = time.perf_counter() - start
    expl = by_n(rows, "avg_exploitability")
    eps = by_n(rows, "eps_theory")
    ratio = expl[1024] / expl[64]
    decreasing = all(eps[a] > eps[b] for a, b in zip(n_list, n_list[1:]))
    ok = ratio <= 0.8 and decreasing and elapsed < 600.0
    report(
        1,
        ok,
        f"expl(1024)/expl(64)={ratio:.3f} (<=0.8), eps_theory strictly "
        f"decreasing={decreasing}, {elapsed:.0f}s (<600s)",
    )


def test_criterion_2_sparse_privacy_trend():
    n_list = [256, 1024, 4096]
    rows = sweep_rows("sparse", n_list, list(range(10)), 0.25, 2, 4, False, 2.0)
    eps = by_n(rows, "eps_theory")
    emp = by_n(rows, "eps_empirical")
    expl = by_n(rows, "avg_exploitability")
    eps_drop = eps[4096] < 0.7 * eps[256]
    emp_band = all(emp[b] <= 1.10 * emp[a] for a, b in zip(n_list, n_list[1:]))
    bounded = all(0.0 <= expl[n] <= 2.0 for n in n_list)
    ok = eps_drop and emp_band and bounded
    report(
        2,
        ok,
        f"eps(4096)/eps(256)={eps[4096] / eps[256]:.3f} (<0.7), empirical "
        f"nonincreasing within 10%={emp_band}, exploitability bounded={bounded}",
    )


def _audit_pair(kind, seed):
    if kind == "dense":
        game = gen_dense(64, 0.25, 4, seed=seed)
        config = hyperparams_dense(64, 0.25, 4, clubsuit(game))
    else:
        game = gen_sparse(128, 2, 4, seed=seed)
        t_rounds = sparse_rounds(128, game.max_degree)
        config = hyperparams_sparse(
            128, game.max_degree, 4, spadesuit_worst_case(game, t_rounds)
        )
    config = RunConfig(config.eta, config.sigma, config.t_rounds, master_seed=seed)
    rng = np.random.default_rng(1000 + seed)
    edge = sorted(game.edges)[rng.integers(len(game.edges))]
    adjacent = resample_edge(game, edge, rng)
    trace_a, trace_b = run_coupled(game, adjacent, config)
    return game, config, edge, trace_a, trace_b


def test_criterion_3_audit_soundness():
    worst = -math.inf
    for kind in ("dense", "sparse"):
        for seed in range(20):
            game, config, edge, trace_a, trace_b = _audit_pair(kind, seed)
            for alpha in (1.0, 2.0, 10.0):
                emp = float(empirical_budget(trace_a, trace_b, config.sigma, alpha).mean())
                bound = theoretical_budget(
                    alpha, config.eta, config.sigma, config.t_rounds, game, changed_edge=edge
                )
                worst = max(worst, emp - bound)
                if emp > bound + 1e-9:
                    report(3, False, f"{kind} seed {seed} alpha {alpha}: {emp} > {bound}")
    report(3, True, f"40 coupled pairs x alpha {{1,2,10}}: max(emp - theory) = {worst:.3e} <= 1e-9")


def test_criterion_4_convergence_bound():
    worst_ratio = 0.0
    for game_seed in range(5):
        game = gen_dense(256, 0.25, 4, seed=game_seed)
        config = hyperparams_dense(256, 0.25, 4, clubsuit(game))
        values = []
        for master_seed in range(20):
            trace = run(game, RunConfig(
                config.eta, config.sigma, config.t_rounds,
                master_seed=master_seed, record_noise=False,
            ))
            values.append(avg_clamped_regret(game, trace))
        estimate = float(np.mean(values))
        rhs = convergence_bound_rhs(
            config.eta, config.sigma, config.t_rounds, 4,
            harmonic_mean_degree(game), 256,
        )
        worst_ratio = max(worst_ratio, estimate / rhs)
        if estimate > rhs:
            report(4, False, f"game {game_seed}: estimate {estimate:.4f} > bound {rhs:.4f}")
    report(4, True, f"5 games x 20 seeds: max estimate/bound = {worst_ratio:.4f} <= 1")


def test_criterion_5_sparse_coupled_equality():
    game = gen_chain(64, 2, zero_sum=True, seed=0)
    adjacent = resample_edge(game, (0, 1), np.random.default_rng(5))
    config = RunConfig(eta=0.15, sigma=0.4, t_rounds=20, master_seed=3)
    trace_a, trace_b = run_coupled(game, adjacent, config)
    dist = bfs_distances(game, (0, 1))
    budgets = empirical_budget(trace_a, trace_b, config.sigma, 2.0)
    for i in range(64):
        horizon = min(config.t_rounds, int(dist[i]))
        for t in range(1, horizon + 1):
            gap = np.abs(trace_a.clean[t - 1, i] - trace_b.clean[t - 1, i]).max()
            if gap > 1e-12:
                report(5, False, f"player {i} t={t} gap {gap}")
        if config.t_rounds <= dist[i] and budgets[i] != 0.0:
            report(5, False, f"player {i} beyond horizon has budget {budgets[i]}")
    report(5, True, "64-player chain: equality to 1e-12 up to min-dist, exact zero budgets beyond")


def test_criterion_6_variation_with_regularization():
    steps = 10_000
    rng = np.random.default_rng(12)
    patterns = [
        np.tile([1.0, -1.0, 1.0, -1.0], (steps, 1)),
        np.where(rng.random((steps, 4)) < 0.5, 1.0, -1.0),
    ]
    worst = 0.0
    for tau in (0.1, 1.0, 10.0):
        bound = 2.0 * math.sqrt(4) / tau
        for k, grads in enumerate(patterns):
            gaps = coupled_displacement(4, 0.5, tau, 0.5, steps, 100 + k, grads, -grads)
            worst = max(worst, gaps.max() / bound)
            if gaps.max() > bound + 1e-9:
                report(6, False, f"tau={tau} pattern {k}: {gaps.max()} > {bound}")
    report(6, True, f"tau in {{0.1,1,10}}, 1e4 steps: max gap/bound = {worst:.4f}")


def test_criterion_7_tau_identities():
    for seed in range(100):
        if seed % 2:
            game = gen_dense(24, 0.3, 2, seed=seed)
        else:
            game = gen_sparse(40, 3, 2, seed=seed)
        sched = tau_schedule(game)
        mean_tau = float(np.mean(sched.tau))
        if abs(mean_tau - sched.constant / sched.nbar) > 1e-12:
            report(7, False, f"seed {seed}: mean identity off by {mean_tau - sched.constant / sched.nbar}")
        neighbor_avg = float(np.mean([
            np.mean([sched.tau[j] for j in game.neighbors(i)])
            for i in range(game.n_players)
        ]))
        if neighbor_avg > sched.constant / sched.nbar + 1e-12:
            report(7, False, f"seed {seed}: neighbor average exceeds c/nbar")
    report(7, True, "100 graphs: mean-tau identity exact to 1e-12, neighbor average bounded")


def test_criterion_8_oracle_equivalence():
    rng = np.random.default_rng(21)
    worst = 0.0
    for k in range(1000):
        n = int(rng.integers(3, 7))
        game = gen_dense(n, 0.8, int(rng.integers(2, 5)), zero_sum=bool(k % 2), seed=k)
        profile = random_profile(game, rng)
        for i in range(n):
            gap = abs(
                exploitability(game, profile, i)
                - brute_force_exploitability(game, profile, i)
            )
            worst = max(worst, gap)
            if gap > 1e-12:
                report(8, False, f"pair {k} player {i}: gap {gap}")
    for k in range(1000):
        d = int(rng.integers(2, 7))
        v = rng.normal(0.0, 2.0, d)
        proj = project_simplex(v)
        candidates = rng.dirichlet(np.ones(d), size=1000)
        best = np.linalg.norm(candidates - v, axis=1).min()
        if np.linalg.norm(proj - v) > best + 1e-9:
            report(8, False, f"projection beaten on vector {k}")
    report(8, True, f"1000 exploitability pairs (max gap {worst:.2e} <= 1e-12) + 1000 KKT checks")


def test_criterion_9_fixtures():
    for n in (4, 8):
        game, ne = fixture_chain_flip(n)
        if not verify_pure_ne(game, ne):
            report(9, False, f"chain n={n} stated equilibrium not verified")
        flipped, ne_f = fixture_chain_flip(n, flipped=True)
        if not verify_pure_ne(flipped, ne_f):
            report(9, False, f"flipped chain n={n} not verified")
        if [int(np.argmax(v)) for v in ne_f] != [(k + 1) % 2 for k in range(n)]:
            report(9, False, f"flipped chain n={n} equilibrium did not flip")
    base, all_a1 = fixture_triplet_chain(3)
    if not verify_pure_ne(base, all_a1):
        report(9, False, "triplet chain all-a1 not verified")
    changed, ne_c = fixture_triplet_chain(3, changed_triplet=1)
    if best_response(changed, ne_c, 4) != 1 or best_response(changed, ne_c, 5) != 1:
        report(9, False, "changed triplet: players 4,5 do not best-respond a2")
    final = best_response_dynamics(changed).profile
    if [int(np.argmax(final[i])) for i in range(9)] != [0, 0, 0, 0, 1, 1, 0, 0, 0]:
        report(9, False, "best-response dynamics did not flip exactly players 4,5")
    report(9, True, "chain fixtures (n=4,8, both variants) and triplet fixture verified")


def test_criterion_10_rdp_conversion():
    infinite = rdp_to_dp(math.inf, 0.3, 0.5)
    exact = rdp_to_dp(2.0, 1.0, math.exp(-1))
    ok = infinite == 0.3 and exact == 2.0
    report(10, ok, f"alpha=inf -> {infinite}, (2, 1, e^-1) -> {exact} (exact)")


def test_criterion_11_zero_sum_and_monotonicity():
    rng = np.random.default_rng(31)
    worst_res, worst_gap = 0.0, math.inf
    pairs = 0
    for seed in range(4):
        game = (
            gen_dense(16, 0.4, 3, zero_sum=True, seed=seed)
            if seed % 2
            else gen_sparse(24, 2, 3, zero_sum=True, seed=seed)
        )
        for _ in range(250):
            pa, pb = random_profile(game, rng), random_profile(game, rng)
            worst_res = max(
                worst_res,
                abs(zero_sum_residual(game, pa)),
                abs(zero_sum_residual(game, pb)),
            )
            worst_gap = min(worst_gap, monotonicity_gap(game, pa, pb))
            pairs += 1
    ok = worst_res < 1e-9 and worst_gap >= -1e-9 and pairs == 1000
    report(
        11,
        ok,
        f"1000 pairs: max |residual| = {worst_res:.2e} < 1e-9, "
        f"min monotonicity gap = {worst_gap:.2e} >= -1e-9",
    )

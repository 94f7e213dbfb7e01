"""Command-line harness: game generation, runs, privacy audits, N-sweeps, and
the self-check suite.

Subcommands: gen, run, audit, sweep, verify. Every flag can also come from a
key=value config file via --config; explicit flags win. DPEQ_THREADS caps the
sweep worker count. Exit codes: 2 bad flags, 3 gen I/O failure, 4 degenerate
schedule in run, 5 audit without noise, 1 failed verification.
"""

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import graphs, oracle, privacy
from .dynamics import (
    Trace,
    RunConfig,
    coupled_displacement,
    dense_rounds,
    export_trace,
    hyperparams_dense,
    hyperparams_sparse,
    run,
    run_coupled,
    sparse_rounds,
    tau_schedule,
)
from .errors import DegenerateSchedule, ZeroSigma
from .game import (
    avg_clamped_regret,
    avg_exploitability,
    exploitability,
    load_game,
    monotonicity_gap,
    random_profile,
    save_game,
    time_avg_regret,
    validate_game,
    zero_sum_residual,
)
from .privacy import clubsuit, spadesuit, spadesuit_worst_case, theoretical_budget
from .simplex import project_simplex

SWEEP_HEADER = "n,seed,t_rounds,eta,sigma,avg_exploitability,eps_theory,eps_empirical,clubsuit,spadesuit,wall_ms,status"


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except (json.JSONDecodeError, ValueError):
        return raw


def _load_config_defaults(argv):
    """Pull --config FILE out of argv and return (defaults dict, remaining argv)."""
    defaults = {}
    rest = list(argv)
    while "--config" in rest:
        idx = rest.index("--config")
        try:
            path = rest[idx + 1]
        except IndexError:
            raise SystemExit(2)
        del rest[idx : idx + 2]
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, value = line.partition("=")
                defaults[key.strip().replace("-", "_")] = _parse_value(value.strip())
    return defaults, rest


def _int_list(raw: str):
    return [int(x) for x in str(raw).split(",") if x != ""]


def _edge(raw: str):
    i, j = str(raw).split(",")
    return int(i), int(j)


def _workers(n_jobs: int) -> int:
    cap = os.environ.get("DPEQ_THREADS")
    cap = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n_jobs, cap))


def _gen_game(kind, n, p, c, actions, zero_sum, seed):
    if kind == "dense":
        return graphs.gen_dense(n, p, actions, zero_sum, seed)
    if kind == "sparse":
        return graphs.gen_sparse(n, c, actions, zero_sum, seed)
    if kind == "chain":
        return graphs.gen_chain(n, actions, zero_sum, seed)
    raise ValueError(f"unknown kind {kind!r}")


def cmd_gen(args) -> int:
    game = _gen_game(args.kind, args.n, args.p, args.c, args.actions, args.zero_sum, args.seed)
    try:
        save_game(game, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 3
    from .dynamics import harmonic_mean_degree

    print(
        f"n={game.n_players} edges={len(game.edges)} "
        f"nbar={harmonic_mean_degree(game):.6g} n_max={game.max_degree} -> {args.out}"
    )
    return 0


def _schedule(args, game) -> RunConfig:
    """RunConfig from trade-off schedules or manual flags; manual flags win."""
    if args.schedule == "dense":
        p = args.p_exponent if args.p_exponent is not None else args.p
        cfg = hyperparams_dense(game.n_players, p, game.max_actions, clubsuit(game))
    elif args.schedule == "sparse":
        t_rounds = sparse_rounds(game.n_players, game.max_degree)
        spade = spadesuit_worst_case(game, t_rounds)
        cfg = hyperparams_sparse(game.n_players, game.max_degree, game.max_actions, spade)
    else:
        if args.t is None or args.eta is None or args.sigma is None:
            raise DegenerateSchedule("manual schedule needs --t, --eta, and --sigma")
        cfg = RunConfig(eta=args.eta, sigma=args.sigma, t_rounds=args.t)
    if args.t is not None:
        cfg = replace(cfg, t_rounds=args.t)
    if args.eta is not None:
        cfg = replace(cfg, eta=args.eta)
    if args.sigma is not None:
        cfg = replace(cfg, sigma=args.sigma)
    return replace(cfg, tau_constant=args.tau_constant, master_seed=args.seed)


def cmd_run(args) -> int:
    game = load_game(args.game)
    try:
        config = _schedule(args, game)
    except DegenerateSchedule as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    trace = run(game, config)
    stride = max(1, config.t_rounds // 20)
    checkpoints = [
        {"t": t, "avg_exploitability": avg_exploitability(game, trace.profile_at(t))}
        for t in range(1, config.t_rounds + 1)
        if t % stride == 0 or t == config.t_rounds
    ]
    metrics = {
        "t_rounds": config.t_rounds,
        "eta": config.eta,
        "sigma": config.sigma,
        "sigma_sqrt_t": config.sigma * math.sqrt(config.t_rounds),
        "checkpoints": checkpoints,
        "time_avg_regret_per_player": [
            time_avg_regret(game, trace, i) for i in range(game.n_players)
        ],
        "avg_clamped_regret": avg_clamped_regret(game, trace),
    }
    if args.metrics_out:
        with open(args.metrics_out, "w") as fh:
            json.dump(metrics, fh, indent=1)
            fh.write("\n")
    if args.trace_out:
        export_trace(trace, args.trace_out, args.trace_out + ".config.json")
    print(json.dumps({"avg_clamped_regret": metrics["avg_clamped_regret"]}))
    return 0


def cmd_audit(args) -> int:
    game = load_game(args.game)
    try:
        config = _schedule(args, game)
    except DegenerateSchedule as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    if config.sigma == 0.0:
        print("error: auditing needs sigma > 0", file=sys.stderr)
        return 5
    edge = args.edge if args.edge is not None else sorted(game.edges)[0]
    if args.identical:
        adjacent = game
    else:
        adjacent = graphs.resample_edge(game, edge, np.random.default_rng(args.resample_seed))
    report_edge = "worst" if args.spade_edge == "worst" else edge
    try:
        report = privacy.audit(game, adjacent, config, args.alpha, report_edge=report_edge)
    except ZeroSigma as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    payload = {
        "alpha": report.alpha,
        "clubsuit": report.clubsuit,
        "spadesuit": report.spadesuit,
        "t_rounds": report.t_rounds,
        "eta": report.eta,
        "sigma": report.sigma,
        "theoretical_budget": report.theoretical_budget,
        "empirical_budget_avg": report.empirical_budget_avg,
        "audited_edge": list(edge),
        "dp_epsilon_at_delta_1e-6": report.dp_epsilon(1e-6)
        if report.alpha != math.inf and report.alpha > 1
        else None,
    }
    with open(args.out + ".report.json", "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    with open(args.out + ".empirical.csv", "w") as fh:
        fh.write("player,empirical_budget\n")
        for i, b in enumerate(report.empirical_budget_per_player):
            fh.write(f"{i},{float(b)!r}\n")
    print(json.dumps({"empirical_avg": report.empirical_budget_avg, "theory": report.theoretical_budget}))
    return 0


def _sweep_row(kind, n, seed, p, c, actions, zero_sum, alpha, overrides):
    start = time.perf_counter()
    game = _gen_game(kind, n, p, c, actions, zero_sum, seed)
    if kind == "dense":
        config = hyperparams_dense(n, p, actions, clubsuit(game))
    else:
        t_rounds = sparse_rounds(n, game.max_degree)
        config = hyperparams_sparse(n, game.max_degree, actions, spadesuit_worst_case(game, t_rounds))
    for key, value in overrides.items():
        if value is not None:
            config = replace(config, **{key: value})
    config = replace(config, master_seed=seed, record_noise=False)
    trace = run(game, config)
    expl = avg_clamped_regret(game, trace)
    club = clubsuit(game)
    spade = spadesuit_worst_case(game, config.t_rounds)
    eps_theory = alpha * config.eta**2 / config.sigma**2 * min(club, spade) * config.t_rounds
    rng = np.random.default_rng(seed)
    edge = sorted(game.edges)[rng.integers(len(game.edges))]
    adjacent = graphs.resample_edge(game, edge, rng)
    trace_b = run(adjacent, config)
    eps_emp = float(privacy.empirical_budget(trace, trace_b, config.sigma, alpha).mean())
    wall_ms = int((time.perf_counter() - start) * 1000)
    return {
        "n": n,
        "seed": seed,
        "t_rounds": config.t_rounds,
        "eta": config.eta,
        "sigma": config.sigma,
        "avg_exploitability": expl,
        "eps_theory": eps_theory,
        "eps_empirical": eps_emp,
        "clubsuit": club,
        "spadesuit": spade,
        "wall_ms": wall_ms,
        "status": "ok",
    }


def sweep_rows(kind, n_list, seeds, p, c, actions, zero_sum, alpha, overrides=None):
    """One row per (N, seed), deterministic order; failures become status rows."""
    overrides = overrides or {}
    jobs = [(n, seed) for n in n_list for seed in seeds]

    def job(ns):
        n, seed = ns
        try:
            return _sweep_row(kind, n, seed, p, c, actions, zero_sum, alpha, overrides)
        except Exception as exc:  # noqa: BLE001 - row-level isolation
            return {"n": n, "seed": seed, "status": f"error:{type(exc).__name__}"}

    with ThreadPoolExecutor(max_workers=_workers(len(jobs))) as pool:
        return list(pool.map(job, jobs))


def write_sweep_csv(rows, path) -> None:
    columns = SWEEP_HEADER.split(",")
    with open(path, "w") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for row in rows:
            cells = []
            for col in columns:
                value = row.get(col, "")
                cells.append(repr(value) if isinstance(value, float) else str(value))
            fh.write(",".join(cells) + "\n")


def cmd_sweep(args) -> int:
    overrides = {"t_rounds": args.t, "eta": args.eta, "sigma": args.sigma}
    rows = sweep_rows(
        args.kind, args.n, args.seeds, args.p, args.c, args.actions, args.zero_sum,
        args.alpha, overrides,
    )
    write_sweep_csv(rows, args.out)
    n_ok = sum(1 for r in rows if r["status"] == "ok")
    print(f"{n_ok}/{len(rows)} rows ok -> {args.out}")
    return 0 if n_ok else 1


def _verify_checks():
    """Reduced-scale acceptance checks; yields (name, passed, detail)."""
    corrupt = bool(os.environ.get("DPEQ_FIXTURE_CORRUPT"))

    def chain_fixtures():
        for n in (4, 8):
            game, ne = graphs.fixture_chain_flip(n)
            if corrupt:
                game.utilities[(0, 1)] = game.utilities[(0, 1)][::-1].copy()
            if not oracle.verify_pure_ne(game, ne):
                return False, f"chain fixture n={n}"
            game_f, ne_f = graphs.fixture_chain_flip(n, flipped=True)
            if not oracle.verify_pure_ne(game_f, ne_f):
                return False, f"flipped fixture n={n}"
        return True, ""

    def triplet_fixture():
        game, ne = graphs.fixture_triplet_chain(3)
        if not oracle.verify_pure_ne(game, ne):
            return False, "base triplet"
        changed, ne_c = graphs.fixture_triplet_chain(3, changed_triplet=1)
        if not oracle.verify_pure_ne(changed, ne_c):
            return False, "changed triplet equilibrium"
        final = oracle.best_response_dynamics(changed).profile
        flips = [int(np.argmax(final[i])) for i in (4, 5)]
        return flips == [1, 1], f"players 4,5 play {flips}"

    def projection_kkt():
        rng = np.random.default_rng(0)
        for _ in range(200):
            d = int(rng.integers(2, 7))
            v = rng.normal(0, 2, d)
            proj = project_simplex(v)
            for _ in range(20):
                x = rng.dirichlet(np.ones(d))
                if np.linalg.norm(proj - v) > np.linalg.norm(x - v) + 1e-9:
                    return False, f"{v} beaten by {x}"
        return True, ""

    def oracle_equivalence():
        rng = np.random.default_rng(1)
        for k in range(100):
            game = graphs.gen_dense(5, 0.7, 3, zero_sum=bool(k % 2), seed=k)
            profile = random_profile(game, rng)
            for i in range(game.n_players):
                a = exploitability(game, profile, i)
                b = oracle.brute_force_exploitability(game, profile, i)
                if abs(a - b) > 1e-12:
                    return False, f"game {k} player {i}: {a} vs {b}"
        return True, ""

    def tau_identities():
        for k in range(20):
            game = graphs.gen_sparse(40, 3, 2, seed=k)
            sched = tau_schedule(game)
            lhs = float(np.mean(sched.tau))
            if abs(lhs - sched.constant / sched.nbar) > 1e-12:
                return False, f"mean identity off at seed {k}"
            nb_avg = np.mean(
                [
                    np.mean([sched.tau[j] for j in game.neighbors(i)])
                    for i in range(game.n_players)
                ]
            )
            if nb_avg > sched.constant / sched.nbar + 1e-12:
                return False, f"neighbor inequality off at seed {k}"
        return True, ""

    def zero_sum_checks():
        rng = np.random.default_rng(2)
        game = graphs.gen_dense(12, 0.5, 3, zero_sum=True, seed=5)
        for _ in range(100):
            pa, pb = random_profile(game, rng), random_profile(game, rng)
            if abs(zero_sum_residual(game, pa)) > 1e-9:
                return False, "residual"
            if monotonicity_gap(game, pa, pb) < -1e-9:
                return False, "monotonicity"
        return True, ""

    def coupled_equality():
        game = graphs.gen_chain(16, 2, zero_sum=True, seed=3)
        adjacent = graphs.resample_edge(game, (0, 1), np.random.default_rng(9))
        config = RunConfig(eta=0.2, sigma=0.4, t_rounds=6, master_seed=7)
        trace_a, trace_b = run_coupled(game, adjacent, config)
        dist = graphs.bfs_distances(game, (0, 1))
        for i in range(game.n_players):
            horizon = min(config.t_rounds, int(dist[i]) if np.isfinite(dist[i]) else config.t_rounds)
            for t in range(1, horizon + 1):
                if not np.array_equal(trace_a.clean[t - 1, i], trace_b.clean[t - 1, i]):
                    return False, f"player {i} diverged at t={t} < dist {dist[i]}"
        return True, ""

    def variation_bound():
        steps = 2000
        ga = np.tile([1.0, -1.0], (steps, 1))
        for tau in (0.1, 1.0, 10.0):
            gaps = coupled_displacement(2, 0.5, tau, 0.3, steps, 5, ga, -ga)
            if gaps.max() > 2.0 * math.sqrt(2) / tau + 1e-9:
                return False, f"tau={tau}"
        return True, ""

    def audit_soundness():
        for kind, seed in [("dense", 0), ("dense", 1), ("sparse", 0), ("sparse", 1)]:
            if kind == "dense":
                game = graphs.gen_dense(32, 0.3, 4, seed=seed)
                config = hyperparams_dense(32, 0.3, 4, clubsuit(game))
            else:
                game = graphs.gen_sparse(64, 2, 4, seed=seed)
                t_rounds = sparse_rounds(64, game.max_degree)
                config = hyperparams_sparse(
                    64, game.max_degree, 4, spadesuit_worst_case(game, t_rounds)
                )
            config = replace(config, master_seed=seed)
            edge = sorted(game.edges)[0]
            adjacent = graphs.resample_edge(game, edge, np.random.default_rng(seed))
            for alpha in (1.0, 2.0, 10.0):
                report = privacy.audit(game, adjacent, config, alpha, report_edge=edge)
                if report.empirical_budget_avg > report.theoretical_budget + 1e-9:
                    return False, f"{kind} seed {seed} alpha {alpha}"
        return True, ""

    def rdp_conversion():
        exact = privacy.rdp_to_dp(2.0, 1.0, math.exp(-1))
        return (
            privacy.rdp_to_dp(math.inf, 0.3, 0.5) == 0.3 and exact == 2.0,
            f"got {exact}",
        )

    def determinism():
        game = graphs.gen_dense(10, 0.5, 3, seed=4)
        config = RunConfig(eta=0.1, sigma=0.2, t_rounds=4, master_seed=11)
        a, b = run(game, config), run(game, config)
        return np.array_equal(a.clean, b.clean) and np.array_equal(a.noises, b.noises), ""

    yield "chain fixtures (both variants)", chain_fixtures
    yield "triplet fixture + adjacent flip", triplet_fixture
    yield "projection KKT oracle", projection_kkt
    yield "exploitability oracle equivalence", oracle_equivalence
    yield "tau schedule identities", tau_identities
    yield "zero-sum residual + monotonicity", zero_sum_checks
    yield "coupled sparse equality", coupled_equality
    yield "regularized variation bound", variation_bound
    yield "audit soundness (alpha 1,2,10)", audit_soundness
    yield "RDP to DP conversion", rdp_conversion
    yield "bitwise determinism", determinism


def cmd_verify(args) -> int:
    start = time.perf_counter()
    failures = 0
    for name, check in _verify_checks():
        try:
            ok, detail = check()
        except Exception as exc:  # noqa: BLE001 - report, keep checking
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        mark = "ok" if ok else "FAIL"
        suffix = f" ({detail})" if detail and not ok else ""
        print(f"[{mark}] {name}{suffix}")
        failures += not ok
    elapsed = time.perf_counter() - start
    print(f"{failures} failure(s) in {elapsed:.1f}s")
    if elapsed > 300:
        print("warning: verify exceeded the 5-minute budget", file=sys.stderr)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpeq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a game file")
    gen.add_argument("--kind", choices=["dense", "sparse", "chain"], required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=float, default=0.25)
    gen.add_argument("--c", type=int, default=2)
    gen.add_argument("--actions", type=int, default=2)
    gen.add_argument("--zero-sum", action="store_true")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    def add_run_flags(p):
        p.add_argument("--game", required=True)
        p.add_argument("--schedule", choices=["dense", "sparse", "manual"], default="manual")
        p.add_argument("--p-exponent", type=float, default=None)
        p.add_argument("--p", type=float, default=0.25)
        p.add_argument("--t", type=int, default=None)
        p.add_argument("--eta", type=float, default=None)
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--tau-constant", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)

    runp = sub.add_parser("run", help="run the dynamics on a game file")
    add_run_flags(runp)
    runp.add_argument("--trace-out", default=None)
    runp.add_argument("--metrics-out", default=None)
    runp.set_defaults(func=cmd_run)

    auditp = sub.add_parser("audit", help="coupled privacy audit of one edge")
    add_run_flags(auditp)
    auditp.add_argument("--edge", type=_edge, default=None)
    auditp.add_argument("--alpha", type=float, default=2.0)
    auditp.add_argument("--resample-seed", type=int, default=0)
    auditp.add_argument("--identical", action="store_true")
    auditp.add_argument("--spade-edge", choices=["worst", "audited"], default="worst")
    auditp.add_argument("--out", required=True)
    auditp.set_defaults(func=cmd_audit)

    sweep = sub.add_parser("sweep", help="N-sweep reproducing the scaling figures")
    sweep.add_argument("--kind", choices=["dense", "sparse"], required=True)
    sweep.add_argument("--n", type=_int_list, required=True)
    sweep.add_argument("--p", type=float, default=0.25)
    sweep.add_argument("--c", type=int, default=2)
    sweep.add_argument("--actions", type=int, default=4)
    sweep.add_argument("--zero-sum", action="store_true")
    sweep.add_argument("--seeds", type=_int_list, default=list(range(10)))
    sweep.add_argument("--alpha", type=float, default=2.0)
    sweep.add_argument("--t", type=int, default=None)
    sweep.add_argument("--eta", type=float, default=None)
    sweep.add_argument("--sigma", type=float, default=None)
    sweep.add_argument("--out", required=True)
    sweep.set_defaults(func=cmd_sweep)

    verify = sub.add_parser("verify", help="run the reduced acceptance checks")
    verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    defaults, argv = _load_config_defaults(argv)
    parser = build_parser()
    if defaults:
        for subparser in parser._subparsers._group_actions[0].choices.values():
            covered = {}
            for action in subparser._actions:
                if action.dest in defaults:
                    covered[action.dest] = defaults[action.dest]
                    action.required = False
            subparser.set_defaults(**covered)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

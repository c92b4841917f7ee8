"""Acceptance suite: one PASS/FAIL line per criterion, with timings.

Run with ``pytest -v tests/test_acceptance.py -s`` to see the lines live; they
are also repeated in the terminal summary.
"""

import functools
import math
import time

import mpmath
import numpy as np

from qmatfun import cli
from qmatfun import divergence as dv
from qmatfun import funcapprox as fa
from qmatfun import functions as F
from qmatfun import means as mn
from qmatfun import resources as rs
from qmatfun import validation as vl
from qmatfun.matcore import format_matrix, opnorm, parse_matrix, random_density, random_psd

# tolerances
KL_TOL = 1e-10
FIXTURE_TOL = 1e-6
PIPELINE_TOL = 1e-3
ROUTE_AGREEMENT = 2e-3
LOG_TOL = 1e-6
DECAY_RATIO = 0.5
MEAN_TOL = 1e-4
IDEMPOTENCY_TOL = 1e-8
MEAN_SLACK = -1e-8
DIVERGENCE_SLACK = 1e-9
SLOPE_FACTOR = 4.0

# runtime budgets (seconds)
BUDGET_ORACLE = 1.0
BUDGET_ROUTE1 = 60.0
BUDGET_ROUTE2 = 300.0
BUDGET_MEANS = 300.0

KL_FIXTURE = 0.1308120
CHI_FIXTURE = 0.25
N_PIPELINE = 25
N_MEAN_PAIRS = 20


def _verdict(log, number, title, ok, detail, elapsed):
    log(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail} "
        f"({elapsed:.2f} s)")
    return ok


def _mp_kl(p, q):
    return float(mpmath.fsum(mpmath.mpf(a) * mpmath.log(mpmath.mpf(a) / mpmath.mpf(b))
                             for a, b in zip(p, q)))


def _pipeline_pair(k):
    """Dim-8 pair number `k`; sigma's condition number sweeps [2, 8]."""
    kappa = 2.0 + 6.0 * k / (N_PIPELINE - 1)
    return vl.random_state_pair(8, kappa, seed=1000 + k)


@functools.lru_cache(maxsize=None)
def _route1_results():
    t0 = time.perf_counter()
    reps = [dv.xlogx_route1(*_pipeline_pair(k), PIPELINE_TOL) for k in range(N_PIPELINE)]
    return reps, time.perf_counter() - t0


def _mean_pair(k):
    A = random_psd(8, 0.15, seed=2000 + 2 * k)
    B = random_psd(8, 0.15, seed=2001 + 2 * k)
    return A / opnorm(A), B / opnorm(B)


def _min_eig(M):
    return float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0])


def test_criterion_01_oracle(acceptance_log):
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(50):
        dim = (2, 4, 8)[k % 3]
        rng = np.random.default_rng(k)
        p = rng.dirichlet(np.ones(dim))
        q = rng.dirichlet(np.ones(dim))
        got = dv.oracle_divergence(np.diag(p), np.diag(q), "xlogx")
        worst = max(worst, abs(got - _mp_kl(p, q)))
    fx = vl.load_fixtures()
    fix = dv.oracle_divergence(fx["commuting_rho"], fx["commuting_sigma"], "xlogx")
    elapsed = time.perf_counter() - t0
    ok = worst <= KL_TOL and abs(fix - KL_FIXTURE) <= FIXTURE_TOL and elapsed < BUDGET_ORACLE
    assert _verdict(acceptance_log, 1, "oracle vs classical KL",
                    ok, f"max dev {worst:.1e}, fixture {fix:.7f}", elapsed)


def test_criterion_02_route1(acceptance_log):
    reps, elapsed = _route1_results()
    worst = max(r.error for r in reps)
    kmax = max(r.gamma.kappa_sigma for r in reps)
    ok = worst <= PIPELINE_TOL and kmax <= 8 + 1e-9 and elapsed < BUDGET_ROUTE1
    assert _verdict(acceptance_log, 2, "route 1 on 25 dim-8 pairs",
                    ok, f"max |err| {worst:.2e}, max kappa_sigma {kmax:.2f}", elapsed)


def test_criterion_03_route2(acceptance_log):
    r1, _ = _route1_results()
    t0 = time.perf_counter()
    reps = [dv.xlogx_route2(*_pipeline_pair(k), PIPELINE_TOL) for k in range(N_PIPELINE)]
    elapsed = time.perf_counter() - t0
    worst = max(r.error for r in reps)
    gap = max(abs(a.estimate - b.estimate) for a, b in zip(r1, reps))
    ok = worst <= PIPELINE_TOL and gap <= ROUTE_AGREEMENT and elapsed < BUDGET_ROUTE2
    assert _verdict(acceptance_log, 3, "route 2 and route agreement",
                    ok, f"max |err| {worst:.2e}, max |R1-R2| {gap:.2e}", elapsed)


def test_criterion_04_general_convex(acceptance_log):
    t0 = time.perf_counter()
    specs = (F.chi_square(), F.power_alpha(0.5), F.kl_form())
    worst = {}
    for f in specs:
        worst[f.label] = max(dv.general_convex(*_pipeline_pair(k), f, PIPELINE_TOL).error
                             for k in range(N_PIPELINE))
    fx = vl.load_fixtures()
    chi = dv.general_convex(fx["commuting_rho"], fx["commuting_sigma"], F.chi_square(), 1e-7)
    elapsed = time.perf_counter() - t0
    ok = (all(v <= PIPELINE_TOL for v in worst.values())
          and abs(chi.oracle - CHI_FIXTURE) <= FIXTURE_TOL
          and abs(chi.estimate - CHI_FIXTURE) <= FIXTURE_TOL)
    detail = ", ".join(f"{k}: {v:.1e}" for k, v in worst.items())
    assert _verdict(acceptance_log, 4, "general convex generators", ok,
                    f"{detail}; chi fixture {chi.estimate:.7f}", elapsed)


def test_criterion_05_log_approximations(acceptance_log):
    t0 = time.perf_counter()
    beta, eps = 1 / 16, LOG_TOL
    grid = np.geomspace(beta, 1.0, 4001)
    target = np.log(grid) / (2 * math.log(beta))
    p = fa.log_poly(beta, eps)
    err_poly = float(np.max(np.abs(p(grid) - target)))
    r = fa.log_stieltjes(beta, eps, weighted=False)
    err_quad = float(np.max(np.abs(r(grid) - 2 * target)))
    consts = []
    for b in (1 / 4, 1 / 16, 1 / 64):
        for e in (1e-4, 1e-6, 1e-8):
            m = fa.log_stieltjes(b, e, weighted=False).m
            consts.append(m / (math.log(1 / b) * math.log(1 / e)))
    C = max(consts)
    errs = []
    for m in (4, 8, 16, 32):
        q = fa.log_resolvent(beta, m, weighted=False)
        errs.append(float(np.max(np.abs(q(grid) - 2 * target))))
    ratios = [b / a for a, b in zip(errs, errs[1:])]
    elapsed = time.perf_counter() - t0
    ok = (err_poly <= eps and err_quad <= eps and all(x <= DECAY_RATIO for x in ratios)
          and r.m <= C * math.log(1 / beta) * math.log(1 / eps))
    assert _verdict(acceptance_log, 5, "log approximations at beta=1/16", ok,
                    f"poly deg {p.degree} err {err_poly:.1e}, quadrature m {r.m} err "
                    f"{err_quad:.1e}, fitted C {C:.3f} (spread {min(consts):.3f}-{C:.3f}), "
                    f"ratios {', '.join(f'{x:.1e}' for x in ratios)}", elapsed)


def test_criterion_06_ledger(acceptance_log):
    t0 = time.perf_counter()
    ops = set()
    bad = 0
    for seed in range(100):
        tree = vl.random_composition_tree(seed, max_depth=6)
        bad += len(vl.ledger_violations(tree))
        ops.update(n.label.split("[")[0].split("(")[0] for n in tree.walk())
    elapsed = time.perf_counter() - t0
    ok = bad == 0
    assert _verdict(acceptance_log, 6, "ledger soundness on 100 trees", ok,
                    f"{bad} violations, {len(ops)} node kinds", elapsed)


def test_criterion_07_means(acceptance_log):
    t0 = time.perf_counter()
    worst_mix = worst_st = 0.0
    for k in range(N_MEAN_PAIRS):
        A, B = _mean_pair(k)
        worst_mix = max(worst_mix, mn.harmonic_mixture_mean(A, B, "geometric", 0.1, 1e-5,
                                                             m=32).error)
        worst_st = max(worst_st, mn.stieltjes_mean(A, B, "geometric", 0.1, 1e-5).error)
    A, B = _mean_pair(0)
    ar = mn.stieltjes_mean(A, B, F.arithmetic(0.5), 0.1, 1e-6)
    tabled = [F.arithmetic(0.5), F.harmonic(0.5), F.geometric(0.5), F.logarithmic(),
              F.heinz(0.3), F.power_mean(0.5, 0.5), F.power_mean(-0.5, 0.5)]
    idem = 0.0
    for f in tabled:
        for method in ("harmonic_mixture", "stieltjes"):
            rep = mn.compute_mean(A, A, f, method, 0.1, 1e-9)
            idem = max(idem, opnorm(rep.result - A))
    elapsed = time.perf_counter() - t0
    ok = (worst_mix <= MEAN_TOL and worst_st <= MEAN_TOL and ar.error <= ar.ledger_bound
          and idem <= IDEMPOTENCY_TOL and elapsed < BUDGET_MEANS)
    assert _verdict(acceptance_log, 7, "Kubo-Ando pipelines on 20 8x8 pairs", ok,
                    f"mixture {worst_mix:.1e}, Stieltjes {worst_st:.1e}, arithmetic "
                    f"{ar.error:.1e} <= ledger {ar.ledger_bound:.1e}, idempotency {idem:.1e}",
                    elapsed)


def test_criterion_08_mean_axioms(acceptance_log):
    t0 = time.perf_counter()
    specs = [F.geometric(0.5), F.logarithmic(), F.heinz(0.3), F.power_mean(0.5, 0.5),
             F.power_mean(-0.5, 0.5)]
    worst = {"normalization": 0.0, "monotonicity": np.inf, "transformer": 0.0,
             "ordering": np.inf, "riccati": 0.0}
    for trial in range(30):
        rng = np.random.default_rng(3000 + trial)
        A = random_psd(4, 0.2, seed=int(rng.integers(2**31)))
        B = random_psd(4, 0.2, seed=int(rng.integers(2**31)))
        P = random_psd(4, 0.1, seed=int(rng.integers(2**31))) * 0.1
        C = rng.standard_normal((4, 4)) + 4 * np.eye(4)
        H = mn.oracle_mean(A, B, F.harmonic(0.5))
        M = mn.oracle_mean(A, B, F.arithmetic(0.5))
        for f in specs:
            S = mn.oracle_mean(A, B, f)
            worst["normalization"] = max(worst["normalization"],
                                         opnorm(mn.oracle_mean(np.eye(4), np.eye(4), f)
                                                - np.eye(4)))
            worst["monotonicity"] = min(worst["monotonicity"],
                                        _min_eig(mn.oracle_mean(A + P, B + P, f) - S))
            T = mn.oracle_mean(C @ A @ C.T, C @ B @ C.T, f)
            worst["transformer"] = max(worst["transformer"],
                                       opnorm(T - C @ S @ C.T) / opnorm(T))
            worst["ordering"] = min(worst["ordering"], _min_eig(S - H), _min_eig(M - S))
        G = mn.oracle_mean(A, B, "geometric")
        worst["riccati"] = max(worst["riccati"], opnorm(G @ np.linalg.inv(A) @ G - B))
    elapsed = time.perf_counter() - t0
    ok = (worst["normalization"] <= -MEAN_SLACK and worst["monotonicity"] >= MEAN_SLACK
          and worst["transformer"] <= -MEAN_SLACK and worst["ordering"] >= MEAN_SLACK
          and worst["riccati"] <= -MEAN_SLACK)
    assert _verdict(acceptance_log, 8, "operator-mean axioms (30 trials)", ok,
                    ", ".join(f"{k} {v:.1e}" for k, v in worst.items()), elapsed)


def test_criterion_09_divergence_axioms(acceptance_log):
    t0 = time.perf_counter()
    gens = ("xlogx", "chi_square", "kl_form")
    neg = mono = conv = -np.inf
    for trial in range(50):
        rng = np.random.default_rng(4000 + trial)
        seeds = [int(s) for s in rng.integers(0, 2**31, size=5)]
        r1, s1 = vl.random_state_pair(4, 4.0, seed=seeds[0])
        r2, s2 = vl.random_state_pair(4, 4.0, seed=seeds[1])
        ch = vl.random_channel((2, 2), int(rng.integers(2)), seed=seeds[2])
        lam = float(rng.uniform(0.1, 0.9))
        for f in gens:
            d1 = dv.oracle_divergence(r1, s1, f)
            d2 = dv.oracle_divergence(r2, s2, f)
            neg = max(neg, -d1)
            mono = max(mono, dv.oracle_divergence(ch(r1), ch(s1), f) - d1)
            mix = dv.oracle_divergence(lam * r1 + (1 - lam) * r2, lam * s1 + (1 - lam) * s2, f)
            conv = max(conv, mix - (lam * d1 + (1 - lam) * d2))
    elapsed = time.perf_counter() - t0
    ok = max(neg, mono, conv) <= DIVERGENCE_SLACK
    assert _verdict(acceptance_log, 9, "divergence axioms (50 trials)", ok,
                    f"worst excess: nonneg {neg:.1e}, CPTP {mono:.1e}, convexity {conv:.1e}",
                    elapsed)


def test_criterion_10_resource_slopes(acceptance_log):
    t0 = time.perf_counter()
    sigma = np.eye(8) / 8
    kg, q1 = [], []
    for k in (4.0, 8.0, 16.0):
        rep = dv.xlogx_route1(random_density(8, k, seed=1), sigma, PIPELINE_TOL)
        kg.append(rep.gamma.kappa_gamma)
        q1.append(rep.encoding.queries.total)
    rec1 = rs.reconcile("divergence.route1.purification", "kappa_gamma", kg, q1,
                        kappa_sigma=1.0, eps=PIPELINE_TOL, N=8, T=1.0)
    inv_delta, q2 = [], []
    for delta in (0.4, 0.2, 0.1):
        A = random_psd(8, delta, seed=5001)
        B = random_psd(8, delta, seed=5002)
        rep = mn.stieltjes_mean(A / opnorm(A), B / opnorm(B), "geometric", delta, 1e-4)
        inv_delta.append(1 / delta)
        q2.append(rep.encoding.queries.total)
    rec2 = rs.reconcile("means.theorem", "delta", inv_delta, q2, transform=lambda x: 1 / x,
                        C_A=1.0, C_B=1.0, eps=1e-4)
    elapsed = time.perf_counter() - t0
    ok = rec1.within(SLOPE_FACTOR) and rec2.within(SLOPE_FACTOR)
    print("\n" + rec1.table() + rec2.table())
    assert _verdict(acceptance_log, 10, "resource slopes", ok,
                    f"route 1 vs kappa_gamma {rec1.measured_slope:.2f}/"
                    f"{rec1.predicted_slope:.2f} (ratio {rec1.slope_ratio:.2f}), Stieltjes "
                    f"vs 1/delta {rec2.measured_slope:.2f}/{rec2.predicted_slope:.2f} "
                    f"(ratio {rec2.slope_ratio:.2f})", elapsed)


def test_criterion_11_determinism(acceptance_log, tmp_path, capsys):
    t0 = time.perf_counter()
    code = cli.main(["validate"])
    fx = vl.fixture_dir()
    runs = []
    for k in range(2):
        out = tmp_path / f"r{k}.kv"
        cli.main(["divergence", "--rho", f"{fx}/commuting_rho.mat", "--sigma",
                  f"{fx}/commuting_sigma.mat", "--route", "2", "--noise", "--seed", "7",
                  "--out", str(out)])
        runs.append(out.read_bytes())
        out = tmp_path / f"m{k}.kv"
        cli.main(["mean", "--A", f"{fx}/geometric_A.mat", "--B", f"{fx}/geometric_B.mat",
                  "--method", "stieltjes", "--delta", "0.2", "--out", str(out)])
        runs.append(out.read_bytes())
    capsys.readouterr()
    identical = runs[0] == runs[2] and runs[1] == runs[3]
    rng = np.random.default_rng(6000)
    exact = True
    for _ in range(200):
        M = (rng.standard_normal((3, 3)) * 10.0 ** rng.integers(-300, 300, size=(3, 3))
             + 1j * rng.standard_normal((3, 3)))
        exact &= np.array_equal(parse_matrix(format_matrix(M)), M)
    elapsed = time.perf_counter() - t0
    ok = code == 0 and identical and bool(exact)
    assert _verdict(acceptance_log, 11, "determinism and format", ok,
                    f"validate exit {code}, reports identical {identical}, "
                    f"round-trip exact {bool(exact)}", elapsed)

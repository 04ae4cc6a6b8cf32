"""One test per acceptance criterion, each at its stated tolerance and time budget."""

import json
import math
import time
from fractions import Fraction

import numpy as np

from bilinlab.apply import BilinearOperator, apply_fast_difference, apply_fast_general, apply_naive
from bilinlab.cli import RunManifest, identity_suite, main
from bilinlab.grid import Grid, SampledFn
from bilinlab.locall2 import contradiction_chain_report, gaussian, measure_dispersive_decay
from bilinlab.symbols import Difference, ExponentTriple, General, linear_phase, piecewise_linear_phase, quadratic_phase
from bilinlab.transference import (
    dirichlet_poly,
    fit_growth_exponent,
    oscillation_contradiction_report,
    pairing_identity_check,
)
from bilinlab.witness import ShiftWitness, best_shift_ratio, blowup_curve, certify_lower_bound, integer_shift_slopes


def T(p, q, r):
    return ExponentTriple.from_fractions(p, q, r)


def test_criterion_1_shift_witness_exactness(report_criterion):
    start = time.perf_counter()
    grid = Grid(4096, 0.5)
    worst = 0.0
    triples = [T(1, 2, Fraction(2, 3)), T(Fraction(4, 3), 4, 1), T(6, 6, 3)]
    for t in triples:
        for K in range(1, 17):
            w = ShiftWitness(tuple(40 * k * grid.spacing for k in range(K)), 1.0, 8 * grid.spacing, grid)
            expected = max(K ** (t.inv_p - 0.5), K ** (t.inv_q - 0.5))
            worst = max(worst, abs(best_shift_ratio(w, t).lower_bound / expected - 1))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 5
    report_criterion(1, "shift-witness ratios", ok, f"max rel err {worst:.2e}, {elapsed:.2f}s (< 5s)")
    assert ok


def test_criterion_2_piecewise_linear_certificates(report_criterion):
    start = time.perf_counter()
    grid = Grid(1024, 0.5)
    t = T(1, 2, Fraction(2, 3))
    ratios = {}
    for K in (2, 4, 8):
        phase = piecewise_linear_phase(integer_shift_slopes(K, 1.0, grid))
        ratios[K] = certify_lower_bound(phase, 1.0, K, t, grid).lower_bound / math.sqrt(K)
    elapsed = time.perf_counter() - start
    ok = min(ratios.values()) >= 0.999 and elapsed < 30
    detail = ", ".join(f"K={K}: {v:.6f} sqrt(K)" for K, v in ratios.items())
    report_criterion(2, "piecewise-linear certificates", ok, f"{detail}, {elapsed:.2f}s (< 30s)")
    assert ok


def test_criterion_3_blowup_curve(report_criterion):
    t = T(1, 2, Fraction(2, 3))
    lambdas = [2.0**j for j in range(4, 11)]
    quad = blowup_curve(quadratic_phase(), t, lambdas)
    certs = [r.certificate for r in quad]
    growth = certs[-1] / certs[0]
    # rows may dip only where a snap error was recorded
    dips = [i for i in range(1, len(certs)) if certs[i] < certs[i - 1]]
    monotone = all(quad[i].snap_error > 0 for i in dips)
    lin = blowup_curve(linear_phase(1.0), t, lambdas)
    flat = all(0.99 <= r.certificate <= 1.01 for r in lin)
    ok = growth >= 2 and monotone and flat
    detail = (
        f"quadratic {certs[0]:.4f} -> {certs[-1]:.4f} (x{growth:.2f}, K {quad[0].K}->{quad[-1].K}), "
        f"dips {len(dips)}, linear in [{min(r.certificate for r in lin):.5f}, {max(r.certificate for r in lin):.5f}]"
    )
    report_criterion(3, "blow-up curve", ok, detail)
    assert ok


def test_criterion_4_identity_suite(report_criterion):
    start = time.perf_counter()
    names = ("parallelogram", "qfact", "lsigma", "adjoint1", "adjoint2")
    reports = identity_suite(names, [16, 64, 256], 50, seed=0)
    elapsed = time.perf_counter() - start
    worst = max(r["max_residual"] for r in reports)
    counts = all(r["instances"] == 50 for r in reports if r["identity"] != "parallelogram")
    ok = worst <= 1e-10 and counts and elapsed < 60
    report_criterion(4, "identity suite", ok, f"max residual {worst:.2e} over {len(reports)} (check, N) cells, {elapsed:.2f}s (< 60s)")
    assert ok


def test_criterion_5_dispersive_slopes(report_criterion):
    grid = Grid(4096, 128 / 4096)
    f = gaussian(grid, 1.0)
    times = np.geomspace(0.5, 30, 25)
    slopes, oracle_dev = {}, 0.0
    for p in (2, 4, math.inf):
        table = measure_dispersive_decay(f, p, times, sigma=1.0)
        slopes[p] = table.slope
        oracle_dev = max(oracle_dev, max(abs(r[1] / r[3] - 1) for r in table.rows))
    chains = {tt: contradiction_chain_report(T(*tt), times, grid=grid).exponent for tt in ((2, 2, 1), (4, 4, 2))}
    slope_ok = all(abs(slopes[p] - ((0 if math.isinf(p) else 1 / p) - 0.5)) <= 0.05 for p in slopes)
    chain_ok = all(abs(e + 0.5) <= 0.1 for e in chains.values())
    ok = slope_ok and chain_ok and oracle_dev <= 0.02
    detail = (
        "slopes " + ", ".join(f"p={p}: {s:+.4f}" for p, s in slopes.items())
        + "; chain " + ", ".join(f"{k}: {v:+.4f}" for k, v in chains.items())
        + f"; oracle dev {oracle_dev:.2e}"
    )
    report_criterion(5, "dispersive slopes", ok, detail)
    assert ok


def test_criterion_6_transference(report_criterion):
    rng = np.random.default_rng(6)
    worst = 0.0
    for K in list(range(1, 17)) + [32, 64, 128, 200, 256]:
        vals = rng.standard_normal(K) + 1j * rng.standard_normal(K)
        worst = max(worst, pairing_identity_check(vals, rng.choice([-1.0, 1.0], K), 4 * K).residual)
    Ks = [8, 16, 32, 64, 128, 256]
    expos = {p: fit_growth_exponent(Ks, [dirichlet_poly(K).norm(p) for K in Ks])[0] for p in (3, 4, 6)}
    expo_ok = all(abs(e - (1 - 1 / p)) <= 0.05 for p, e in expos.items())
    cross = oscillation_contradiction_report(T(Fraction(3, 2), math.inf, Fraction(3, 2)), 0.5)
    bound = oscillation_contradiction_report(T(2, math.inf, 2), 0.5)
    ok = worst <= 1e-10 and expo_ok and cross.crossover is not None and bound.status == "boundary"
    detail = (
        f"pairing residual {worst:.2e}; Dirichlet exponents "
        + ", ".join(f"p={p}: {e:.4f}" for p, e in expos.items())
        + f"; p=3/2 crossover K={cross.crossover}; p=2 status '{bound.status}'"
    )
    report_criterion(6, "transference", ok, detail)
    assert ok


def test_criterion_7_fast_paths(report_criterion, tmp_path, capsys):
    rng = np.random.default_rng(7)
    worst = 0.0
    for n in (2, 3, 4, 5, 8, 16, 31, 32, 64):
        g = Grid(n)
        for _ in range(20):
            f = SampledFn(g, rng.standard_normal(n) + 1j * rng.standard_normal(n))
            h = SampledFn(g, rng.standard_normal(n) + 1j * rng.standard_normal(n))
            gen = BilinearOperator(General(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))), g)
            vals = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            dif = BilinearOperator(Difference(lambda u, v=vals, n=n: v[np.asarray(u) % n]), g)
            worst = max(
                worst,
                np.abs(apply_fast_general(gen, f, h).values - apply_naive(gen, f, h).values).max(),
                np.abs(apply_fast_difference(dif, f, h).values - apply_naive(dif, f, h).values).max(),
            )
    code = main(["bench", "--n-list", "256", "--repeats", "3", "--out-dir", str(tmp_path)])
    capsys.readouterr()
    timings = RunManifest.load(tmp_path / "bench.manifest.json").extra["timings"]
    speedup = timings[0][4]
    ok = worst <= 1e-10 and speedup >= 20 and code == 0
    report_criterion(7, "fast paths", ok, f"max deviation {worst:.2e} (N <= 64); N=256 speedup x{speedup:.1f} (>= 20, in manifest)")
    assert ok


def test_criterion_8_replay_determinism(report_criterion, tmp_path, capsys):
    runs = [
        ["classify", "--p", "6", "--q", "6", "--r", "3"],
        ["certify", "--p", "1", "--q", "2", "--r", "2/3", "--points", "4"],
        ["blowup", "--p", "1", "--q", "2", "--r", "0.6667", "--lambda-min", "16", "--lambda-max", "256", "--steps", "3", "--n", "16384"],
        ["search", "--p", "2", "--q", "2", "--r", "1", "--n", "8", "--seed", "3"],
        ["identities", "--n-list", "16", "--instances", "5", "--seed", "2"],
        ["dispersive", "--p", "2,4,inf"],
        ["chain", "--p", "4", "--q", "4", "--r", "2"],
        ["transference", "--K-max", "64", "--seed", "5"],
        ["bench", "--n-list", "32"],
    ]
    compared, mismatched = 0, []
    for i, argv in enumerate(runs):
        first = tmp_path / f"run{i}"
        assert main([*argv, "--out-dir", str(first)]) == 0
        capsys.readouterr()
        manifest = first / f"{argv[0]}.manifest.json"
        code = main(["replay", "--manifest", str(manifest), "--out-dir", str(tmp_path / f"replay{i}")])
        result = json.loads(capsys.readouterr().out)
        if code != 0:
            mismatched.append(f"{argv[0]} (exit {code})")
        for name, same in result["identical"].items():
            compared += name.endswith(".csv")
            if not same:
                mismatched.append(name)
    ok = not mismatched and compared >= 5
    report_criterion(8, "replay determinism", ok, f"{compared} CSV bodies compared bitwise, mismatches: {mismatched or 'none'}")
    assert ok

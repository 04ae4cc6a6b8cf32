"""Command-line driver: ``bilinlab <subcommand> [options]``.

Every run writes its outputs plus ``<subcommand>.manifest.json`` into
``--out-dir``.  Exit codes: 0 when every checked contract holds, 2 on a
contract violation, 1 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .apply import BilinearOperator, apply_fast_difference, apply_fast_general, apply_naive
from .grid import Grid, SampledFn
from .locall2 import (
    band_limited_random,
    check_adjoint_duality,
    check_lsigma_identities,
    check_parallelogram,
    check_q_factorization,
    contradiction_chain_report,
    gaussian,
    measure_dispersive_decay,
)
from .search import SearchConfig, search_lower_bound
from .svg import write_loglog_svg
from .symbols import (
    Difference,
    ExponentTriple,
    General,
    classify_local_l2,
    gamma,
    phase_library,
    piecewise_linear_phase,
)
from .transference import oscillation_contradiction_report, pairing_identity_check
from .witness import CURVE_HEADER, blowup_curve, certify_lower_bound, integer_shift_slopes

EXIT_OK, EXIT_USAGE, EXIT_CONTRACT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# parsing helpers


def parse_number(text: str):
    """``inf``, a fraction ``a/b`` or a decimal; exact ``Fraction`` when finite."""
    s = str(text).strip().lower()
    if s in ("inf", "infinity", "oo", "∞"):
        return math.inf
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def _snap(x, denominator: int = 64, rel: float = 5e-4):
    if isinstance(x, float):
        return x
    y = x.limit_denominator(denominator)
    return y if abs(y - x) <= rel * abs(x) else x


def parse_triple(p: str, q: str, r: str) -> tuple[ExponentTriple, dict]:
    """Exact Hoelder check; short decimals such as ``0.6667`` snap to nearby fractions.

    Returns the triple and a dict of any snapped values.
    """
    raw = [parse_number(v) for v in (p, q, r)]
    for v in raw:
        if v <= 0:
            raise UsageError("exponents must be positive")
    try:
        return ExponentTriple.from_fractions(*raw), {}
    except ValueError as first:
        snapped = [_snap(v) for v in raw]
        changes = {n: float(s) for n, v, s in zip("pqr", raw, snapped) if s != v}
        if changes:
            try:
                return ExponentTriple.from_fractions(*snapped), changes
            except ValueError:
                pass
        raise UsageError(str(first)) from first


def parse_list(text: str, conv=float) -> list:
    return [conv(x) for x in str(text).split(",") if x.strip()]


def parse_times(text: str) -> list[float]:
    """Comma list, or ``geom:start:stop:count``."""
    if text.startswith("geom:"):
        _, a, b, n = text.split(":")
        return [float(x) for x in np.geomspace(float(a), float(b), int(n))]
    return parse_list(text)


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(x) for x in row])
    return buf.getvalue()


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else ("-inf" if x < 0 else "nan"))
    return obj


# ---------------------------------------------------------------------------
# manifest


@dataclass
class RunManifest:
    subcommand: str
    argv: list
    params: dict
    seed: int
    version: str
    outputs: dict = field(default_factory=dict)  # name -> sha256 of the body
    deterministic: dict = field(default_factory=dict)  # name -> bool
    wall_clock_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(_jsonify(self.__dict__), indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))


class _Run:
    def __init__(self, args, argv):
        self.args = args
        self.out = Path(args.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        params = {k: v for k, v in vars(args).items() if k not in ("func", "out_dir")}
        params["threads"] = _threads(args)
        self.manifest = RunManifest(args.command, list(argv), params, args.seed, __version__)
        self.start = time.perf_counter()

    def write(self, name: str, text: str, deterministic: bool = True) -> Path:
        path = self.out / name
        path.write_text(text, encoding="utf-8", newline="")
        self.manifest.outputs[name] = hashlib.sha256(text.encode()).hexdigest()
        self.manifest.deterministic[name] = deterministic
        return path

    def finish(self) -> None:
        self.manifest.wall_clock_seconds = time.perf_counter() - self.start
        (self.out / f"{self.args.command}.manifest.json").write_text(self.manifest.to_json() + "\n", encoding="utf-8")


def _emit(obj) -> None:
    print(json.dumps(_jsonify(obj), indent=2, sort_keys=True))


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("BILINLAB_THREADS", "1"))


# ---------------------------------------------------------------------------
# subcommands


def _phase(name: str, K: int, lam: float, grid: Grid):
    if name in ("piecewise", "piecewise_linear"):
        return piecewise_linear_phase(integer_shift_slopes(K, lam, grid))
    lib = phase_library()
    if name not in lib:
        raise UsageError(f"unknown phase {name!r}; choose from {sorted(lib) + ['piecewise']}")
    return lib[name]


def cmd_classify(run: _Run) -> int:
    a = run.args
    t, snapped = parse_triple(a.p, a.q, a.r)
    result = {"p": t.p, "q": t.q, "r": t.r, "local_l2": classify_local_l2(t), "gamma": gamma(t)}
    if snapped:
        result["snapped"] = snapped
    run.write("classify.json", json.dumps(_jsonify(result), sort_keys=True) + "\n")
    _emit(result)
    return EXIT_OK


def cmd_certify(run: _Run) -> int:
    a = run.args
    t, snapped = parse_triple(a.p, a.q, a.r)
    grid = Grid(a.n, a.spacing)
    phase = _phase(a.phi, a.points, a.lam, grid)
    cert = certify_lower_bound(phase, a.lam, a.points, t, grid, window=(a.window_lo, a.window_hi))
    again = cert.reevaluate()
    result = cert.to_dict() | {"reevaluated": again, "phase": phase.name, "snapped": snapped}
    run.write("certify.json", json.dumps(_jsonify(result), sort_keys=True) + "\n")
    _emit(result)
    ok = math.isfinite(cert.lower_bound) and abs(again - cert.lower_bound) <= 1e-9 * cert.lower_bound
    return EXIT_OK if ok else EXIT_CONTRACT


def cmd_blowup(run: _Run) -> int:
    a = run.args
    t, _ = parse_triple(a.p, a.q, a.r)
    grid = Grid(a.n, a.spacing)
    phase = phase_library().get(a.phi)
    if phase is None:
        raise UsageError(f"unknown phase {a.phi!r}")
    if not 0 < a.lambda_min <= a.lambda_max or a.steps < 1:
        raise UsageError("need 0 < --lambda-min <= --lambda-max and --steps >= 1")
    # exp2 keeps dyadic endpoints and midpoints exact
    lams = [float(x) for x in np.exp2(np.linspace(math.log2(a.lambda_min), math.log2(a.lambda_max), a.steps))]
    rows = blowup_curve(phase, t, lams, grid=grid, window=(-a.window, a.window))
    run.write("blowup.csv", csv_text(CURVE_HEADER, [r.as_tuple() for r in rows]))
    if a.svg:
        path = run.out / "blowup.svg"
        write_loglog_svg(path, [r.lam for r in rows], [r.certificate for r in rows],
                         f"certificates, {phase.name} phase", "lambda", "certificate")
        run.manifest.extra["svg"] = path.name
    certs = [r.certificate for r in rows]
    if phase.is_linear:
        ok = all(0.99 <= c <= 1.01 for c in certs)
    else:
        ok = all(b >= a_ * (1 - 1e-9) for a_, b in zip(certs, certs[1:]))
    _emit({"rows": len(rows), "first": certs[0], "last": certs[-1], "contract_met": ok})
    return EXIT_OK if ok else EXIT_CONTRACT


def cmd_search(run: _Run) -> int:
    a = run.args
    t, _ = parse_triple(a.p, a.q, a.r)
    grid = Grid(a.n, a.spacing)
    rng = np.random.default_rng(a.seed)
    if a.symbol == "one":
        m = General(np.ones((a.n, a.n)))
    elif a.symbol == "random-unimodular":
        m = General(np.exp(2j * np.pi * rng.random((a.n, a.n))))
    else:
        lib = phase_library()
        if a.symbol not in lib:
            raise UsageError(f"unknown symbol {a.symbol!r}")
        phase, lam, L = lib[a.symbol], a.lam, grid.length
        m = Difference(lambda u: np.exp(1j * lam * phase(np.asarray(u) / L)))
    cfg = SearchConfig(
        restarts=a.restarts, max_iters=a.max_iters, step=a.step, shrink=a.shrink,
        tol=a.tol, seed=a.seed, threads=_threads(a),
    )
    cert = search_lower_bound(BilinearOperator(m, grid), t, cfg)
    again = cert.reevaluate()
    result = cert.to_dict() | {"reevaluated": again, "symbol": a.symbol}
    run.write("search.json", json.dumps(_jsonify(result), sort_keys=True) + "\n")
    _emit(result)
    return EXIT_OK if abs(again - cert.lower_bound) <= 1e-9 * cert.lower_bound else EXIT_CONTRACT


def identity_suite(which: Sequence[str], n_list: Sequence[int], instances: int, seed: int) -> list[dict]:
    """Run the named identity checks; one summary dict per (check, N)."""
    rng = np.random.default_rng(seed)
    out = []
    for n in n_list:
        grid = Grid(n, 1.0 / 8)
        for name in which:
            worst = 0.0
            count = 1 if name == "parallelogram" else instances
            for i in range(count):
                if name == "parallelogram":
                    rep = check_parallelogram(grid)
                elif name == "qfact":
                    f, g, h = (band_limited_random(grid, rng) for _ in range(3))
                    rep = check_q_factorization((0.1, 1.0, 10.0)[i % 3], f, g, h)
                elif name == "lsigma":
                    f, g, h = (band_limited_random(grid, rng) for _ in range(3))
                    rep = check_lsigma_identities(f, g, h, "cross" if i % 2 == 0 else "sum")
                elif name in ("adjoint1", "adjoint2"):
                    m = General(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
                    f, g, h = (SampledFn(grid, rng.standard_normal(n) + 1j * rng.standard_normal(n)) for _ in range(3))
                    rep = check_adjoint_duality(m, f, g, h, 1 if name == "adjoint1" else 2)
                elif name == "pairing":
                    K = min(n, 256)
                    vals = rng.standard_normal(K) + 1j * rng.standard_normal(K)
                    rep = pairing_identity_check(vals, rng.choice([-1.0, 1.0], K), 4 * K)
                else:
                    raise UsageError(f"unknown identity {name!r}")
                worst = max(worst, rep.residual)
            out.append({"identity": name, "n": n, "instances": count, "max_residual": worst,
                        "passed": worst <= 1e-10})
    return out


IDENTITIES = ("parallelogram", "qfact", "lsigma", "adjoint1", "adjoint2", "pairing")


def cmd_identities(run: _Run) -> int:
    a = run.args
    which = IDENTITIES if a.which == "all" else (
        ("adjoint1", "adjoint2") if a.which == "adjoint" else (a.which,)
    )
    reports = identity_suite(which, parse_list(a.n_list, int), a.instances, a.seed)
    run.write("identities.json", json.dumps(_jsonify(reports), sort_keys=True, indent=2) + "\n")
    ok = all(r["passed"] for r in reports)
    _emit({"reports": reports, "all_passed": ok})
    return EXIT_OK if ok else EXIT_CONTRACT


def cmd_dispersive(run: _Run) -> int:
    a = run.args
    grid = Grid(a.n, a.length / a.n)
    f = gaussian(grid, a.sigma)
    ps = [float(parse_number(x)) for x in a.p.split(",")]
    times = parse_times(a.times)
    rows, summary, ok = [], [], True
    for p in ps:
        table = measure_dispersive_decay(f, p, times, sigma=a.sigma)
        expected = (0.0 if math.isinf(p) else 1 / p) - 0.5
        slope_ok = abs(table.slope - expected) <= 0.05 if len(table.rows) > 1 else True
        oracle_ok = all(abs(r[1] / r[3] - 1) <= 0.02 for r in table.rows)
        ok &= slope_ok and oracle_ok
        rows += [(p, *r) for r in table.rows]
        summary.append({"p": p, "slope": table.slope, "expected": expected, "constant": table.constant,
                        "dropped": list(table.dropped), "warnings": list(table.warnings),
                        "slope_ok": slope_ok, "oracle_ok": oracle_ok})
        if a.svg and table.rows:
            path = run.out / f"dispersive_p{_num(p)}.svg"
            write_loglog_svg(path, [r[0] for r in table.rows], [r[1] for r in table.rows],
                             f"||Q_t f||_{_num(p)} / ||f||_2", "t", "ratio")
    run.write("dispersive.csv", csv_text(("p", "t", "ratio", "bound", "oracle"), rows))
    _emit({"fits": summary, "contract_met": ok})
    return EXIT_OK if ok else EXIT_CONTRACT


def cmd_chain(run: _Run) -> int:
    a = run.args
    t, _ = parse_triple(a.p, a.q, a.r)
    grid = Grid(a.n, a.length / a.n)
    try:
        table = contradiction_chain_report(t, parse_times(a.times), grid=grid, sigma=a.sigma)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    run.write("chain.csv", csv_text(table.header, table.rows))
    ok = abs(table.exponent - table.predicted) <= 0.1 and all(abs(r[1] - r[2]) <= 1e-10 for r in table.rows)
    _emit({"exponent": table.exponent, "predicted": table.predicted, "contract_met": ok})
    return EXIT_OK if ok else EXIT_CONTRACT


def cmd_transference(run: _Run) -> int:
    a = run.args
    p = parse_number(a.p)
    rp = parse_number(a.r_prime)
    inv_p = 0 if isinstance(p, float) else 1 / p
    inv_rp = 0 if isinstance(rp, float) else 1 / rp
    inv_q = 1 - inv_rp - inv_p
    if inv_q < 0:
        raise UsageError("need 1/p + 1/r' <= 1 so that 1/q = 1 - 1/r' - 1/p >= 0")
    q = math.inf if inv_q == 0 else 1 / inv_q
    r = math.inf if inv_rp == 1 else 1 / (1 - Fraction(inv_rp))
    t = ExponentTriple.from_fractions(p, q, r)
    ks = [2**j for j in range(1, int(math.log2(a.K_max)) + 1)]
    table = oscillation_contradiction_report(t, a.eps, ks, seed=a.seed)
    rows = [(*row, table.right_exponent, table.predicted_exponent) for row in table.rows]
    run.write("transference.csv", csv_text((*table.header, "right_exponent", "predicted_exponent"), rows))
    ok = all(abs(r[1] - r[2]) <= 1e-10 * max(1.0, abs(r[1])) for r in table.rows)
    _emit({"crossover": table.crossover, "status": table.status, "right_exponent": table.right_exponent,
           "predicted_exponent": table.predicted_exponent, "contract_met": ok})
    return EXIT_OK if ok else EXIT_CONTRACT


def benchmark(n_list: Sequence[int], seed: int = 0, repeats: int = 1) -> list[tuple]:
    """``(n, naive_s, general_s, difference_s, speedup, max_dev)`` per ``n``."""
    rng = np.random.default_rng(seed)
    rows = []
    for n in n_list:
        grid = Grid(n)
        psi_vals = np.exp(2j * np.pi * rng.random(n))
        psi = lambda u, v=psi_vals, n=n: v[np.asarray(u) % n]  # noqa: E731
        op_g = BilinearOperator(General(np.exp(2j * np.pi * rng.random((n, n)))), grid)
        op_d = BilinearOperator(Difference(psi), grid)
        f = SampledFn(grid, rng.standard_normal(n) + 1j * rng.standard_normal(n))
        g = SampledFn(grid, rng.standard_normal(n) + 1j * rng.standard_normal(n))

        def timed(fn, *args):
            best, out = math.inf, None
            for _ in range(repeats):
                t0 = time.perf_counter()
                out = fn(*args)
                best = min(best, time.perf_counter() - t0)
            return best, out

        t_naive, ref = timed(apply_naive, op_g, f, g)
        t_gen, fast = timed(apply_fast_general, op_g, f, g)
        t_diff, dfast = timed(apply_fast_difference, op_d, f, g)
        dref = apply_naive(op_d, f, g)
        dev = max(np.abs(ref.values - fast.values).max(), np.abs(dref.values - dfast.values).max())
        rows.append((n, t_naive, t_gen, t_diff, t_naive / t_gen, float(dev)))
    return rows


def cmd_bench(run: _Run) -> int:
    a = run.args
    rows = benchmark(parse_list(a.n_list, int), a.seed, a.repeats)
    run.write("bench.csv", csv_text(("n", "naive_s", "general_s", "difference_s", "speedup", "max_dev"), rows),
              deterministic=False)
    run.write("bench_accuracy.csv", csv_text(("n", "max_dev"), [(r[0], r[5]) for r in rows]))
    run.manifest.extra["timings"] = [list(r) for r in rows]
    ok = all(r[5] <= 1e-10 for r in rows)
    _emit({"rows": [list(r) for r in rows], "contract_met": ok})
    return EXIT_OK if ok else EXIT_CONTRACT


def cmd_replay(run: _Run) -> int:
    a = run.args
    old = RunManifest.load(a.manifest)
    with tempfile.TemporaryDirectory() as tmp:
        argv = list(old.argv) + ["--out-dir", tmp]
        code = main(argv, quiet=True)
        new = RunManifest.load(Path(tmp) / f"{old.subcommand}.manifest.json")
    checked = {k: new.outputs.get(k) == v for k, v in old.outputs.items() if old.deterministic.get(k, True)}
    ok = code == EXIT_OK and all(checked.values())
    _emit({"replayed": old.subcommand, "exit_code": code, "identical": checked, "contract_met": ok})
    return EXIT_OK if ok else EXIT_CONTRACT


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bilinlab", description="Bilinear Fourier multiplier experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out-dir", default="bilinlab-out")
        sp.add_argument("--threads", type=int, default=None, help="default: $BILINLAB_THREADS or 1")
        return sp

    def triple(sp, r_default=None):
        sp.add_argument("--p", required=True)
        sp.add_argument("--q", required=True)
        sp.add_argument("--r", required=r_default is None, default=r_default)

    sp = add("classify", cmd_classify, "local-L2 verdict and gamma for (p, q, r)")
    triple(sp)

    sp = add("certify", cmd_certify, "bump-family lower-bound certificate (JSON)")
    triple(sp)
    sp.add_argument("--phi", default="piecewise")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--points", type=int, default=4, help="number of components K")
    sp.add_argument("--n", type=int, default=1024)
    sp.add_argument("--spacing", type=float, default=0.5)
    sp.add_argument("--window-lo", type=float, default=-1.0)
    sp.add_argument("--window-hi", type=float, default=1.0)

    sp = add("blowup", cmd_blowup, "certificates along a lambda sweep (CSV, optional SVG)")
    triple(sp)
    sp.add_argument("--phi", default="quadratic")
    sp.add_argument("--lambda-min", type=float, default=16.0)
    sp.add_argument("--lambda-max", type=float, default=1024.0)
    sp.add_argument("--steps", type=int, default=7)
    sp.add_argument("--n", type=int, default=65536)
    sp.add_argument("--spacing", type=float, default=1 / 16)
    sp.add_argument("--window", type=float, default=4.0, help="frequency half-window")
    sp.add_argument("--svg", action="store_true")

    sp = add("search", cmd_search, "alternating-ascent lower bound (JSON)")
    triple(sp)
    sp.add_argument("--symbol", default="random-unimodular",
                    help="one | random-unimodular | a phase name (uses --lambda)")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=16)
    sp.add_argument("--spacing", type=float, default=1.0)
    sp.add_argument("--restarts", type=int, default=4)
    sp.add_argument("--max-iters", type=int, default=200)
    sp.add_argument("--step", type=float, default=0.5)
    sp.add_argument("--shrink", type=float, default=0.5)
    sp.add_argument("--tol", type=float, default=1e-9)

    sp = add("identities", cmd_identities, "exact identity checks (JSON)")
    sp.add_argument("--which", default="all", choices=("all", "adjoint") + IDENTITIES)
    sp.add_argument("--n-list", default="16,64,256")
    sp.add_argument("--instances", type=int, default=50)

    sp = add("dispersive", cmd_dispersive, "free-evolution decay table and slope (CSV)")
    sp.add_argument("--p", default="2,4,inf", help="comma list of exponents")
    sp.add_argument("--times", default="geom:0.5:30:25")
    sp.add_argument("--n", type=int, default=4096)
    sp.add_argument("--length", type=float, default=128.0)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--svg", action="store_true")

    sp = add("chain", cmd_chain, "invariant pairing against the decaying Hoelder bound (CSV)")
    triple(sp)
    sp.add_argument("--times", default="geom:0.5:30:25")
    sp.add_argument("--n", type=int, default=4096)
    sp.add_argument("--length", type=float, default=128.0)
    sp.add_argument("--sigma", type=float, default=1.0)

    sp = add("transference", cmd_transference, "sign-pairing crossover table (CSV)")
    sp.add_argument("--K-max", dest="K_max", type=int, default=256)
    sp.add_argument("--p", default="3/2")
    sp.add_argument("--r-prime", dest="r_prime", default="3")
    sp.add_argument("--eps", type=float, default=0.5)

    sp = add("bench", cmd_bench, "naive vs fast application timings (CSV)")
    sp.add_argument("--n-list", default="32,64,128,256")
    sp.add_argument("--repeats", type=int, default=1)

    sp = add("replay", cmd_replay, "re-run a manifest and compare output hashes")
    sp.add_argument("--manifest", required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None, quiet: bool = False) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        run = _Run(args, [x for x in _strip_out_dir(argv)])
        if quiet:
            with open(os.devnull, "w") as sink:
                old, sys.stdout = sys.stdout, sink
                try:
                    code = args.func(run)
                finally:
                    sys.stdout = old
        else:
            code = args.func(run)
        run.finish()
        return code
    except UsageError as exc:
        print(f"bilinlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _strip_out_dir(argv: Sequence[str]) -> list[str]:
    out, skip = [], False
    for i, x in enumerate(argv):
        if skip:
            skip = False
            continue
        if x == "--out-dir":
            skip = True
            continue
        if x.startswith("--out-dir="):
            continue
        out.append(x)
    return out


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()

import math

import numpy as np
import pytest

from bilinlab.apply import BilinearOperator, apply_naive
from bilinlab.grid import Grid, SampledFn, lp_norm
from bilinlab.search import SearchConfig, _chain, _matrix_in_f, _matrix_in_g, kernel_tensor, search_lower_bound
from bilinlab.symbols import Difference, ExponentTriple, General

T221 = ExponentTriple(2, 2, 1)


def cnormal(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def net_maximum(table, t, samples, rng, chunk=10_000):
    """Best ratio over random complex Gaussian pairs, evaluated by an explicit einsum."""
    n = table.shape[0]
    k = np.rint(np.fft.fftfreq(n) * n).astype(int)
    x = np.arange(n)
    E = np.exp(2j * np.pi * x[:, None, None] * (k[None, :, None] + k[None, None, :]) / n) * table[None] / n**2
    best = 0.0
    for _ in range(samples // chunk):
        f, g = cnormal(rng, (chunk, n)), cnormal(rng, (chunk, n))
        out = np.einsum("xab,ca,cb->cx", E, np.fft.fft(f, axis=1), np.fft.fft(g, axis=1))
        num = np.sum(np.abs(out) ** t.r, axis=1) ** (1 / t.r)
        den = np.sum(np.abs(f) ** t.p, axis=1) ** (1 / t.p) * np.sum(np.abs(g) ** t.q, axis=1) ** (1 / t.q)
        best = max(best, float(np.max(num / den)))
    return best


class TestConfig:
    @pytest.mark.parametrize("bad", [dict(restarts=0), dict(shrink=1.0), dict(tol=0.0), dict(max_iters=0)])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            SearchConfig(**bad)


class TestLinearization:
    def test_matrices_reproduce_operator(self, rng):
        n = 12
        g = Grid(n)
        op = BilinearOperator(General(cnormal(rng, (n, n))), g)
        M = kernel_tensor(op)
        f, h = cnormal(rng, n), cnormal(rng, n)
        ref = apply_naive(op, SampledFn(g, f), SampledFn(g, h)).values
        assert np.abs(_matrix_in_f(M, h) @ f - ref).max() < 1e-12
        assert np.abs(_matrix_in_g(M, f) @ h - ref).max() < 1e-12


class TestSearch:
    def test_constant_symbol_reaches_cauchy_schwarz(self):
        op = BilinearOperator(General(np.ones((16, 16))), Grid(16, 0.5))
        cert = search_lower_bound(op, T221, SearchConfig(restarts=3, max_iters=300))
        assert cert.lower_bound == pytest.approx(1.0, abs=1e-3)
        assert cert.lower_bound <= 1 + 1e-12

    def test_random_unimodular_against_net(self, rng):
        n = 8
        table = np.exp(2j * np.pi * rng.random((n, n)))
        cert = search_lower_bound(BilinearOperator(General(table), Grid(n)), T221, SearchConfig(restarts=6))
        assert cert.lower_bound >= 0.95 * net_maximum(table, T221, 100_000, rng)

    def test_deterministic(self, rng):
        table = np.exp(2j * np.pi * rng.random((8, 8)))
        op = BilinearOperator(General(table), Grid(8))
        cfg = SearchConfig(restarts=3, seed=11)
        a, b = search_lower_bound(op, T221, cfg), search_lower_bound(op, T221, cfg)
        assert a.lower_bound == b.lower_bound
        assert np.array_equal(a.F.values, b.F.values)

    def test_threads_do_not_change_result(self, rng):
        table = np.exp(2j * np.pi * rng.random((8, 8)))
        op = BilinearOperator(General(table), Grid(8))
        a = search_lower_bound(op, T221, SearchConfig(restarts=4, seed=2))
        b = search_lower_bound(op, T221, SearchConfig(restarts=4, seed=2, threads=4))
        assert a.lower_bound == b.lower_bound and a.metadata["chain"] == b.metadata["chain"]

    @pytest.mark.parametrize("t", [ExponentTriple(2, 2, 1), ExponentTriple(1, 2, 2 / 3), ExponentTriple(math.inf, 2, 2)])
    def test_reevaluates(self, t, rng):
        n = 8
        op = BilinearOperator(Difference(lambda u: np.exp(0.7j * np.asarray(u) ** 2)), Grid(n, 0.5))
        cert = search_lower_bound(op, t, SearchConfig(restarts=2, max_iters=60))
        assert abs(cert.reevaluate() - cert.lower_bound) <= 1e-9 * cert.lower_bound

    def test_ratio_is_a_true_evaluation(self, rng):
        n = 8
        g = Grid(n, 0.5)
        op = BilinearOperator(General(np.exp(2j * np.pi * rng.random((n, n)))), g)
        cert = search_lower_bound(op, T221, SearchConfig(restarts=2))
        f, h = SampledFn(g, cert.F.values[0]), SampledFn(g, cert.G.values[0])
        direct = lp_norm(apply_naive(op, f, h), 1) / (lp_norm(f, 2) * lp_norm(h, 2))
        assert cert.lower_bound == pytest.approx(direct, rel=1e-10)

    def test_warm_start_never_loses(self, rng):
        n = 16
        g = Grid(n)
        s = 3
        op = BilinearOperator(Difference(lambda u: np.exp(2j * np.pi * s * np.asarray(u) / n)), g)
        # two shifted indicators stacked into one scalar pair: f at 0, g where the translate lands
        f = np.zeros(n)
        f[:2] = 1
        h = np.roll(f, 2 * s)
        start = (SampledFn(g, f), SampledFn(g, h))
        t = ExponentTriple(1, 2, 2 / 3)
        warm = lp_norm(apply_naive(op, *start), t.r) / (lp_norm(start[0], t.p) * lp_norm(start[1], t.q))
        cert = search_lower_bound(op, t, SearchConfig(restarts=1, max_iters=20), warm_start=start)
        assert cert.lower_bound >= warm * (1 - 1e-12)

    def test_chain_history_non_decreasing(self, rng):
        n = 8
        M = kernel_tensor(BilinearOperator(General(np.exp(2j * np.pi * rng.random((n, n)))), Grid(n)))
        for t in (T221, ExponentTriple(1, 2, 2 / 3), ExponentTriple(4, 4, 2)):
            _, _, _, history = _chain(M, t, SearchConfig(max_iters=50), 1.0, 0, None)
            assert all(b >= a for a, b in zip(history, history[1:]))

    def test_zero_start_is_skipped(self):
        n = 8
        g = Grid(n)
        op = BilinearOperator(General(np.ones((n, n))), g)
        zero = SampledFn(g, np.zeros(n))
        cert = search_lower_bound(op, T221, SearchConfig(restarts=2), warm_start=(zero, zero))
        assert cert.metadata["chain"] == 1

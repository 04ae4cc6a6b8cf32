import math

import numpy as np
import pytest

from bilinlab.apply import l_sigma, l_sigma_bar, pairing, q_operator
from bilinlab.grid import Grid, SampledFn, lp_norm
from bilinlab.locall2 import (
    IDENTITY_TOL,
    IdentityReport,
    _q_factorized,
    band_limited_random,
    central_band_fraction,
    check_adjoint_duality,
    check_lsigma_identities,
    check_parallelogram,
    check_q_factorization,
    contradiction_chain_report,
    gaussian,
    gaussian_evolution_ratio,
    measure_dispersive_decay,
)
from bilinlab.symbols import ExponentTriple, General

DISPERSIVE_GRID = Grid(4096, 128 / 4096)
TIMES = np.geomspace(0.5, 30, 25)


class TestReport:
    def test_pass_flag(self):
        assert IdentityReport("x", IDENTITY_TOL, "").passed
        assert not IdentityReport("x", 2 * IDENTITY_TOL, "").passed


class TestParallelogram:
    @pytest.mark.parametrize("n", [16, 64, 255])
    def test_all_pairs_exact(self, n):
        assert check_parallelogram(Grid(n)).residual == 0.0


class TestQFactorization:
    def test_zero_time(self, rng):
        g = Grid(32, 0.25)
        f, h, k = (band_limited_random(g, rng) for _ in range(3))
        assert check_q_factorization(0.0, f, h, k).residual < 1e-13
        assert _q_factorized(0.0, f, h, k) == pytest.approx(pairing(f * h, k), rel=1e-13)

    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
    def test_random(self, t, rng):
        g = Grid(64, 0.25)
        f, h, k = (band_limited_random(g, rng) for _ in range(3))
        assert check_q_factorization(t, f, h, k).residual <= 1e-10

    def test_gaussian_value_real_positive(self):
        g = Grid(256, 1 / 8)
        f = gaussian(g, 1.0)
        assert check_q_factorization(0.7, f, f, f).residual <= 1e-10
        value = _q_factorized(0.7, f, f, f)
        assert value.real > 0 and abs(value.imag) < 1e-10 * value.real

    def test_large_grid_uses_sparse_path(self, rng):
        g = Grid(1024, 1 / 8)
        f, h, k = (band_limited_random(g, rng, fraction=1 / 32) for _ in range(3))
        assert check_q_factorization(2.0, f, h, k).residual <= 1e-10

    def test_opposite_modulation_invariant(self, rng):
        g = Grid(64, 0.25)
        f, h, k = (band_limited_random(g, rng, fraction=0.125) for _ in range(3))
        theta = 3
        e = np.exp(2j * np.pi * theta * np.arange(64) / 64)
        base = check_q_factorization(1.0, f, h, k).residual
        moved = check_q_factorization(1.0, f * e, h * np.conj(e), k).residual
        assert base <= 1e-10 and moved <= 1e-10

    def test_wrapping_spectrum_breaks_identity(self, rng):
        # full-band inputs make xi + eta wrap; the continuum phase algebra no longer closes
        g = Grid(32, 0.25)
        f, h, k = (SampledFn(g, rng.standard_normal(32) + 1j * rng.standard_normal(32)) for _ in range(3))
        assert check_q_factorization(1.0, f, h, k).residual > 1e-6

    def test_grid_mismatch(self, rng):
        f = band_limited_random(Grid(16), rng)
        with pytest.raises(ValueError):
            check_q_factorization(1.0, f, f, band_limited_random(Grid(16, 0.5), rng))


class TestLSigma:
    @pytest.mark.parametrize("variant", ["cross", "sum"])
    def test_random(self, variant, rng):
        g = Grid(64, 0.25)
        f, h, k = (band_limited_random(g, rng) for _ in range(3))
        assert check_lsigma_identities(f, h, k, variant).residual <= 1e-10

    def test_real_even_gaussian_conjugates(self):
        g = Grid(128, 1 / 4)
        f = gaussian(g, 1.0, center=0.0)
        assert np.abs(l_sigma()(f).values - np.conj(l_sigma_bar()(f).values)).max() < 1e-13

    def test_zero_h(self, rng):
        g = Grid(32, 0.25)
        f, h = band_limited_random(g, rng), band_limited_random(g, rng)
        zero = SampledFn(g, np.zeros(32))
        assert check_lsigma_identities(f, h, zero).residual < 1e-14
        assert pairing(l_sigma_bar()(f) * l_sigma_bar()(h), l_sigma()(zero)) == 0

    def test_unknown_variant(self, rng):
        f = band_limited_random(Grid(16), rng)
        with pytest.raises(ValueError):
            check_lsigma_identities(f, f, f, "diagonal")


class TestAdjointDuality:
    @pytest.mark.parametrize("which", [1, 2])
    @pytest.mark.parametrize("n", [16, 64])
    def test_random(self, which, n, rng):
        g = Grid(n, 0.5)
        m = General(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        f, h, k = (SampledFn(g, rng.standard_normal(n) + 1j * rng.standard_normal(n)) for _ in range(3))
        assert check_adjoint_duality(m, f, h, k, which).residual <= 1e-10

    def test_bad_index(self, rng):
        f = band_limited_random(Grid(8), rng)
        with pytest.raises(ValueError):
            check_adjoint_duality(General(np.ones((8, 8))), f, f, f, 3)


class TestGaussianOracle:
    def test_time_zero_norm_ratio(self):
        # ||f||_2 of exp(-x^2 / 2) is pi^(1/4); at t = 0 the L^2 ratio is 1
        assert gaussian_evolution_ratio(1.0, 0.0, 2) == pytest.approx(1.0, rel=1e-14)

    def test_l2_conserved(self):
        for t in (0.3, 4.0, 40.0):
            assert gaussian_evolution_ratio(1.3, t, 2) == pytest.approx(1.0, rel=1e-14)

    def test_matches_numerical_evolution(self):
        f = gaussian(DISPERSIVE_GRID, 1.0)
        for t in (2.0, 8.0):
            for p in (4, math.inf):
                num = lp_norm(q_operator(t)(f), p) / lp_norm(f, 2)
                assert num == pytest.approx(gaussian_evolution_ratio(1.0, t, p), rel=1e-3)


class TestDispersive:
    def test_unitarity_row(self):
        table = measure_dispersive_decay(gaussian(DISPERSIVE_GRID, 1.0), 2, TIMES, sigma=1.0)
        assert all(abs(r[1] - 1) < 1e-10 for r in table.rows)
        assert abs(table.slope) < 1e-8

    @pytest.mark.parametrize("p, slope", [(4, -0.25), (math.inf, -0.5), (6, 1 / 6 - 0.5)])
    def test_slopes(self, p, slope):
        table = measure_dispersive_decay(gaussian(DISPERSIVE_GRID, 1.0), p, TIMES, sigma=1.0)
        assert table.slope == pytest.approx(slope, abs=0.05)
        assert all(abs(r[1] / r[3] - 1) <= 0.02 for r in table.rows)
        assert len(table.rows) >= 5 and not table.warnings

    def test_bound_column_dominates(self):
        table = measure_dispersive_decay(gaussian(DISPERSIVE_GRID, 1.0), 4, TIMES)
        assert all(r[1] <= r[2] * (1 + 1e-12) for r in table.rows)
        assert all(math.isnan(r[3]) for r in table.rows)

    def test_wraparound_times_dropped(self):
        table = measure_dispersive_decay(gaussian(DISPERSIVE_GRID, 1.0), 4, [0.1, 5.0, 1e4])
        assert table.dropped == (0.1, 1e4)
        with pytest.raises(ValueError, match="resolution filter"):
            measure_dispersive_decay(gaussian(DISPERSIVE_GRID, 1.0), 4, [1e4])

    def test_resolution_warning(self):
        coarse = Grid(256, 1.0)
        table = measure_dispersive_decay(gaussian(coarse, 1.0), 4, [20.0, 30.0], sigma=1.0)
        assert any("8 cells" in w for w in table.warnings)

    def test_rejects_small_p(self):
        with pytest.raises(ValueError):
            measure_dispersive_decay(gaussian(DISPERSIVE_GRID, 1.0), 1.5, TIMES)

    def test_band_fraction(self):
        assert central_band_fraction(gaussian(DISPERSIVE_GRID, 1.0)) > 0.999999


class TestChain:
    @pytest.mark.parametrize("t", [ExponentTriple(2, 2, 1), ExponentTriple(4, 4, 2)])
    def test_exponent(self, t):
        table = contradiction_chain_report(t, TIMES, grid=DISPERSIVE_GRID)
        assert table.predicted == pytest.approx(-0.5)
        assert table.exponent == pytest.approx(-0.5, abs=0.1)

    def test_left_side_constant(self):
        table = contradiction_chain_report(ExponentTriple(2, 2, 1), TIMES, grid=DISPERSIVE_GRID)
        left = table.rows[0][2]
        assert all(abs(r[1] - left) <= 1e-10 * abs(left) for r in table.rows)

    def test_rejects_outside_local_l2(self):
        with pytest.raises(ValueError, match="local L2"):
            contradiction_chain_report(ExponentTriple(6, 6, 3), TIMES)

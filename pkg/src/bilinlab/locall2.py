"""Quadratic-phase identities and free-Schroedinger decay measurements.

Frequencies enter the quadratic phases as angular physical frequencies
``omega(k) = 2 pi k / L``.  The factorization identities combine
``omega(xi)^2``, ``omega(eta)^2``, ``omega(xi - eta)^2`` and
``omega(xi + eta)^2``; they are exact on the torus as long as neither
``xi + eta`` nor ``xi - eta`` wraps, which :func:`band_limited_random`
guarantees by keeping spectra inside ``|k| < N/4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .apply import (
    BilinearOperator,
    apply_band_limited,
    apply_fast_general,
    l_sigma,
    l_sigma_bar,
    pairing,
    q_operator,
)
from .grid import Grid, SampledFn, lp_norm
from .symbols import (
    Difference,
    ExponentTriple,
    General,
    Product,
    Symbol,
    adjoint_symbol_1,
    adjoint_symbol_2,
    classify_local_l2,
)

__all__ = [
    "IDENTITY_TOL",
    "IdentityReport",
    "band_limited_random",
    "gaussian",
    "gaussian_evolution_ratio",
    "check_parallelogram",
    "check_q_factorization",
    "check_lsigma_identities",
    "check_adjoint_duality",
    "DispersiveTable",
    "measure_dispersive_decay",
    "ChainTable",
    "contradiction_chain_report",
    "central_band_fraction",
]

IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of one identity check.

    ``residual`` is ``|lhs - rhs| / max(1, |lhs|)``: absolute for pairings of
    size up to one, relative beyond.
    """

    name: str
    residual: float
    inputs: str
    passed: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.residual <= IDENTITY_TOL))

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": self.residual, "inputs": self.inputs, "passed": self.passed}


def _omega(grid: Grid) -> np.ndarray:
    return 2 * np.pi * grid.frequencies() / grid.length


def band_limited_random(grid: Grid, rng: np.random.Generator, fraction: float = 0.25) -> SampledFn:
    """Random complex function whose spectrum lives in ``|k| < fraction * N``."""
    n = grid.n_points
    spectrum = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    spectrum[np.abs(grid.frequencies()) >= fraction * n] = 0
    return SampledFn(grid, np.fft.ifft(spectrum) * math.sqrt(n))


def gaussian(grid: Grid, sigma: float, center: Optional[float] = None) -> SampledFn:
    """``exp(-(x - c)^2 / (2 sigma^2))`` centred mid-grid by default."""
    c = grid.length / 2 if center is None else center
    x = grid.sites() - c
    return SampledFn(grid, np.exp(-x * x / (2 * sigma * sigma)))


def gaussian_evolution_ratio(sigma: float, t: float, p: float) -> float:
    """Closed form ``||Q_t f||_p / ||f||_2`` on the line for the Gaussian above.

    With ``Q_t = exp(i t omega^2)`` the evolved modulus is
    ``(sigma/|s|) exp(-x^2 sigma^2 / (2 (sigma^4 + 4 t^2)))``, ``|s|^2 = sqrt(sigma^4 + 4t^2)``.
    """
    d = sigma**4 + 4 * t * t
    amp = sigma / d**0.25
    norm2 = (math.pi * sigma * sigma) ** 0.25
    if math.isinf(p):
        return amp / norm2
    return amp * (2 * math.pi * d / (p * sigma * sigma)) ** (1 / (2 * p)) / norm2


def central_band_fraction(f: SampledFn) -> float:
    """Share of spectral energy in ``|k| < N/4``."""
    spectrum = np.abs(np.fft.fft(f.values)) ** 2
    inner = np.abs(f.grid.frequencies()) < f.grid.n_points / 4
    total = spectrum.sum()
    return float(spectrum[inner].sum() / total) if total > 0 else 1.0


# ---------------------------------------------------------------------------
# identities


def check_parallelogram(grid: Grid) -> IdentityReport:
    """``2a^2 + 2b^2 = (a-b)^2 + (a+b)^2`` and ``(a+b)^2 - a^2 - b^2 = 2ab`` on all label pairs."""
    k = grid.frequencies().astype(np.int64)
    a, b = k[:, None], k[None, :]
    r1 = np.abs(2 * a * a + 2 * b * b - (a - b) ** 2 - (a + b) ** 2).max()
    r2 = np.abs((a + b) ** 2 - a * a - b * b - 2 * a * b).max()
    return IdentityReport("parallelogram", float(max(r1, r2)), f"all label pairs, N={grid.n_points}")


def _same_grid(*fs: SampledFn) -> Grid:
    grid = fs[0].grid
    for f in fs[1:]:
        if f.grid != grid:
            raise ValueError("grid mismatch")
    return grid


def _apply(op: BilinearOperator, f: SampledFn, g: SampledFn) -> SampledFn:
    if op.n <= 512:
        return apply_fast_general(op, f, g)
    return apply_band_limited(op, f, g)


def check_q_factorization(t_param: float, f: SampledFn, g: SampledFn, h: SampledFn) -> IdentityReport:
    """``<f g, h> = <T_t(Q_2t f, Q_2t g), Q_-t h>`` with ``T_t`` of symbol ``exp(-i t omega(u)^2)``."""
    grid = _same_grid(f, g, h)
    lhs = pairing(f * g, h)
    rhs = _q_factorized(t_param, f, g, h)
    scale = max(1.0, abs(lhs))
    return IdentityReport(
        "q_factorization", abs(lhs - rhs) / scale, f"t={t_param:g}, N={grid.n_points}"
    )


def _q_factorized(t_param: float, f: SampledFn, g: SampledFn, h: SampledFn) -> complex:
    grid = f.grid
    w = 2 * np.pi / grid.length
    op = BilinearOperator(Difference(lambda u: np.exp(-1j * t_param * (w * u) ** 2)), grid)
    q2 = q_operator(2 * t_param)
    out = _apply(op, q2(f), q2(g))
    return pairing(out, q_operator(-t_param)(h))


def cross_symbol(grid: Grid) -> General:
    """``exp(2 i omega(xi) omega(eta))`` sampled on ``grid``."""
    om = _omega(grid)
    return General(np.exp(2j * np.outer(om, om)))


def check_lsigma_identities(f: SampledFn, g: SampledFn, h: SampledFn, variant: str = "cross") -> IdentityReport:
    """Pairing factorization through ``L_sigma`` plus the conjugation relation.

    ``variant="cross"``: symbol ``exp(2 i xi eta)`` and
    ``<T(f, g), h> = <L_bar f * L_bar g, L h>``.
    ``variant="sum"``: product symbol ``exp(i (xi^2 + eta^2))`` and
    ``<T(f, g), h> = <L f * L g, h>``.
    In both cases ``conj(L f) = L_bar(conj f)`` is checked as well.
    """
    grid = _same_grid(f, g, h)
    L, Lbar = l_sigma(), l_sigma_bar()
    if variant == "cross":
        op = BilinearOperator(cross_symbol(grid), grid, allow_large=True)
        rhs = pairing(Lbar(f) * Lbar(g), L(h))
    elif variant == "sum":
        w = 2 * np.pi / grid.length
        phase = lambda k: np.exp(1j * (w * np.asarray(k)) ** 2)  # noqa: E731
        op = BilinearOperator(Product(phase, phase), grid, allow_large=True)
        rhs = pairing(L(f) * L(g), h)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    lhs = pairing(_apply(op, f, g), h)
    scale = max(1.0, abs(lhs))
    r_pair = abs(lhs - rhs) / scale
    r_conj = max(
        float(np.abs(np.conj(L(x).values) - Lbar(x.conj()).values).max()) for x in (f, g, h)
    )
    return IdentityReport(f"lsigma_{variant}", max(r_pair, r_conj), f"N={grid.n_points}")


def check_adjoint_duality(m: Symbol, f: SampledFn, g: SampledFn, h: SampledFn, which: int = 1) -> IdentityReport:
    """``<T_m(f,g), h> = <T_m1(h,g), f>`` (``which=1``) or ``= <T_m2(f,h), g>``."""
    grid = _same_grid(f, g, h)
    op = BilinearOperator(m, grid, allow_large=True)
    lhs = pairing(apply_fast_general(op, f, g), h)
    if which == 1:
        adj = BilinearOperator(adjoint_symbol_1(m), grid, allow_large=True)
        rhs = pairing(apply_fast_general(adj, h, g), f)
    elif which == 2:
        adj = BilinearOperator(adjoint_symbol_2(m), grid, allow_large=True)
        rhs = pairing(apply_fast_general(adj, f, h), g)
    else:
        raise ValueError("which must be 1 or 2")
    scale = max(1.0, abs(lhs))
    return IdentityReport(f"adjoint_{which}", abs(lhs - rhs) / scale, f"N={grid.n_points}")


# ---------------------------------------------------------------------------
# dispersive decay


def _width(f: SampledFn) -> float:
    """``sqrt(2)`` times the circular RMS radius of ``|f|^2`` about its peak."""
    grid = f.grid
    a = np.abs(f.values) ** 2
    j0 = int(np.argmax(a))
    n = grid.n_points
    d = ((np.arange(n) - j0 + n // 2) % n - n // 2) * grid.spacing
    return float(math.sqrt(2 * np.sum(a * d * d) / np.sum(a)))


def _fit_slope(ts, vals) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.log(ts), np.log(vals), 1)
    return float(slope), float(intercept)


@dataclass(frozen=True)
class DispersiveTable:
    p: float
    rows: tuple  # (t, ratio, bound, oracle or nan)
    slope: float
    constant: float
    dropped: tuple
    warnings: tuple

    header = ("t", "ratio", "bound", "oracle")


def measure_dispersive_decay(
    profile: SampledFn,
    p: float,
    times: Sequence[float],
    sigma: Optional[float] = None,
    spread_factor: float = 4.0,
) -> DispersiveTable:
    """``||Q_t f||_p / ||f||_2`` over the resolved part of ``times`` plus a log-log slope.

    A time is kept when the evolved profile is at least ``spread_factor``
    times wider than the initial one (the decay regime) and at most a quarter
    of the circle wide (no wraparound).  ``sigma`` turns on the closed-form
    Gaussian column.
    """
    if p < 2:
        raise ValueError("dispersive decay needs p >= 2")
    grid = profile.grid
    warnings = []
    if central_band_fraction(profile) < 0.99:
        warnings.append("profile has < 99% of its spectral energy in the central half band")
    w0 = _width(profile)
    if w0 < 8 * grid.spacing:
        warnings.append("initial profile spans fewer than 8 cells")
    base = lp_norm(profile, 2)
    rows, dropped = [], []
    for t in times:
        evolved = q_operator(t)(profile)
        w = _width(evolved)
        if t <= 0 or w < spread_factor * w0 or w > grid.length / 4:
            dropped.append(float(t))
            continue
        oracle = gaussian_evolution_ratio(sigma, t, p) if sigma else float("nan")
        rows.append((float(t), lp_norm(evolved, p) / base, oracle))
    if not rows:
        raise ValueError("no time survives the resolution filter")
    expo = (0.0 if math.isinf(p) else 1 / p) - 0.5
    ts = np.array([r[0] for r in rows])
    ratios = np.array([r[1] for r in rows])
    slope = _fit_slope(ts, ratios)[0] if len(rows) > 1 else float("nan")
    C = float(np.max(ratios * ts ** (-expo)))
    table = tuple((t, r, C * t**expo, o) for t, r, o in rows)
    return DispersiveTable(p, table, slope, C, tuple(dropped), tuple(warnings))


@dataclass(frozen=True)
class ChainTable:
    triple: ExponentTriple
    rows: tuple  # (t, left_factorized, left, right)
    exponent: float
    predicted: float
    dropped: tuple

    header = ("t", "left_factorized", "left", "right")


def contradiction_chain_report(
    t: ExponentTriple,
    times: Sequence[float],
    grid: Optional[Grid] = None,
    sigma: float = 1.0,
    spread_factor: float = 4.0,
) -> ChainTable:
    """``<f g, h>`` (constant) against ``||Q_2t f||_p ||Q_2t g||_q ||Q_-t h||_r'``.

    The left column is also recomputed through the factorized pairing at
    each ``t``.  The fitted exponent of the right column should be
    ``1/p + 1/q + 1/r' - 3/2``.
    """
    if not classify_local_l2(t):
        raise ValueError(f"triple ({t.p:g}, {t.q:g}, {t.r:g}) is not in the local L2 range")
    grid = grid or Grid(4096, 1 / 32)
    f = g = h = gaussian(grid, sigma)
    left = pairing(f * g, h)
    w0 = _width(f)
    rows, dropped = [], []
    for s in times:
        fe, ge, he = q_operator(2 * s)(f), q_operator(2 * s)(g), q_operator(-s)(h)
        widths = [_width(x) for x in (fe, ge, he)]
        if s <= 0 or min(widths) < spread_factor * w0 or max(widths) > grid.length / 4:
            dropped.append(float(s))
            continue
        right = lp_norm(fe, t.p) * lp_norm(ge, t.q) * lp_norm(he, t.r_prime)
        rows.append((float(s), _q_factorized(s, f, g, h), left, right))
    if len(rows) < 2:
        raise ValueError("fewer than two times survive the resolution filter")
    ts = np.array([r[0] for r in rows])
    exponent = _fit_slope(ts, np.array([r[3] for r in rows]))[0]
    predicted = t.inv_p + t.inv_q + t.inv_r_prime - 1.5
    return ChainTable(t, tuple(rows), exponent, predicted, tuple(dropped))

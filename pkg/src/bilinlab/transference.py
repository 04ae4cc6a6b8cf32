"""Trigonometric polynomials on the circle and the sign-pairing inequality chain.

A :class:`TorusPoly` ``P(x) = sum_{k=1}^K c_k exp(2 pi i k x)`` is sampled at
``M`` equispaced points of ``[0, 1)``; norms are the quadrature averages
``(M^-1 sum |P|^s)^(1/s)``.

The chain compared by :func:`oscillation_contradiction_report`: if a symbol
takes values ``m_k`` along a progression with ``c_k m_k >= eps^2``, then
``eps^2 K <= sum c_k m_k = int M(Q, 1) conj(P)``, and a bounded bilinear
multiplier would give ``<= C ||Q||_p ||P||_{r'}``, which grows like
``K^(1/p' + 1/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .apply import BilinearOperator, apply_band_limited
from .grid import Grid, SampledFn
from .locall2 import IdentityReport
from .symbols import ExponentTriple, Symbol, mollify_symbol

__all__ = [
    "TorusPoly",
    "Progression",
    "OscillationSymbol",
    "dirichlet_poly",
    "random_sign_poly",
    "restrict_symbol",
    "RestrictionReport",
    "restriction_convergence",
    "pairing_identity_check",
    "torus_operator_on_constant",
    "CrossoverTable",
    "oscillation_contradiction_report",
    "essential_oscillation",
    "fit_growth_exponent",
]


def _default_m(K: int) -> int:
    return max(64, 1 << math.ceil(math.log2(16 * K)))


@dataclass(frozen=True, eq=False)
class TorusPoly:
    coeffs: np.ndarray
    M: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("need at least one coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        M = _default_m(c.size) if self.M is None else int(self.M)
        if M < 4 * c.size:
            raise ValueError(f"evaluation grid M={M} is below 4K={4 * c.size}")
        object.__setattr__(self, "M", M)

    @property
    def K(self) -> int:
        return self.coeffs.size

    def values(self) -> np.ndarray:
        """Samples at ``x_j = j / M``."""
        a = np.zeros(self.M, dtype=complex)
        a[1 : self.K + 1] = self.coeffs
        return np.fft.ifft(a) * self.M

    def norm(self, s: float) -> float:
        if not s > 0:
            raise ValueError("exponent must be positive")
        v = np.abs(self.values())
        if math.isinf(s):
            return float(v.max())
        peak = v.max()
        return float(peak * np.mean((v / peak) ** s) ** (1 / s))


def dirichlet_poly(K: int, M: Optional[int] = None) -> TorusPoly:
    if K < 1:
        raise ValueError("K must be positive")
    return TorusPoly(np.ones(K), M)


def random_sign_poly(
    K: int, r_prime: float, seed: int = 0, M: Optional[int] = None, max_tries: int = 64, slack: float = 1.2
) -> TorusPoly:
    """Random +-1 coefficients with ``||P||_{r'} <= slack * K^(1/2)``.

    Seeds ``seed, seed + 1, ...`` are tried in order; the accepted one is
    stored on the result.
    """
    if K < 1:
        raise ValueError("K must be positive")
    for attempt in range(max_tries):
        s = seed + attempt
        signs = np.random.default_rng(s).choice([-1.0, 1.0], size=K)
        P = TorusPoly(signs, M, seed=s)
        if P.norm(r_prime) <= slack * math.sqrt(K):
            return P
    raise ValueError(
        f"no sign pattern with ||P||_{r_prime:g} <= {slack} K^1/2 in {max_tries} seeds (K={K})"
    )


@dataclass(frozen=True)
class Progression:
    a: float
    h_step: float
    count: int

    def __post_init__(self):
        if self.h_step == 0:
            raise ValueError("progression step must be nonzero")
        if self.count < 1:
            raise ValueError("progression needs at least one point")

    def points(self) -> np.ndarray:
        return self.a + self.h_step * np.arange(1, self.count + 1)


def _domain(grid: Grid) -> tuple[float, float]:
    half = grid.n_points / (2 * grid.length)
    return -half, half


def restrict_symbol(
    psi: Callable[[np.ndarray], np.ndarray],
    prog: Progression,
    delta: float,
    grid: Grid,
    domain: Optional[tuple[float, float]] = None,
) -> np.ndarray:
    """Mollified ``psi`` (radius ``delta``) at the progression points."""
    lo, hi = domain or _domain(grid)
    t = prog.points()
    if t.min() - delta < lo or t.max() + delta > hi:
        raise ValueError(f"progression (with radius {delta}) leaves the domain [{lo}, {hi}]")
    return np.asarray(mollify_symbol(psi, delta, grid)(t), dtype=complex)


@dataclass(frozen=True)
class RestrictionReport:
    deltas: tuple
    values: np.ndarray  # (len(deltas), K)
    last_change: np.ndarray  # per point, between the two smallest radii
    suspect: np.ndarray  # per point, looks discontinuous


def restriction_convergence(
    psi: Callable[[np.ndarray], np.ndarray],
    prog: Progression,
    deltas: Sequence[float],
    grid: Grid,
    domain: Optional[tuple[float, float]] = None,
    jump_tol: float = 1e-2,
) -> RestrictionReport:
    """Restrictions along a decreasing radius schedule.

    A point is flagged when the sampled oscillation of ``psi`` across its
    smallest window stays above ``jump_tol`` and fails to shrink by a
    quarter from the previous window, which is how a jump looks.
    """
    deltas = tuple(sorted((float(d) for d in deltas), reverse=True))
    if len(deltas) < 2:
        raise ValueError("need at least two radii")
    vals = np.stack([restrict_symbol(psi, prog, d, grid, domain) for d in deltas])
    change = np.abs(vals[-1] - vals[-2])
    df = grid.frequency_spacing
    t = prog.points()
    osc = []
    for d in deltas[-2:]:
        offs = np.arange(-d, d + df / 2, df)
        s = np.asarray(psi(t[:, None] + offs[None, :]), dtype=complex)
        osc.append(np.array([_diameter(row) for row in s]))
    suspect = (osc[1] > jump_tol) & (osc[1] > 0.75 * osc[0])
    return RestrictionReport(deltas, vals, change, suspect)


def torus_operator_on_constant(values: Sequence[complex], M: int) -> np.ndarray:
    """``M_m(Q, 1)`` on ``M`` torus points for a symbol with ``m(k, 0) = values[k-1]``.

    The bilinear operator is applied to the Dirichlet polynomial and the
    constant function; since the second input is pure mode 0, only the
    column ``eta = 0`` of the symbol matters.
    """
    vals = np.asarray(values, dtype=complex)
    K = vals.size
    if M < 2 * K + 1:
        raise ValueError(f"M={M} aliases modes 1..{K}; need M >= {2 * K + 1}")
    grid = Grid(M, 1.0 / M)

    class _Restricted(Symbol):
        def evaluate(self, xi, eta, n):
            xi = np.asarray(xi)
            inside = (xi >= 1) & (xi <= K)
            return np.where(inside, vals[np.clip(xi - 1, 0, K - 1)], 0.0) * np.ones_like(eta)

    op = BilinearOperator(_Restricted(), grid)
    Q = SampledFn(grid, dirichlet_poly(K, M).values())
    one = SampledFn(grid, np.ones(M))
    return apply_band_limited(op, Q, one).values


def pairing_identity_check(values: Sequence[complex], signs: Sequence[float], M: int) -> IdentityReport:
    """``sum c_k m_k`` against the quadrature of ``M_m(Q, 1) * conj(P)``."""
    values = np.asarray(values, dtype=complex)
    signs = np.asarray(signs, dtype=float)
    if values.shape != signs.shape:
        raise ValueError(f"{values.size} symbol values but {signs.size} signs")
    lhs = complex(np.sum(signs * values))
    P = TorusPoly(signs, M)
    rhs = complex(np.mean(torus_operator_on_constant(values, M) * np.conj(P.values())))
    return IdentityReport(
        "torus_pairing", abs(lhs - rhs) / max(1.0, abs(lhs)), f"K={values.size}, M={M}"
    )


@dataclass(frozen=True, eq=False)
class OscillationSymbol:
    """``m = 9 |psi - c|^2 - 3 eps^2`` on samples of ``psi``."""

    psi: np.ndarray
    c: complex
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        object.__setattr__(self, "psi", np.asarray(self.psi, dtype=complex))

    @property
    def m(self) -> np.ndarray:
        return 9 * np.abs(self.psi - self.c) ** 2 - 3 * self.eps**2

    @property
    def near(self) -> np.ndarray:
        """Samples within ``eps/3`` of ``c``."""
        return np.abs(self.psi - self.c) < self.eps / 3

    @property
    def far(self) -> np.ndarray:
        """Samples farther than ``2 eps/3`` from ``c``."""
        return np.abs(self.psi - self.c) > 2 * self.eps / 3

    def sign_structure_holds(self) -> bool:
        m, e2 = self.m, self.eps**2
        return bool(np.all(m[self.near] < -e2) and np.all(m[self.far] > e2))


def fit_growth_exponent(Ks, vals) -> tuple[float, float]:
    """Least-squares ``(exponent, constant)`` for ``vals ~ constant * K^exponent``."""
    e, b = np.polyfit(np.log(np.asarray(Ks, float)), np.log(np.asarray(vals, float)), 1)
    return float(e), float(math.exp(b))


@dataclass(frozen=True)
class CrossoverTable:
    triple: ExponentTriple
    eps: float
    rows: tuple  # (K, left, left_pairing, right, fitted_right, seed)
    right_exponent: float
    predicted_exponent: float
    crossover: Optional[int]
    status: str

    header = ("K", "left", "left_pairing", "right", "fitted_right", "seed")


def oscillation_contradiction_report(
    t: ExponentTriple,
    eps: float,
    k_schedule: Sequence[int] = tuple(2**j for j in range(1, 9)),
    c: complex = 0.0,
    seed: int = 0,
    M: Optional[int] = None,
) -> CrossoverTable:
    """Left side ``sum c_k m_k`` against ``||Q||_p ||P||_{r'}`` along ``k_schedule``.

    For each ``K`` a random sign pattern ``c_k`` with small ``||P||_{r'}`` is
    drawn and a synthetic two-level ``psi`` is placed on the progression
    ``t_k = k``: ``psi = c`` where ``c_k = -1`` and ``psi = c + eps`` where
    ``c_k = +1``.  Then ``c_k m_k >= eps^2`` for every ``k``.  The crossover
    is the first ``K`` where the left side beats the power-law fit of the
    right side; when ``1/p' + 1/2 = 1`` the growth rates tie and the table
    is marked ``boundary``.
    """
    rows = []
    for K in k_schedule:
        P = random_sign_poly(K, t.r_prime, seed=seed, M=M)
        signs = P.coeffs.real
        prog = Progression(0.0, 1.0, K)
        psi = np.where(signs > 0, c + eps, c) * np.ones(prog.count)
        osc = OscillationSymbol(psi, c, eps)
        if not osc.sign_structure_holds():
            raise ValueError("synthetic symbol violates its level-set signs")
        m = osc.m
        if np.any(signs * m < eps**2):
            raise ValueError("sign pattern does not give c_k m_k >= eps^2")
        left = float(np.sum(signs * m))
        paired = np.mean(torus_operator_on_constant(m, P.M) * np.conj(P.values())).real
        right = dirichlet_poly(K, P.M).norm(t.p) * P.norm(t.r_prime)
        rows.append([K, left, float(paired), right, P.seed])
    Ks = [r[0] for r in rows]
    expo, const = fit_growth_exponent(Ks, [r[3] for r in rows])
    predicted = (1 - t.inv_p) + 0.5
    table = []
    crossover = None
    for K, left, paired, right, s in rows:
        fitted = const * K**expo
        if crossover is None and left > fitted:
            crossover = K
        table.append((K, left, paired, right, fitted, s))
    if abs(predicted - 1) < 1e-12:
        status = "boundary"
    elif predicted < 1:
        status = "crossover" if crossover is not None else "no crossover in schedule"
    else:
        status = "no contradiction predicted"
    return CrossoverTable(t, eps, tuple(table), expo, predicted, crossover, status)


def essential_oscillation(psi: np.ndarray, xs: np.ndarray, x: float, radii: Sequence[float]) -> list[float]:
    """``max |psi(y) - psi(y')|`` over samples with ``|y - x| <= radius``, per radius."""
    psi = np.asarray(psi, dtype=complex)
    xs = np.asarray(xs, dtype=float)
    out = []
    for radius in radii:
        s = psi[np.abs(xs - x) <= radius]
        if s.size == 0:
            raise ValueError(f"no samples within {radius} of {x}")
        out.append(_diameter(s))
    return out


def _diameter(s: np.ndarray) -> float:
    if np.all(s.imag == 0):
        return float(s.real.max() - s.real.min())
    return float(np.abs(s[:, None] - s[None, :]).max())

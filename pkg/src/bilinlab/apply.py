"""Applying bilinear multipliers and the linear modulation operators.

``T_m(f, g)[x_j] = N**-2 * sum_{xi, eta} m(xi, eta) F(xi) G(eta) exp(2 pi i j (xi + eta) / N)``
where ``F = dft(f)``, ``G = dft(g)`` and the sum runs over centered labels.
Sums of labels wrap modulo ``N``; every identity here is exact on the
discrete torus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grid import Grid, SampledFn, VectorSampledFn
from .symbols import Difference, General, Symbol

__all__ = [
    "MAX_TABLE_POINTS",
    "BilinearOperator",
    "apply_naive",
    "apply_fast_general",
    "apply_fast_difference",
    "apply_band_limited",
    "apply_vector",
    "pairing",
    "LinearModulationOp",
    "q_operator",
    "l_sigma",
    "l_sigma_bar",
    "schrodinger_q",
]

MAX_TABLE_POINTS = 4096


@dataclass(frozen=True, eq=False)
class BilinearOperator:
    """A symbol bound to a grid.

    For :class:`Difference` symbols the kernel ``psi_check`` used by
    :func:`apply_fast_difference` is computed once, here.
    """

    symbol: Symbol
    grid: Grid
    allow_large: bool = False
    psi_check: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        n = self.grid.n_points
        if isinstance(self.symbol, General) and self.symbol.n != n:
            raise ValueError(f"symbol table is {self.symbol.n}x{self.symbol.n}, grid has {n} points")
        if isinstance(self.symbol, Difference):
            psi = np.asarray(self.symbol.psi(self.grid.frequencies()), dtype=complex)
            kernel = np.fft.ifft(psi * np.ones(n))
            kernel.setflags(write=False)
            object.__setattr__(self, "psi_check", kernel)

    @property
    def n(self) -> int:
        return self.grid.n_points

    def table(self) -> np.ndarray:
        if self.n > MAX_TABLE_POINTS and not self.allow_large:
            raise ValueError(
                f"N = {self.n} exceeds the {MAX_TABLE_POINTS}-point cap for dense "
                "symbol tables; pass allow_large=True to override"
            )
        return self.symbol.sample(self.n)

    def __call__(self, f: SampledFn, g: SampledFn) -> SampledFn:
        return apply_auto(self, f, g)


def _check(op: BilinearOperator, *fs: SampledFn) -> None:
    for f in fs:
        if f.grid != op.grid:
            raise ValueError(f"grid mismatch: operator on {op.grid}, function on {f.grid}")


def pairing(u: SampledFn, v: SampledFn) -> complex:
    """Bilinear pairing ``h * sum u*v`` (no conjugation)."""
    if u.grid != v.grid:
        raise ValueError("grid mismatch")
    return complex(u.grid.spacing * np.sum(u.values * v.values))


def apply_naive(op: BilinearOperator, f: SampledFn, g: SampledFn) -> SampledFn:
    """Reference oracle: literal double sum per output site, O(N^3).

    The transforms are explicit DFT sums too, so nothing here touches an FFT.
    """
    _check(op, f, g)
    n = op.n
    labels = op.grid.frequencies()
    j = np.arange(n)
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    forward = np.conj(roots)[np.outer(labels, j) % n]
    F = forward @ f.values
    G = forward @ g.values
    weights = op.symbol.evaluate(labels[:, None], labels[None, :], n) * np.outer(F, G)
    total = labels[:, None] + labels[None, :]
    out = np.empty(n, dtype=complex)
    for x in range(n):
        out[x] = np.sum(weights * roots[(x * total) % n])
    return SampledFn(op.grid, out / n**2)


def _diagonal_sums(B: np.ndarray) -> np.ndarray:
    # C[s] = sum_i B[i, (s - i) mod n]
    n = B.shape[0]
    i = np.arange(n)
    cols = (i[None, :] - i[:, None]) % n
    return B[i[:, None], cols].sum(axis=0)


def apply_fast_general(op: BilinearOperator, f: SampledFn, g: SampledFn) -> SampledFn:
    """O(N^2) sums along ``xi + eta = sigma`` followed by one inverse FFT."""
    _check(op, f, g)
    F = np.fft.fft(f.values)
    G = np.fft.fft(g.values)
    C = _diagonal_sums(op.table() * np.outer(F, G))
    return SampledFn(op.grid, np.fft.ifft(C) / op.n)


def apply_fast_difference(op, f: SampledFn, g: SampledFn, chunk: int = 1 << 22) -> SampledFn:
    """``sum_t psi_check(t) f(x - t) g(x + t)`` for a difference symbol.

    ``op`` is a :class:`BilinearOperator` with a :class:`Difference` symbol,
    or a bare ``psi`` callable (then the kernel is built on the fly).
    """
    if isinstance(op, BilinearOperator):
        if op.psi_check is None:
            raise TypeError("apply_fast_difference needs a Difference symbol")
        _check(op, f, g)
        kernel = op.psi_check
    else:
        if f.grid != g.grid:
            raise ValueError("grid mismatch")
        kernel = BilinearOperator(Difference(op), f.grid).psi_check
    n = f.grid.n_points
    x = np.arange(n)
    out = np.zeros(n, dtype=complex)
    rows = max(1, chunk // n)
    for start in range(0, n, rows):
        t = np.arange(start, min(n, start + rows))
        fv = f.values[(x[None, :] - t[:, None]) % n]
        gv = g.values[(x[None, :] + t[:, None]) % n]
        out += np.einsum("t,tx,tx->x", kernel[t], fv, gv)
    return SampledFn(f.grid, out)


def _support(coeffs: np.ndarray, rel_tol: float) -> np.ndarray:
    mag = np.abs(coeffs)
    peak = mag.max()
    if peak == 0:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(mag > rel_tol * peak)


def apply_band_limited(
    op: BilinearOperator, f: SampledFn, g: SampledFn, rel_tol: float = 1e-13, chunk: int = 1 << 22
) -> SampledFn:
    """Sum only over spectral supports; O(|supp F| * |supp G| + N log N).

    Coefficients below ``rel_tol`` times the spectral peak are treated as
    zero, which is exact for inputs built from finitely supported spectra up
    to FFT round-off.
    """
    _check(op, f, g)
    n = op.n
    F = np.fft.fft(f.values)
    G = np.fft.fft(g.values)
    sf, sg = _support(F, rel_tol), _support(G, rel_tol)
    C = np.zeros(n, dtype=complex)
    labels = op.grid.frequencies()
    rows = max(1, chunk // max(1, sg.size))
    for start in range(0, sf.size, rows):
        a = sf[start : start + rows]
        m = op.symbol.evaluate(labels[a][:, None], labels[sg][None, :], n)
        w = (m * np.outer(F[a], G[sg])).ravel()
        s = ((a[:, None] + sg[None, :]) % n).ravel()
        C += np.bincount(s, weights=w.real, minlength=n)
        C += 1j * np.bincount(s, weights=w.imag, minlength=n)
    return SampledFn(op.grid, np.fft.ifft(C) / n)


def apply_auto(op: BilinearOperator, f: SampledFn, g: SampledFn) -> SampledFn:
    n = op.n
    nf = _support(np.fft.fft(f.values), 1e-13).size
    ng = _support(np.fft.fft(g.values), 1e-13).size
    if nf * ng <= n * n // 8:
        return apply_band_limited(op, f, g)
    if op.psi_check is not None:
        return apply_fast_difference(op, f, g)
    return apply_fast_general(op, f, g)


_METHODS: dict[str, Callable] = {
    "naive": apply_naive,
    "general": apply_fast_general,
    "difference": apply_fast_difference,
    "band_limited": apply_band_limited,
    "auto": apply_auto,
}


def apply_vector(
    op: BilinearOperator, F: VectorSampledFn, G: VectorSampledFn, method: str = "auto"
) -> VectorSampledFn:
    """Componentwise ``T(F_k, G_k)``."""
    if F.n_components != G.n_components:
        raise ValueError(f"component counts differ: {F.n_components} vs {G.n_components}")
    if F.grid != op.grid or G.grid != op.grid:
        raise ValueError("grid mismatch")
    apply = _METHODS[method]
    rows = [apply(op, f, g).values for f, g in zip(F.components, G.components)]
    return VectorSampledFn(op.grid, np.stack(rows))


# ---------------------------------------------------------------------------
# linear Fourier multipliers


@dataclass(frozen=True, eq=False)
class LinearModulationOp:
    """Linear multiplier; ``multiplier`` maps angular frequencies ``2 pi k / L`` to C."""

    multiplier: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    def table(self, grid: Grid) -> np.ndarray:
        xi = 2 * np.pi * grid.frequencies() / grid.length
        return np.asarray(self.multiplier(xi), dtype=complex) * np.ones(grid.n_points)

    def apply(self, f: SampledFn) -> SampledFn:
        return SampledFn(f.grid, np.fft.ifft(self.table(f.grid) * np.fft.fft(f.values)))

    __call__ = apply

    def compose(self, other: "LinearModulationOp") -> "LinearModulationOp":
        a, b = self.multiplier, other.multiplier
        return LinearModulationOp(lambda xi: a(xi) * b(xi), f"{self.name}*{other.name}")


def q_operator(t: float) -> LinearModulationOp:
    """Free Schroedinger propagator ``exp(i t |xi|^2)``."""
    return LinearModulationOp(lambda xi: np.exp(1j * t * xi * xi), f"Q_{t:g}")


def l_sigma() -> LinearModulationOp:
    return LinearModulationOp(lambda xi: np.exp(1j * xi * xi), "L_sigma")


def l_sigma_bar() -> LinearModulationOp:
    return LinearModulationOp(lambda xi: np.exp(-1j * xi * xi), "L_sigma_bar")


def schrodinger_q(t: float, f: SampledFn) -> SampledFn:
    return q_operator(t).apply(f)

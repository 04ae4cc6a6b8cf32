"""Exponent triples, phase functions, bilinear symbols and their transforms.

Symbols are functions of two integer frequency labels ``(xi, eta)`` on an
``N``-point grid.  Label arithmetic is modulo ``N`` and reduced into the
centered residue system (see :func:`bilinlab.grid.wrap_frequency`).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import Grid, wrap_frequency

__all__ = [
    "ExponentTriple",
    "classify_local_l2",
    "gamma",
    "Phase",
    "linear_phase",
    "quadratic_phase",
    "abs_phase",
    "cubic_phase",
    "piecewise_linear_phase",
    "phase_library",
    "check_phase_gradient",
    "Symbol",
    "Difference",
    "Product",
    "General",
    "Reindexed",
    "UnimodularPhaseSymbol",
    "adjoint_symbol_1",
    "adjoint_symbol_2",
    "mollify_symbol",
    "save_symbol_csv",
    "load_symbol_csv",
    "save_symbol_binary",
    "load_symbol_binary",
]

HOLDER_TOL = 1e-12


def _recip(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


@dataclass(frozen=True)
class ExponentTriple:
    """``(p, q, r)`` with ``1/p + 1/q = 1/r`` and all exponents in ``(0, inf]``."""

    p: float
    q: float
    r: float
    tol: float = field(default=HOLDER_TOL, repr=False, compare=False)

    def __post_init__(self):
        for name in ("p", "q", "r"):
            v = float(getattr(self, name))
            if not v > 0:
                raise ValueError(f"exponent {name} must lie in (0, inf], got {v}")
            object.__setattr__(self, name, v)
        defect = abs(_recip(self.p) + _recip(self.q) - _recip(self.r))
        if defect > self.tol:
            raise ValueError(
                f"Hoelder condition 1/p+1/q=1/r violated by {defect:.3g} "
                f"for (p, q, r) = ({self.p}, {self.q}, {self.r})"
            )

    @classmethod
    def from_pq(cls, p: float, q: float) -> "ExponentTriple":
        s = _recip(p) + _recip(q)
        return cls(p, q, math.inf if s == 0 else 1.0 / s)

    @classmethod
    def from_fractions(cls, p, q, r, tol: float = 1e-9) -> "ExponentTriple":
        """Build from exact ``Fraction``/int/inf values, checking Hoelder exactly when possible."""
        vals = [x if isinstance(x, float) and math.isinf(x) else Fraction(x) for x in (p, q, r)]
        inv = [Fraction(0) if isinstance(x, float) else 1 / x for x in vals]
        if all(isinstance(x, Fraction) for x in inv) and inv[0] + inv[1] != inv[2]:
            gap = abs(float(inv[0] + inv[1] - inv[2]))
            if gap > tol:
                raise ValueError(
                    f"Hoelder condition 1/p+1/q=1/r violated by {gap:.3g} "
                    f"for (p, q, r) = ({p}, {q}, {r})"
                )
        return cls(*(float(x) for x in vals), tol=tol)

    @property
    def inv_p(self) -> float:
        return _recip(self.p)

    @property
    def inv_q(self) -> float:
        return _recip(self.q)

    @property
    def inv_r(self) -> float:
        return _recip(self.r)

    @property
    def inv_r_prime(self) -> float:
        """``1 - 1/r``; negative when ``r < 1``."""
        return 1.0 - self.inv_r

    @property
    def r_prime(self) -> float:
        s = self.inv_r_prime
        return math.inf if s == 0 else 1.0 / s

    @property
    def p_prime(self) -> float:
        s = 1.0 - self.inv_p
        return math.inf if s == 0 else 1.0 / s

    @property
    def q_prime(self) -> float:
        s = 1.0 - self.inv_q
        return math.inf if s == 0 else 1.0 / s

    @property
    def gamma(self) -> float:
        return max(self.inv_p, self.inv_q, self.inv_r_prime)

    def first_adjoint(self) -> "ExponentTriple":
        """``(r', q, p')``: the exponents of the first adjoint operator."""
        if self.r < 1 or self.p < 1:
            raise ValueError("adjoint exponents need p >= 1 and r >= 1")
        return ExponentTriple(self.r_prime, self.q, self.p_prime, tol=1e-9)

    def second_adjoint(self) -> "ExponentTriple":
        if self.r < 1 or self.q < 1:
            raise ValueError("adjoint exponents need q >= 1 and r >= 1")
        return ExponentTriple(self.p, self.r_prime, self.q_prime, tol=1e-9)

    def swapped(self) -> "ExponentTriple":
        return ExponentTriple(self.q, self.p, self.r, tol=self.tol)


def classify_local_l2(t: ExponentTriple) -> bool:
    """True iff ``p, q, r' >= 2`` (boundary included)."""
    eps = 1e-12
    return (
        t.inv_p <= 0.5 + eps
        and t.inv_q <= 0.5 + eps
        and -eps <= t.inv_r_prime <= 0.5 + eps
    )


def gamma(t: ExponentTriple) -> float:
    """``max{1/p, 1/q, 1/r'}``."""
    return t.gamma


# ---------------------------------------------------------------------------
# phases


@dataclass(frozen=True, eq=False)
class Phase:
    """Real phase ``phi`` with a user-supplied derivative.

    ``pieces`` lists the intervals on which an exactly piecewise-linear phase
    is affine; it is empty for smooth phases.
    """

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    is_linear: bool = False
    pieces: tuple = ()
    singular_points: tuple = ()

    def __call__(self, t):
        return self.evaluator(np.asarray(t, dtype=float))

    def grad(self, t):
        return self.gradient(np.asarray(t, dtype=float))


def linear_phase(a: float, b: float = 0.0) -> Phase:
    return Phase(
        f"linear({a:g},{b:g})",
        lambda t: a * t + b,
        lambda t: np.full_like(t, a, dtype=float),
        is_linear=True,
    )


def quadratic_phase() -> Phase:
    return Phase("quadratic", lambda t: t * t, lambda t: 2.0 * t)


def cubic_phase() -> Phase:
    return Phase("cubic", lambda t: t**3, lambda t: 3.0 * t * t)


def abs_phase() -> Phase:
    # derivative is +-1 away from 0; sign(0) = 0 is a convention only
    return Phase("abs", np.abs, np.sign, singular_points=(0.0,))


def piecewise_linear_phase(
    slopes: Sequence[float],
    window: tuple[float, float] = (-1.0, 1.0),
    breakpoints: Optional[Sequence[float]] = None,
    offset: float = 0.0,
) -> Phase:
    """Continuous phase with slope ``slopes[k]`` on the ``k``-th piece.

    Without explicit ``breakpoints`` the window is cut into equal pieces.
    Beyond the window the first and last slopes continue.
    """
    slopes = np.asarray(slopes, dtype=float)
    lo, hi = map(float, window)
    if breakpoints is None:
        edges = np.linspace(lo, hi, len(slopes) + 1)
    else:
        edges = np.asarray(breakpoints, dtype=float)
        if len(edges) != len(slopes) + 1:
            raise ValueError("need len(slopes) + 1 breakpoints")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("breakpoints must increase")
    # value at each left edge, continuous across pieces
    base = offset + np.concatenate([[0.0], np.cumsum(slopes * np.diff(edges))])[:-1]

    def piece(t):
        return np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(slopes) - 1)

    def value(t):
        k = piece(t)
        return base[k] + slopes[k] * (t - edges[k])

    def grad(t):
        return slopes[piece(t)]

    return Phase(
        f"piecewise_linear({len(slopes)})",
        value,
        grad,
        is_linear=len(set(slopes.tolist())) == 1,
        pieces=tuple((float(a), float(b)) for a, b in zip(edges[:-1], edges[1:])),
        singular_points=tuple(float(e) for e in edges[1:-1]),
    )


def phase_library() -> dict[str, Phase]:
    """The built-in phases keyed by name (``linear`` is ``t -> t``)."""
    return {
        "linear": linear_phase(1.0, 0.0),
        "quadratic": quadratic_phase(),
        "abs": abs_phase(),
        "cubic": cubic_phase(),
        "piecewise_linear": piecewise_linear_phase([0.0, 1.0]),
    }


def check_phase_gradient(
    phase: Phase, points, rtol: float = 1e-6, exclusion: float = 1e-3
) -> float:
    """Largest relative gap between ``phase.grad`` and centered differences.

    Points within ``exclusion`` of a singular point are skipped.
    """
    t = np.asarray(points, dtype=float)
    for s in phase.singular_points:
        t = t[np.abs(t - s) > exclusion]
    step = 1e-5 * np.maximum(1.0, np.abs(t))
    fd = (phase(t + step) - phase(t - step)) / (2 * step)
    g = phase.grad(t)
    err = np.abs(fd - g) / np.maximum(1.0, np.abs(g))
    return float(err.max()) if err.size else 0.0


# ---------------------------------------------------------------------------
# symbols


class Symbol:
    """A function ``m(xi, eta)`` of integer frequency labels on an ``N``-point grid."""

    def evaluate(self, xi, eta, n: int) -> np.ndarray:
        raise NotImplementedError

    def sample(self, n: int) -> np.ndarray:
        """``(n, n)`` table in FFT storage order on both axes."""
        k = np.rint(np.fft.fftfreq(n) * n).astype(np.int64)
        return np.asarray(self.evaluate(k[:, None], k[None, :], n), dtype=complex) * np.ones((n, n))

    def to_general(self, n: int) -> "General":
        return General(self.sample(n))


@dataclass(frozen=True, eq=False)
class Difference(Symbol):
    """``m(xi, eta) = psi(xi - eta)``; ``psi`` takes wrapped integer labels."""

    psi: Callable[[np.ndarray], np.ndarray]

    def evaluate(self, xi, eta, n):
        return self.psi(wrap_frequency(np.asarray(xi) - np.asarray(eta), n))


@dataclass(frozen=True, eq=False)
class Product(Symbol):
    a: Callable[[np.ndarray], np.ndarray]
    b: Callable[[np.ndarray], np.ndarray]

    def evaluate(self, xi, eta, n):
        return self.a(wrap_frequency(xi, n)) * self.b(wrap_frequency(eta, n))


@dataclass(frozen=True, eq=False)
class General(Symbol):
    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=complex)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise ValueError(f"symbol table must be square, got {table.shape}")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def n(self) -> int:
        return self.table.shape[0]

    def evaluate(self, xi, eta, n):
        if n != self.n:
            raise ValueError(f"table is {self.n}x{self.n}, grid has {n} points")
        return self.table[np.asarray(xi) % n, np.asarray(eta) % n]

    def sample(self, n):
        if n != self.n:
            raise ValueError(f"table is {self.n}x{self.n}, grid has {n} points")
        return self.table


@dataclass(frozen=True, eq=False)
class Reindexed(Symbol):
    """``m(a, b) = base(c11*a + c12*b, c21*a + c22*b)`` with wrapped labels."""

    base: Symbol
    matrix: tuple

    def evaluate(self, xi, eta, n):
        (c11, c12), (c21, c22) = self.matrix
        xi, eta = np.asarray(xi), np.asarray(eta)
        return self.base.evaluate(
            wrap_frequency(c11 * xi + c12 * eta, n), wrap_frequency(c21 * xi + c22 * eta, n), n
        )


_ADJ1 = ((-1, -1), (0, 1))
_ADJ2 = ((1, 0), (-1, -1))


def _compose(outer, inner):
    # outer(a, b) = inner-transformed symbol evaluated at (outer . (a, b))
    return tuple(
        tuple(sum(inner[i][k] * outer[k][j] for k in range(2)) for j in range(2))
        for i in range(2)
    )


def _reindex(m: Symbol, matrix) -> Symbol:
    if isinstance(m, General):
        n = m.n
        i = np.arange(n)
        (c11, c12), (c21, c22) = matrix
        rows = (c11 * i[:, None] + c12 * i[None, :]) % n
        cols = (c21 * i[:, None] + c22 * i[None, :]) % n
        return General(m.table[rows, cols])
    if isinstance(m, Reindexed):
        return Reindexed(m.base, _compose(matrix, m.matrix))
    return Reindexed(m, matrix)


def adjoint_symbol_1(m: Symbol) -> Symbol:
    """Symbol of the first adjoint: ``m~(a, b) = m(-a-b, b)``.

    With the pairing ``<u, v> = h * sum u*v`` (no conjugation) this gives
    ``<T_m(f, g), h> = <T_m~(h, g), f>`` exactly.
    """
    return _reindex(m, _ADJ1)


def adjoint_symbol_2(m: Symbol) -> Symbol:
    """``m~(a, b) = m(a, -a-b)``, so ``<T_m(f, g), h> = <T_m~(f, h), g>``."""
    return _reindex(m, _ADJ2)


@dataclass(frozen=True, eq=False)
class UnimodularPhaseSymbol:
    """``exp(i*lam*phi(xi - eta))`` with ``phi`` read at physical frequency ``k/L``."""

    phase: Phase
    lam: float

    def psi(self, grid: Grid) -> Callable[[np.ndarray], np.ndarray]:
        L, lam, phase = grid.length, self.lam, self.phase
        return lambda u: np.exp(1j * lam * phase(np.asarray(u) / L))

    def symbol(self, grid: Grid) -> Difference:
        return Difference(self.psi(grid))


# ---------------------------------------------------------------------------
# mollification


def mollify_symbol(
    psi: Callable[[np.ndarray], np.ndarray], delta: float, grid: Grid
) -> Callable[[np.ndarray], np.ndarray]:
    """Moving average of ``psi`` over ``[x - delta, x + delta]``.

    ``psi`` is read at physical frequencies.  The average is a trapezoid sum
    over the nodes ``x + j/L`` inside the window plus the two window edges.
    """
    df = grid.frequency_spacing
    if delta < df * (1 - 1e-12):
        raise ValueError(
            f"mollification radius {delta} is below one frequency cell ({df})"
        )
    J = int(math.floor(delta / df + 1e-9))
    inner = np.arange(-J, J + 1) * df
    inner = inner[np.abs(inner) < delta * (1 - 1e-12)]
    offsets = np.concatenate([[-delta], inner, [delta]])

    def averaged(x):
        x = np.asarray(x, dtype=float)
        nodes = x[..., None] + offsets
        vals = np.asarray(psi(nodes), dtype=complex)
        return np.trapezoid(vals, offsets, axis=-1) / (2 * delta)

    return averaged


# ---------------------------------------------------------------------------
# serialization: row-major over centered labels (increasing xi, then eta)


def _centered_table(table: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(table)


def save_symbol_csv(m: Symbol, n: int, path) -> None:
    table = _centered_table(m.sample(n))
    labels = np.fft.fftshift(np.rint(np.fft.fftfreq(n) * n).astype(int))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["xi", "eta", "re", "im"])
        for i, xi in enumerate(labels):
            for j, eta in enumerate(labels):
                z = table[i, j]
                w.writerow([int(xi), int(eta), repr(float(z.real)), repr(float(z.imag))])


def load_symbol_csv(path) -> General:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n = math.isqrt(len(rows))
    if n * n != len(rows):
        raise ValueError(f"{path}: {len(rows)} entries is not a square table")
    vals = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows]).reshape(n, n)
    return General(np.fft.ifftshift(vals))


def save_symbol_binary(m: Symbol, n: int, path) -> None:
    """Raw little-endian complex128, row-major over centered labels."""
    Path(path).write_bytes(_centered_table(m.sample(n)).astype("<c16").tobytes())


def load_symbol_binary(path) -> General:
    flat = np.frombuffer(Path(path).read_bytes(), dtype="<c16")
    n = math.isqrt(flat.size)
    if n * n != flat.size:
        raise ValueError(f"{path}: {flat.size} entries is not a square table")
    return General(np.fft.ifftshift(flat.reshape(n, n)))

"""Explicit witness families and the lower-bound certificates they produce.

Every certificate is an evaluated Rayleigh ratio

    ||{T(f_k, g_k)}||_{L^r(l^2)} / (||{f_k}||_{L^p(l^2)} * ||{g_k}||_{L^q(l^2)})

so it bounds the discrete operator norm from below no matter how the
witness was chosen.

Geometry used throughout: one input family is *stacked* (all components sit
at the origin) and the other is *spread*, placed so that each product lands
on its own translate.  Outputs are then (nearly) disjoint and the ratio picks
up a factor ``K**(1/p_stacked - 1/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .apply import BilinearOperator, apply_band_limited
from .grid import Grid, SampledFn, VectorSampledFn, lp_l2_norm
from .symbols import (
    Difference,
    ExponentTriple,
    Phase,
    Symbol,
    adjoint_symbol_1,
    classify_local_l2,
)

__all__ = [
    "ShiftWitness",
    "BumpFamily",
    "BoundCertificate",
    "BlowupRow",
    "rayleigh_ratio",
    "reference_bump",
    "shift_operator_ratio",
    "best_shift_ratio",
    "build_bump_family",
    "certify_lower_bound",
    "default_k_schedule",
    "blowup_curve",
    "CURVE_HEADER",
    "integer_shift_slopes",
]


def reference_bump(t):
    """``(1 - t^2)^4`` on ``[-1, 1]``, zero outside."""
    t = np.asarray(t, dtype=float)
    return np.where(np.abs(t) < 1, (1 - t * t) ** 4, 0.0)


def rayleigh_ratio(out: VectorSampledFn, F: VectorSampledFn, G: VectorSampledFn, t: ExponentTriple) -> float:
    den = lp_l2_norm(F, t.p) * lp_l2_norm(G, t.q)
    if den == 0 or not math.isfinite(den):
        return float("nan")
    return lp_l2_norm(out, t.r) / den


@dataclass(frozen=True, eq=False)
class BoundCertificate:
    """A witness pair of families together with its evaluated ratio.

    ``evaluator`` recomputes the operator output from ``(F, G)`` so that
    :meth:`reevaluate` can confirm the stored number.
    """

    triple: ExponentTriple
    lower_bound: float
    description: str
    F: VectorSampledFn
    G: VectorSampledFn
    evaluator: Callable[[VectorSampledFn, VectorSampledFn], VectorSampledFn] = field(repr=False)
    metadata: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.lower_bound

    def reevaluate(self) -> float:
        return rayleigh_ratio(self.evaluator(self.F, self.G), self.F, self.G, self.triple)

    def to_dict(self) -> dict:
        t = self.triple
        return {
            "p": t.p,
            "q": t.q,
            "r": t.r,
            "gamma": t.gamma,
            "lower_bound": self.lower_bound,
            "description": self.description,
            "n_components": self.F.n_components,
            "n_points": self.F.grid.n_points,
            "spacing": self.F.grid.spacing,
            **{k: v for k, v in self.metadata.items() if _jsonable(v)},
        }


def _jsonable(v) -> bool:
    return isinstance(v, (int, float, str, bool, type(None))) or (
        isinstance(v, (list, tuple)) and all(isinstance(x, (int, float, str)) for x in v)
    )


# ---------------------------------------------------------------------------
# shifted indicators


def _as_sites(x: float, h: float, what: str) -> int:
    s = x / h
    k = round(s)
    if abs(s - k) > 1e-9 * max(1.0, abs(s)):
        raise ValueError(f"{what} = {x} is not an integer multiple of the spacing {h}")
    return int(k)


@dataclass(frozen=True)
class ShiftWitness:
    """Indicators of width ``delta`` shifted by ``rho * alpha_k`` and ``alpha_k``.

    ``delta`` is the full support width, so ``rho * |alpha_i - alpha_j| > delta``
    keeps the translated supports apart.  All lengths must be whole numbers
    of grid cells.
    """

    alphas: tuple
    rho: float
    delta: float
    grid: Grid

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.alphas:
            raise ValueError("need at least one shift")
        if len(set(self.alphas)) != len(self.alphas):
            raise ValueError("shifts alpha_k must be distinct")
        if not (self.rho > 0 and self.delta > 0):
            raise ValueError("rho and delta must be positive")
        a = np.array(self.alphas)
        gaps = np.abs(a[:, None] - a[None, :])[~np.eye(len(a), dtype=bool)]
        if gaps.size and not np.all(self.rho * gaps > self.delta):
            raise ValueError("need rho * |alpha_i - alpha_j| > delta for all i != j")
        h, n = self.grid.spacing, self.grid.n_points
        width = _as_sites(self.delta, h, "delta")
        lead = [_as_sites(self.rho * x, h, "rho*alpha") for x in self.alphas]
        if width * len(a) > n:
            raise ValueError("supports do not fit on the grid")
        # output supports start at -rho*alpha_k, spread inputs at -(1+rho)*alpha_k
        back = [_as_sites(x, h, "alpha") for x in self.alphas]
        _require_disjoint([[-s for s in lead], [-s - b for s, b in zip(lead, back)]], width, n)

    @property
    def n_components(self) -> int:
        return len(self.alphas)

    @property
    def width_sites(self) -> int:
        return _as_sites(self.delta, self.grid.spacing, "delta")

    def indicator(self, start_site: int) -> SampledFn:
        n = self.grid.n_points
        v = np.zeros(n)
        v[(start_site + np.arange(self.width_sites)) % n] = 1.0
        return SampledFn(self.grid, v)


def _require_disjoint(layouts, width: int, n: int) -> None:
    for starts in layouts:
        occupied = np.zeros(n, dtype=int)
        for s in starts:
            occupied[(s + np.arange(width)) % n] += 1
        if occupied.max() > 1:
            raise ValueError("shifted supports overlap after wrapping around the grid")


def _shift_apply(w: ShiftWitness):
    h = w.grid.spacing
    lead = [_as_sites(w.rho * a, h, "rho*alpha") for a in w.alphas]
    back = [_as_sites(a, h, "alpha") for a in w.alphas]

    def evaluate(F: VectorSampledFn, G: VectorSampledFn) -> VectorSampledFn:
        rows = [
            f.roll(s).values * g.roll(-b).values
            for f, g, s, b in zip(F.components, G.components, lead, back)
        ]
        return VectorSampledFn(w.grid, np.stack(rows))

    return evaluate, lead, back


def shift_operator_ratio(w: ShiftWitness, t: ExponentTriple, swap_roles: bool = False) -> BoundCertificate:
    """Ratio of ``S(f, g)_k = f_k(x + rho*alpha_k) * g_k(x - alpha_k)``.

    By default the ``f_k`` are stacked at the origin and the ratio is
    ``K**(1/p - 1/2)``; with ``swap_roles`` the ``g_k`` are stacked and it is
    ``K**(1/q - 1/2)``.
    """
    evaluate, lead, back = _shift_apply(w)
    origin = w.indicator(0)
    if swap_roles:
        # outputs now sit at +alpha_k, spread inputs at (1+rho)*alpha_k
        _require_disjoint([back, [s + b for s, b in zip(lead, back)]], w.width_sites, w.grid.n_points)
        F = [w.indicator(s + b) for s, b in zip(lead, back)]
        G = [origin] * w.n_components
    else:
        F = [origin] * w.n_components
        G = [w.indicator(-s - b) for s, b in zip(lead, back)]
    F, G = VectorSampledFn.from_components(F), VectorSampledFn.from_components(G)
    ratio = rayleigh_ratio(evaluate(F, G), F, G, t)
    stacked = t.inv_q if swap_roles else t.inv_p
    return BoundCertificate(
        t,
        ratio,
        f"shifted indicators, K={w.n_components}, {'g' if swap_roles else 'f'} stacked",
        F,
        G,
        evaluate,
        {"predicted": w.n_components ** (stacked - 0.5), "swap_roles": swap_roles},
    )


def best_shift_ratio(w: ShiftWitness, t: ExponentTriple) -> BoundCertificate:
    """The larger of the two role assignments."""
    a = shift_operator_ratio(w, t)
    b = shift_operator_ratio(w, t, swap_roles=True)
    return b if b.lower_bound > a.lower_bound else a


# ---------------------------------------------------------------------------
# bump families for exp(i lam phi(xi - eta))
#
# The operator acts on frequency-localized inputs.  Near a centre t_k the
# phase is replaced by its tangent line, and a pure tone exp(2 pi i s u / N)
# in the difference variable u acts as a translation.  For the symbol
# psi(c1*a + c2*b) of the operator itself (c = (1, -1)) or of its first
# adjoint (c = (-1, -2)) the tone produces first(x + c1*s) * second(x + c2*s).


_FORMS = {"direct": (1, -1), "adjoint": (-1, -2)}


@dataclass(frozen=True, eq=False)
class BumpFamily:
    """Frequency-localized inputs matched to tangent lines of a phase.

    ``centers`` are physical frequencies ``t_k`` (already snapped to the
    frequency lattice), ``gradients`` the slopes ``phi'(t_k)``, ``shifts`` the
    induced translations in grid sites (rounded) and ``cubes`` the intervals
    that must contain every difference frequency the family can produce.
    """

    phase: Phase
    lam: float
    grid: Grid
    centers: np.ndarray
    gradients: np.ndarray
    shifts: np.ndarray
    snap_error: float
    cubes: tuple
    half_width: float
    linearization_error: float
    base: np.ndarray = field(repr=False)

    @property
    def n_components(self) -> int:
        return len(self.centers)

    def profile(self, power: float) -> tuple[np.ndarray, int]:
        """``|b|**power`` band-limited to radius ``ceil(power)`` half-widths.

        ``b`` is real, so for whole powers ``b**power`` is used: it has modulus
        ``|b|**power`` and is exactly band-limited, keeping Hoelder tight.
        Returns the samples and the spectral radius in labels.
        """
        radius = int(math.ceil(power * self.half_width * self.grid.length - 1e-9))
        if float(power).is_integer():
            v = self.base ** int(power)
        else:
            v = np.abs(self.base) ** power
            spectrum = np.fft.fft(v)
            spectrum[np.abs(self.grid.frequencies()) > radius] = 0
            v = np.fft.ifft(spectrum)
        return v.astype(complex), radius


def _cells(phase: Phase, K: int, window) -> list[tuple[float, float]]:
    lo, hi = map(float, window)
    if phase.pieces:
        pieces = [(max(a, lo), min(b, hi)) for a, b in phase.pieces if min(b, hi) > max(a, lo)]
        if K > len(pieces):
            raise ValueError(f"phase has {len(pieces)} affine pieces in the window, asked for K={K}")
        idx = np.linspace(0, len(pieces) - 1, K).round().astype(int)
        return [pieces[i] for i in idx]
    edges = np.linspace(lo, hi, K + 1)
    return list(zip(edges[:-1], edges[1:]))


def _pick_centers(phase: Phase, lam: float, cells, window) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = map(float, window)
    gap = 4.0 / (abs(lam) * (hi - lo))
    mids = np.array([(a + b) / 2 for a, b in cells])
    grads = np.asarray(phase.grad(mids), dtype=float)
    if len(mids) > 1 and np.allclose(grads, grads[0], rtol=0, atol=1e-12):
        probe = np.linspace(lo, hi, 33)
        if np.allclose(phase.grad(probe), grads[0], rtol=0, atol=1e-12):
            raise ValueError(f"affine phase: {phase.name} has one gradient on the window")
    # greedy: move centres inside their cells until gradients separate
    for k in range(len(mids)):
        others = np.delete(grads, k)
        if others.size == 0 or np.min(np.abs(others - grads[k])) >= gap:
            continue
        a, b = cells[k]
        for frac in (0.25, 0.75, 0.375, 0.625, 0.125, 0.875):
            trial = a + frac * (b - a)
            g = float(phase.grad(trial))
            if np.min(np.abs(others - g)) >= gap:
                mids[k], grads[k] = trial, g
                break
    diffs = np.abs(grads[:, None] - grads[None, :])[~np.eye(len(grads), dtype=bool)]
    if diffs.size and diffs.min() < gap:
        raise ValueError(
            f"cannot find {len(mids)} gradients separated by {gap:.3g} for {phase.name}"
        )
    return mids, grads


def build_bump_family(
    phase: Phase,
    lam: float,
    K: int,
    window: tuple[float, float],
    grid: Grid,
    half_width: Optional[float] = None,
    reach_factor: float = 2.0,
) -> BumpFamily:
    """Choose ``K`` centres with distinct gradients and the matching bumps.

    ``half_width`` is the spectral half-width of the base bump (physical
    units); by default the largest that keeps every difference frequency
    inside its cell.  Difference frequencies may stray up to
    ``reach_factor * half_width`` from a centre; the certificate sets this
    from the profile exponents and the operator form.
    """
    if K < 1:
        raise ValueError("K must be positive")
    L, n = grid.length, grid.n_points
    cells = _cells(phase, K, window)
    mids, _ = _pick_centers(phase, lam, cells, window)
    labels = np.rint(mids * L).astype(int)
    centers = labels / L
    grads = np.asarray(phase.grad(centers), dtype=float)
    room = min(min(c - a, b - c) for c, (a, b) in zip(centers, cells))
    if half_width is None:
        half_width = room / reach_factor
    if half_width * L < 4:
        raise ValueError(
            f"grid too coarse: bump spans {2 * half_width * L:.1f} frequency cells, need >= 8"
        )
    reach = reach_factor * half_width
    for c, (a, b) in zip(centers, cells):
        if c - reach < a - 1e-12 or c + reach > b + 1e-12:
            raise ValueError(
                f"difference frequencies around {c:g} leave the cell [{a:g}, {b:g}]"
            )
    if np.max(np.abs(labels)) + reach * L > n // 2 + 1e-9:
        raise ValueError("family does not fit below the Nyquist frequency")
    raw = lam * grads / (2 * np.pi * grid.spacing)
    shifts = np.rint(raw).astype(int)
    lin = 0.0
    for c, g in zip(centers, grads):
        d = np.linspace(-reach, reach, 65)
        lin = max(lin, float(np.max(np.abs(lam * (phase(c + d) - phase(c) - g * d)))))
    base = np.fft.ifft(reference_bump(grid.frequencies() / (half_width * L))).real
    base = base / np.abs(base).max()
    return BumpFamily(
        phase=phase,
        lam=float(lam),
        grid=grid,
        centers=centers,
        gradients=grads,
        shifts=shifts,
        snap_error=float(np.max(np.abs(raw - shifts))),
        cubes=tuple(cells),
        half_width=float(half_width),
        linearization_error=lin,
        base=base,
    )


def integer_shift_slopes(K: int, lam: float, grid: Grid, spacing_sites: Optional[int] = None) -> list[float]:
    """Slopes whose induced translations are ``0, d, 2d, ...`` whole sites, ``d = N // K`` by default."""
    d = grid.n_points // K if spacing_sites is None else spacing_sites
    return [2 * np.pi * grid.spacing * d * k / lam for k in range(K)]


def _partner_powers(a: float, b: float) -> tuple[float, float]:
    """Exponents ``(e1, e2)`` with ``|b|^e1`` in ``L^a`` matching ``|b|^e2`` in ``L^b``."""
    if math.isinf(a) or math.isinf(b):
        return 1.0, 1.0
    return (b / a, 1.0) if b >= a else (1.0, a / b)


def _reach_factor(form: str, powers) -> float:
    return float(sum(abs(c) * math.ceil(e - 1e-9) for c, e in zip(_FORMS[form], powers)))


def _input_powers(t: ExponentTriple):
    form, stacked, measured = _plan(t)
    exps = (measured.p, measured.q)
    e_stack, e_other = _partner_powers(exps[stacked], exps[1 - stacked])
    powers = (e_stack, e_other) if stacked == 0 else (e_other, e_stack)
    return form, stacked, measured, powers


def _family_inputs(fam: BumpFamily, form: str, stacked: int, powers) -> tuple[VectorSampledFn, VectorSampledFn]:
    c = _FORMS[form]
    n = fam.grid.n_points
    j = np.arange(n)
    # put the frequency on the input whose coefficient is +-1
    carrier = 0 if abs(c[0]) == 1 else 1
    prof = [fam.profile(powers[0])[0], fam.profile(powers[1])[0]]
    first, second = [], []
    for tk, s in zip(fam.centers, fam.shifts):
        label = int(round(tk * fam.grid.length))
        out_centre = -c[stacked] * s
        centres = [0, 0]
        centres[1 - stacked] = out_centre + c[1 - stacked] * s
        rows = []
        for i in range(2):
            v = np.roll(prof[i], centres[i])
            if i == carrier:
                v = v * np.exp(2j * np.pi * c[carrier] * label * j / n)
            rows.append(v)
        first.append(rows[0])
        second.append(rows[1])
    return VectorSampledFn(fam.grid, np.stack(first)), VectorSampledFn(fam.grid, np.stack(second))


ROUNDOFF_FLOOR = float(np.finfo(float).eps)


def _flush(v: np.ndarray) -> np.ndarray:
    # FFT round-off leaves ~1e-18 noise where the true output is far smaller;
    # quasinorms with r < 1 amplify it.  Zeroing it only lowers the numerator.
    v = v.copy()
    v[np.abs(v) < ROUNDOFF_FLOOR * np.abs(v).max()] = 0
    return v


def _vector_evaluator(op: BilinearOperator):
    def evaluate(F: VectorSampledFn, G: VectorSampledFn) -> VectorSampledFn:
        rows = [_flush(apply_band_limited(op, f, g).values) for f, g in zip(F.components, G.components)]
        return VectorSampledFn(op.grid, np.stack(rows))

    return evaluate


def _phase_symbol(phase: Phase, lam: float, grid: Grid) -> Difference:
    L = grid.length
    return Difference(lambda u: np.exp(1j * lam * phase(np.asarray(u) / L)))


def _plan(t: ExponentTriple) -> tuple[str, int, ExponentTriple]:
    """Which operator to test, which input to stack, and the triple to measure."""
    if t.inv_r_prime > max(t.inv_p, t.inv_q):
        return "adjoint", 0, t.first_adjoint()
    return "direct", (0 if t.inv_p >= t.inv_q else 1), t


def certify_lower_bound(
    phase: Phase,
    lam: float,
    K: int,
    t: ExponentTriple,
    grid: Grid,
    window: tuple[float, float] = (-1.0, 1.0),
    half_width: Optional[float] = None,
) -> BoundCertificate:
    """Evaluated lower bound for the norm of ``exp(i lam phi(xi - eta))``.

    When ``1/r'`` is the largest reciprocal the measurement runs on the first
    adjoint with exponents ``(r', q, p')``, which has the same norm.
    """
    form, stacked, measured, powers = _input_powers(t)
    fam = build_bump_family(
        phase, lam, K, window, grid, half_width=half_width, reach_factor=_reach_factor(form, powers)
    )
    symbol: Symbol = _phase_symbol(phase, lam, grid)
    if form == "adjoint":
        symbol = adjoint_symbol_1(symbol)
    op = BilinearOperator(symbol, grid)
    F, G = _family_inputs(fam, form, stacked, powers)
    evaluate = _vector_evaluator(op)
    ratio = rayleigh_ratio(evaluate(F, G), F, G, measured)
    return BoundCertificate(
        measured,
        ratio,
        f"{phase.name} bump family, lambda={lam:g}, K={K}, {form} operator",
        F,
        G,
        evaluate,
        {
            "form": form,
            "stacked": "first" if stacked == 0 else "second",
            "original_p": t.p,
            "original_q": t.q,
            "original_r": t.r,
            "snap_error": fam.snap_error,
            "linearization_error": fam.linearization_error,
            "half_width": fam.half_width,
            "predicted": K ** ((measured.inv_p if stacked == 0 else measured.inv_q) - 0.5),
        },
    )


# ---------------------------------------------------------------------------
# blow-up driver

CURVE_HEADER = ("lambda", "K", "p", "q", "r", "gamma", "certificate", "snap_error", "warnings")


@dataclass(frozen=True)
class BlowupRow:
    lam: float
    K: int
    p: float
    q: float
    r: float
    gamma: float
    certificate: float
    snap_error: float
    warnings: str

    def as_tuple(self) -> tuple:
        return (self.lam, self.K, self.p, self.q, self.r, self.gamma, self.certificate, self.snap_error, self.warnings)


def default_k_schedule(lam: float) -> list[int]:
    return list(range(1, max(1, int(math.isqrt(int(abs(lam))))) + 1))


def _half_width_for(
    phase: Phase, lam: float, t: ExponentTriple, window, K: int, lin_tol: float,
    grid: Grid, max_labels: int = 256,
):
    """Largest spectral half-width whose tangent-line error stays below ``lin_tol``."""
    form, _, _, powers = _input_powers(t)
    spread = _reach_factor(form, powers)
    lo, hi = map(float, window)
    cell = (hi - lo) / K
    w = cell / (2 * spread)
    probe = np.linspace(lo, hi, 257)
    curv = np.gradient(np.gradient(phase(probe), probe), probe)
    kappa = float(np.max(np.abs(curv)))
    if kappa > 0:
        w = min(w, math.sqrt(2 * lin_tol / (abs(lam) * kappa)) / spread)
    # wider bumps gain nothing once they are well resolved, and cost |supp|^2
    return min(w, max_labels / grid.length)


def _circular_gap(sites: np.ndarray, n: int) -> int:
    x = np.sort(np.mod(sites, n))
    return int(np.min(np.diff(np.concatenate([x, [x[0] + n]]))))


def _outputs_separate(fam: BumpFamily, t: ExponentTriple, separation: float) -> bool:
    """Translated outputs (and spread inputs unless measured in L^2) keep apart."""
    if fam.n_components == 1:
        return True
    form, stacked, measured, _ = _input_powers(t)
    c = _FORMS[form]
    n = fam.grid.n_points
    need = separation / (fam.half_width * fam.grid.spacing)
    layouts = [-c[stacked] * fam.shifts]
    if (measured.p, measured.q)[1 - stacked] != 2:
        layouts.append((c[1 - stacked] - c[stacked]) * fam.shifts)
    return all(_circular_gap(x, n) >= need for x in layouts)


def blowup_curve(
    phase: Phase,
    t: ExponentTriple,
    lambdas: Sequence[float],
    k_schedule: Optional[Sequence[int]] = None,
    grid: Optional[Grid] = None,
    window: tuple[float, float] = (-4.0, 4.0),
    lin_tol: float = 0.5,
    separation: float = 1.5,
) -> list[BlowupRow]:
    """One certificate per ``lam``, using the largest ``K`` whose family fits.

    A family fits when it passes :func:`build_bump_family` and its translated
    outputs stay ``separation / half_width`` apart on the circle.  Large
    ``lam`` pushes the translations around the whole grid, so the frequency
    window is shrunk about its midpoint (by factors of 0.8) until the
    family fits; the largest ``K`` over all tried windows wins.
    """
    grid = grid or Grid(65536, 1 / 16)
    rows = []
    note_range = "" if not classify_local_l2(t) else "no blow-up predicted (local L2 triple)"
    form, _, _, powers = _input_powers(t)
    reach = _reach_factor(form, powers)
    mid, half = (window[0] + window[1]) / 2, (window[1] - window[0]) / 2
    scales = 0.8 ** np.arange(12)
    for lam in lambdas:
        ks = sorted(set(k_schedule or default_k_schedule(lam)), reverse=True)
        chosen = None
        for scale in scales:
            win = (mid - scale * half, mid + scale * half)
            for K in ks:
                if chosen is not None and K <= chosen[0]:
                    break
                w = _half_width_for(phase, lam, t, win, K, lin_tol, grid)
                try:
                    fam = build_bump_family(phase, lam, K, win, grid, half_width=w, reach_factor=reach)
                except ValueError:
                    continue
                if _outputs_separate(fam, t, separation):
                    chosen = (K, w, win)
                    break
        warnings = [note_range] if note_range else []
        if chosen is None:
            K, win = 1, window
            w = _half_width_for(phase, lam, t, win, 1, lin_tol, grid)
            warnings.append("no K fits; fell back to K=1")
        else:
            K, w, win = chosen
        cert = certify_lower_bound(phase, lam, K, t, grid, window=win, half_width=w)
        rows.append(
            BlowupRow(
                float(lam), K, t.p, t.q, t.r, t.gamma, cert.lower_bound,
                cert.metadata["snap_error"], "; ".join(x for x in warnings if x),
            )
        )
    return rows

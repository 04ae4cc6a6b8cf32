"""Alternating ascent on ``||T(f, g)||_r / (||f||_p ||g||_q)``.

With one input frozen the operator is linear in the other, so each half-step
is an ascent on ``||A u||_r / ||u||_s`` for an explicit ``N x N`` matrix ``A``.
The kernel is the inverse 2-D transform of the symbol table:
``T(f, g)[x] = sum_{y,z} M[x-y, x-z] f[y] g[z]`` with ``M = ifft2(m)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .apply import BilinearOperator
from .grid import SampledFn, VectorSampledFn
from .symbols import ExponentTriple
from .witness import BoundCertificate, rayleigh_ratio

__all__ = ["SearchConfig", "search_lower_bound", "kernel_tensor", "smoothed_exponent"]

SMOOTH_CAP = 64.0


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 4
    max_iters: int = 200
    step: float = 0.5
    shrink: float = 0.5
    tol: float = 1e-9
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


def smoothed_exponent(p: float) -> float:
    return min(p, SMOOTH_CAP)


def kernel_tensor(op: BilinearOperator) -> np.ndarray:
    """``M`` with ``T(f, g)[x] = sum M[x-y, x-z] f[y] g[z]``."""
    return np.fft.ifft2(op.table())


def _matrix_in_f(M: np.ndarray, g: np.ndarray) -> np.ndarray:
    n = len(g)
    i = np.arange(n)
    Gmat = g[(i[None, :] - i[:, None]) % n]  # Gmat[w, x] = g[x - w]
    B = M @ Gmat  # B[a, x]
    return B[(i[:, None] - i[None, :]) % n, i[:, None]]


def _matrix_in_g(M: np.ndarray, f: np.ndarray) -> np.ndarray:
    n = len(f)
    i = np.arange(n)
    Fmat = f[(i[:, None] - i[None, :]) % n]  # Fmat[x, a] = f[x - a]
    C = Fmat @ M  # C[x, b]
    return C[i[:, None], (i[:, None] - i[None, :]) % n]


def _pnorm(v: np.ndarray, p: float, h: float) -> float:
    a = np.abs(v)
    peak = a.max()
    if peak == 0:
        return 0.0
    if math.isinf(p):
        return float(peak)
    return float(peak * (h * np.sum((a / peak) ** p)) ** (1 / p))


def _log_ratio(A, u, s, r, h) -> float:
    num, den = _pnorm(A @ u, r, h), _pnorm(u, s, h)
    if num == 0 or den == 0:
        return -math.inf
    return math.log(num) - math.log(den)


def _ascent_direction(A, u, s, r) -> np.ndarray:
    # Wirtinger gradient of (1/r) log sum|Au|^r - (1/s) log sum|u|^s, smoothed
    s, r = smoothed_exponent(s), smoothed_exponent(r)
    v = A @ u
    av, au = np.abs(v), np.abs(u)
    sv, su = av.max(), au.max()
    eps = 1e-12
    wv = (np.sqrt((av / sv) ** 2 + eps)) ** (r - 2) * (v / sv)
    wu = (np.sqrt((au / su) ** 2 + eps)) ** (s - 2) * (u / su)
    grad = A.conj().T @ wv / (sv * np.sum((av / sv) ** r)) - wu / (su * np.sum((au / su) ** s))
    scale = np.linalg.norm(grad)
    return grad / scale if scale > 0 else grad


def _half_step(A, u, s, r, h, step, shrink, min_step):
    """One accepted ascent step (or none) on ``||A u||_r / ||u||_s``."""
    current = _log_ratio(A, u, s, r, h)
    d = _ascent_direction(A, u, s, r)
    unorm = np.linalg.norm(u)
    while step > min_step:
        trial = u + step * unorm * d
        val = _log_ratio(A, trial, s, r, h)
        if val > current:
            return trial / _pnorm(trial, s, h), val, min(step / shrink, 1.0)
        step *= shrink
    return u, current, step


def _smooth(v: np.ndarray) -> np.ndarray:
    return 0.25 * np.roll(v, 1) + 0.5 * v + 0.25 * np.roll(v, -1)


def _chain(M, t: ExponentTriple, cfg: SearchConfig, h: float, index: int, start):
    n = M.shape[0]
    rng = np.random.default_rng([cfg.seed, index])
    if start is None:
        f = _smooth(rng.standard_normal(n) + 1j * rng.standard_normal(n))
        g = _smooth(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    else:
        f, g = (np.array(x, dtype=complex) for x in start)
    if _pnorm(f, t.p, h) == 0 or _pnorm(g, t.q, h) == 0:
        return -math.inf, f, g, []
    f, g = f / _pnorm(f, t.p, h), g / _pnorm(g, t.q, h)
    best = _log_ratio(_matrix_in_f(M, g), f, t.p, t.r, h)
    history = [best]
    step_f = step_g = cfg.step
    min_step = 1e-12
    for _ in range(cfg.max_iters):
        before = best
        f, best, step_f = _half_step(_matrix_in_f(M, g), f, t.p, t.r, h, step_f, cfg.shrink, min_step)
        g, best, step_g = _half_step(_matrix_in_g(M, f), g, t.q, t.r, h, step_g, cfg.shrink, min_step)
        history.append(best)
        if best - before < cfg.tol:
            break
    return best, f, g, history


def search_lower_bound(
    op: BilinearOperator,
    t: ExponentTriple,
    cfg: SearchConfig = SearchConfig(),
    warm_start: Optional[tuple[SampledFn, SampledFn]] = None,
) -> BoundCertificate:
    """Best evaluated ratio over ``cfg.restarts`` ascent chains.

    A ``warm_start`` pair seeds chain 0; the result is never below its ratio
    because steps are only accepted when they raise the true ratio.
    """
    M = kernel_tensor(op)
    h = op.grid.spacing
    start = None if warm_start is None else (warm_start[0].values, warm_start[1].values)
    jobs = [(i, start if i == 0 else None) for i in range(cfg.restarts)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(lambda j: _chain(M, t, cfg, h, *j), jobs))
    else:
        results = [_chain(M, t, cfg, h, *j) for j in jobs]
    # max ratio, ties to the lowest chain index
    best_index = max(range(len(results)), key=lambda i: (results[i][0], -i))
    value, f, g, history = results[best_index]
    if not math.isfinite(value):
        raise ValueError("every chain started from a zero-norm input")
    F = VectorSampledFn(op.grid, f[None, :])
    G = VectorSampledFn(op.grid, g[None, :])

    def evaluate(F, G):
        return VectorSampledFn(op.grid, (_matrix_in_f(M, G.values[0]) @ F.values[0])[None, :])

    ratio = rayleigh_ratio(evaluate(F, G), F, G, t)
    return BoundCertificate(
        t,
        ratio,
        f"alternating ascent, {cfg.restarts} chains, best chain {best_index}",
        F,
        G,
        evaluate,
        {"chain": best_index, "iterations": len(history) - 1, "seed": cfg.seed},
    )

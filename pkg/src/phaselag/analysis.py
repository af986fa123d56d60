"""Resolvent sweeps, regularity fits, abscissae and growth rates.

Every function accepts either a single ``DiscreteOperator`` or a ``BlockSet``;
for block sets, norms are the maximum over blocks (the blocks are mutually
G-orthogonal) and spectra are the union.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import LinAlgError


class SingularResolventError(LinAlgError):
    def __init__(self, gamma: float, nearest: complex):
        super().__init__(
            f"i*gamma - A is singular at gamma = {gamma:.6g} "
            f"(nearest eigenvalue {nearest.real:.6g}{nearest.imag:+.6g}i)")
        self.gamma = gamma
        self.nearest = nearest


def log_grid(decade_min: float = 0.0, decade_max: float = 6.0, per_decade: int = 20) -> np.ndarray:
    """Log-spaced frequencies, ``per_decade`` intervals per decade, both ends included."""
    if decade_max <= decade_min:
        raise ValueError("decade_max must exceed decade_min")
    num = int(round((decade_max - decade_min) * per_decade)) + 1
    return np.logspace(decade_min, decade_max, num)


def _blocks(operator):
    return list(operator.blocks())


def numerical_abscissa(operator) -> float:
    return max(linalg.numerical_abscissa(b.A, b.G) for b in _blocks(operator))


def default_shift(operator) -> float:
    """``c0 = max(0, numerical abscissa)``; the generator minus ``2 c0`` is dissipative."""
    return max(0.0, numerical_abscissa(operator))


def operator_norm(operator, shift: float = 0.0) -> float:
    """``||A - shift I||_G``, maximised over blocks."""
    return max(linalg.weighted_norm(b.shifted(shift), b.G) for b in _blocks(operator))


@dataclass(frozen=True)
class ResolventSweep:
    gamma: np.ndarray
    norms: np.ndarray
    shifted: bool = False
    c0: float = 0.0
    operator_norm: float = float("nan")
    seed: int = 0

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        nr = np.asarray(self.norms, dtype=float)
        if g.shape != nr.shape or g.ndim != 1:
            raise ValueError("gamma and norms must be 1-d arrays of equal length")
        if g.size > 1 and not np.all(np.diff(g) > 0):
            raise ValueError("gamma grid must be strictly increasing")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "norms", nr)

    @classmethod
    def from_arrays(cls, gamma, norms, **kw) -> "ResolventSweep":
        return cls(np.asarray(gamma, float), np.asarray(norms, float), **kw)

    @property
    def gamma_times_norm(self) -> np.ndarray:
        return self.gamma * self.norms

    @property
    def min_singular(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / self.norms


def _nearest_eigenvalue(operator, lam: complex) -> complex:
    best = None
    for b in _blocks(operator):
        ev = linalg.eigenvalues(b.A)
        k = int(np.argmin(np.abs(ev - lam)))
        if best is None or abs(ev[k] - lam) < abs(best - lam):
            best = ev[k]
    return complex(best)


def resolvent_sweep(operator, gamma, *, c0: float | None = None, shifted: bool = True,
                    seed: int = 0, workers: int = 1, allow_singular: bool = False,
                    tol: float = 1e-12, maxiter: int = 500, block: int = 8) -> ResolventSweep:
    """``||(i gamma - B)^{-1}||_G`` on a frequency grid, ``B = A - 2 c0`` when shifted.

    ``c0`` defaults to ``default_shift(operator)``.  A singular point aborts the
    sweep with ``SingularResolventError`` unless ``allow_singular`` (then the
    norm is recorded as ``inf``).
    """
    gamma = np.asarray(gamma, dtype=float)
    blocks = _blocks(operator)
    if shifted:
        if c0 is None:
            c0 = default_shift(operator)
        w = numerical_abscissa(operator)
        if c0 < 0.5 * w - 1e-12 * max(1.0, abs(w)):
            raise ValueError(f"shift c0 = {c0} is below half the numerical abscissa {w}")
    else:
        c0 = 0.0
    shift = 2.0 * c0 if shifted else 0.0
    mats = [(b.shifted(shift), b.G) for b in blocks]

    def at(g: float) -> float:
        lam = 1j * g
        return max(linalg.weighted_resolvent_norm(A, G, lam, tol=tol, maxiter=maxiter,
                                                  block=block, seed=seed)
                   for A, G in mats)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            norms = np.array(list(pool.map(at, gamma)))
    else:
        norms = np.array([at(g) for g in gamma])
    bad = np.flatnonzero(~np.isfinite(norms))
    if bad.size and not allow_singular:
        g = float(gamma[bad[0]])
        raise SingularResolventError(g, _nearest_eigenvalue(operator, 1j * g + shift))
    return ResolventSweep(gamma, norms, shifted=shifted, c0=float(c0),
                          operator_norm=operator_norm(operator, shift), seed=seed)


@dataclass(frozen=True)
class AxisReport:
    passed: bool
    min_singular: float
    argmin_gamma: float
    threshold: float


def verify_imaginary_axis(sweep: ResolventSweep, rel: float = 1e-12) -> AxisReport:
    """Pass iff every sampled norm is finite and ``1/norm > rel * ||B||``."""
    sig = sweep.min_singular
    k = int(np.argmin(sig))
    scale = sweep.operator_norm if math.isfinite(sweep.operator_norm) else 1.0
    threshold = rel * scale
    passed = bool(np.all(np.isfinite(sweep.norms)) and np.all(sig > threshold))
    return AxisReport(passed, float(sig[k]), float(sweep.gamma[k]), threshold)


def _lsq_line(x: np.ndarray, y: np.ndarray):
    """Least squares ``y = c + s x``; returns ``(s, c, r_squared)``."""
    X = np.column_stack([np.ones_like(x), x])
    (c, s), *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - (c + s * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(s), float(c), min(1.0, max(0.0, r2))


def _top_window(gamma: np.ndarray, decades: float) -> np.ndarray:
    lo = gamma[-1] * 10.0 ** (-decades) * (1 - 1e-12)
    return gamma >= lo


@dataclass(frozen=True)
class AnalyticityIndicator:
    sup: float
    argsup: float
    tail_slope: float


def analyticity_indicator(sweep: ResolventSweep, tail_decades: float = 1.0) -> AnalyticityIndicator:
    """Supremum of ``gamma ||R||`` and the log-log slope of ``gamma ||R||`` over the top decade."""
    g = sweep.gamma
    if g.size < 2 or math.log10(g[-1] / g[0]) < 3 - 1e-9:
        raise ValueError("analyticity indicator needs a sweep spanning at least 3 decades")
    gn = sweep.gamma_times_norm
    k = int(np.argmax(gn))
    m = _top_window(g, tail_decades)
    slope, _, _ = _lsq_line(np.log(g[m]), np.log(gn[m]))
    return AnalyticityIndicator(float(gn[k]), float(g[k]), slope)


@dataclass(frozen=True)
class GevreyFit:
    varsigma: float
    C: float
    r_squared: float
    window: tuple[float, float]
    samples: int

    @property
    def gevrey_class(self) -> float:
        return 1.0 / self.varsigma if self.varsigma > 0 else math.inf


def gevrey_fit(sweep: ResolventSweep, decades: float = 3.0) -> GevreyFit:
    """Fit ``log ||R|| = log C - varsigma log gamma`` over the top ``decades`` of the grid."""
    g = sweep.gamma
    m = _top_window(g, decades)
    if np.count_nonzero(m) < 10:
        raise ValueError(f"gevrey fit needs at least 10 samples in the window, got {np.count_nonzero(m)}")
    nr = sweep.norms[m]
    if not np.all(np.isfinite(nr)) or np.any(nr <= 0):
        raise ValueError("gevrey fit needs finite positive norms")
    if np.ptp(nr) == 0.0:
        raise ValueError("degenerate window: all norms are equal")
    slope, intercept, r2 = _lsq_line(np.log(g[m]), np.log(nr))
    return GevreyFit(-slope, math.exp(intercept), r2, (float(g[m][0]), float(g[m][-1])),
                     int(np.count_nonzero(m)))


def spectrum(operator, shift: float = 0.0) -> list[np.ndarray]:
    """Eigenvalues per block of ``A - shift I``."""
    return [linalg.eigenvalues(b.A) - shift for b in _blocks(operator)]


def spectral_abscissa(operator, shift: float = 0.0) -> float:
    return max(float(ev.real.max()) for ev in spectrum(operator, shift))


@dataclass(frozen=True)
class RateFit:
    """A least-squares slope together with the samples it was fitted to."""

    rate: float
    times: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    window: tuple[float, float] = (0.0, 0.0)


def semigroup_norms(operator, times, shift: float = 0.0, *, generator: bool = False) -> np.ndarray:
    """``||e^{tB}||_G`` (or ``||B e^{tB}||_G`` with ``generator=True``), max over blocks."""
    times = np.asarray(times, dtype=float)
    out = np.zeros_like(times)
    for b in _blocks(operator):
        Bt = b.G.to_orthonormal(b.shifted(shift))
        for i, t in enumerate(times):
            E = linalg.matrix_exponential(Bt, t)
            if generator:
                E = Bt @ E
            out[i] = max(out[i], linalg.weighted_norm(E))
    return out


def growth_bound(operator, times, shift: float = 0.0) -> RateFit:
    """Growth rate from the slope of ``log ||e^{tB}||_G`` over the last half of ``times``."""
    times = np.asarray(times, dtype=float)
    try:
        norms = semigroup_norms(operator, times, shift)
    except linalg.ExponentialOverflowError as exc:
        raise linalg.ExponentialOverflowError(
            f"{exc}; rerun on the shifted operator or a shorter horizon") from exc
    half = times.size // 2
    t, nr = times[half:], norms[half:]
    if np.any(nr <= 0) or not np.all(np.isfinite(nr)):
        raise linalg.ExponentialOverflowError("semigroup norm underflowed or overflowed; shorten the horizon")
    slope, _, _ = _lsq_line(t, np.log(nr))
    return RateFit(slope, times, norms, (float(t[0]), float(t[-1])))


def smoothing_times(operator, shift: float = 0.0, num: int = 16) -> np.ndarray:
    """Default small-time grid ``[1e-4, 1e-1] / ||B||_G``, log spaced."""
    return np.logspace(-4, -1, num) / operator_norm(operator, shift)


def smoothing_rate(operator, times=None, shift: float = 0.0) -> RateFit:
    """Slope of ``log ||B e^{tB}||_G`` against ``log t`` for small ``t``."""
    times = smoothing_times(operator, shift) if times is None else np.asarray(times, float)
    norms = semigroup_norms(operator, times, shift, generator=True)
    slope, _, _ = _lsq_line(np.log(times), np.log(norms))
    return RateFit(slope, times, norms, (float(times[0]), float(times[-1])))

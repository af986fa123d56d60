"""Time evolution with energy diagnostics.

Modal blocks are propagated exactly with per-block matrix exponentials; the
radial operator (not block diagonal) uses the implicit midpoint rule with a
single LU factorization.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .operator import energy_terms, grad_seminorms


@dataclass(frozen=True)
class EvolutionTrace:
    """States on a time grid plus the energy and the two identity terms.

    ``states`` has shape ``(len(times), dim)``; for block sets the state is the
    concatenation of the per-block coefficient vectors.
    """

    times: np.ndarray
    states: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)
    dissipation_1: np.ndarray = field(repr=False)
    dissipation_2: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trace times must be strictly increasing")

    @property
    def norm(self) -> np.ndarray:
        """``||U(t)||_G = sqrt(2 E)``."""
        return np.sqrt(2.0 * np.maximum(self.energy, 0.0))


def _parts(operator):
    blocks = list(operator.blocks())
    offsets = np.cumsum([0] + [b.dim for b in blocks])
    return blocks, offsets


def _terms(operator, states):
    blocks, off = _parts(operator)
    E = np.zeros(states.shape[0])
    d1 = np.zeros_like(E)
    d2 = np.zeros_like(E)
    for b, lo, hi in zip(blocks, off[:-1], off[1:]):
        e, p, q = energy_terms(b, states[:, lo:hi])
        E += e
        d1 += p
        d2 += q
    return E, d1, d2


def make_trace(operator, times, states) -> EvolutionTrace:
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=complex)
    E, d1, d2 = _terms(operator, states)
    return EvolutionTrace(times, states, E, d1, d2)


def evolve_modal(blocks, x0, times, *, extra_squarings: int = 0, workers: int = 1) -> EvolutionTrace:
    """Exact propagation ``x(t) = exp(t M_k) x_k(0)`` block by block.

    A uniform grid reuses one step propagator per block; otherwise each step
    gets its own exponential.  Blocks write disjoint slices, so ``workers > 1``
    gives bit-identical results.
    """
    blk, off = _parts(blocks)
    times = np.asarray(times, dtype=float)
    x0 = np.asarray(x0, dtype=complex)
    if x0.shape != (off[-1],):
        raise ValueError(f"initial state has shape {x0.shape}, blocks need ({off[-1]},)")
    steps = np.diff(times)
    uniform = steps.size > 0 and np.allclose(steps, steps[0], rtol=1e-12, atol=0)
    states = np.empty((times.size, x0.size), dtype=complex)

    def run(k):
        b, lo, hi = blk[k], off[k], off[k + 1]
        x = x0[lo:hi].copy()
        states[0, lo:hi] = x
        if not np.any(x):
            states[1:, lo:hi] = 0.0
            return
        P = (linalg.matrix_exponential(b.A, steps[0], extra_squarings=extra_squarings)
             if uniform else None)
        for i, dt in enumerate(steps, start=1):
            step = P if uniform else linalg.matrix_exponential(b.A, dt, extra_squarings=extra_squarings)
            x = step @ x
            states[i, lo:hi] = x

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(run, range(len(blk))))
    else:
        for k in range(len(blk)):
            run(k)
    return make_trace(blocks, times, states)


def evolve_radial(operator, x0, dt: float, T: float) -> EvolutionTrace:
    """Implicit midpoint rule with step ``dt`` up to time ``T``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    steps = int(round(T / dt))
    if steps < 1:
        raise ValueError("T must be at least one step")
    A = operator.A
    n = operator.dim
    x = np.asarray(x0, dtype=complex)
    if x.shape != (n,):
        raise ValueError(f"initial state has shape {x.shape}, operator needs ({n},)")
    eye = np.eye(n)
    try:
        lu = linalg.lu_factor(eye - 0.5 * dt * A)
    except linalg.SingularMatrixError as exc:
        raise linalg.SingularMatrixError(
            f"implicit midpoint matrix is singular at dt = {dt}; use a smaller dt",
            exc.pivot) from exc
    rhs = eye + 0.5 * dt * A
    states = np.empty((steps + 1, n), dtype=complex)
    states[0] = x
    for i in range(1, steps + 1):
        x = linalg.lu_solve(lu, rhs @ x)
        states[i] = x
    return make_trace(operator, dt * np.arange(steps + 1), states)


@dataclass(frozen=True)
class EnergyResidual:
    max_relative: float
    inequality_holds: bool
    residual: np.ndarray = field(repr=False)


def energy_identity_residual(trace: EvolutionTrace, operator, c0: float = 0.0,
                             slack: float = 1e-10) -> EnergyResidual:
    """Compare centred differences of ``E`` with the identity's right-hand side.

    The returned residual is relative to ``E(0)`` (zero traces give zero).  The
    inequality check bounds the right-hand side by
    ``-(a_n b_n / 2) |grad Theta_n|^2 + c0 sum_{j<n} |grad Theta_j|^2``.
    """
    t, E = trace.times, trace.energy
    if t.size < 3:
        raise ValueError("need at least three time points")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ValueError("energy identity check needs a uniform time grid")
    rhs = trace.dissipation_1 + trace.dissipation_2
    dE = (E[2:] - E[:-2]) / (t[2:] - t[:-2])
    res = np.abs(dE - rhs[1:-1])
    E0 = float(E[0])
    rel = res / E0 if E0 > 0 else np.zeros_like(res)

    blocks, off = _parts(operator)
    model = blocks[0].model
    if model is None:
        return EnergyResidual(float(rel.max()), True, rel)
    g = 0.0
    for b, lo, hi in zip(blocks, off[:-1], off[1:]):
        g = g + grad_seminorms(b, trace.states[:, lo:hi])
    a_n, b_n, n = model.a[-1], model.b[-1], model.n
    bound = -0.5 * a_n * b_n * g[:, n] + c0 * g[:, :n].sum(axis=1)
    holds = bool(np.all(rhs <= bound + slack * max(E0, 1e-300)))
    return EnergyResidual(float(rel.max()), holds, rel)


@dataclass(frozen=True)
class QuasiContraction:
    passed: bool
    max_ratio: float
    ratio: np.ndarray = field(repr=False)


def norm_ratio(trace: EvolutionTrace, c0: float) -> np.ndarray:
    """``||U(t)||_G / (e^{2 c0 t} ||U(0)||_G)``; zero for a zero trace."""
    nr = trace.norm
    if nr[0] == 0:
        return np.zeros_like(nr)
    return nr / (np.exp(2.0 * c0 * trace.times) * nr[0])


def quasi_contraction_check(trace: EvolutionTrace, c0: float, tol: float = 1e-8) -> QuasiContraction:
    r = norm_ratio(trace, c0)
    m = float(r.max())
    return QuasiContraction(m <= 1.0 + tol, m, r)


PRESETS = ("plate", "thermal", "random")


def initial_state(operator, preset: str = "plate", *, seed: int = 0, modes: int = 4) -> np.ndarray:
    """G-normalized initial data.

    ``plate``: unit displacement in the fundamental mode (modal) or the static
    deflection under a uniform load (radial), zero velocity and temperature.
    ``thermal``: ``Theta_0`` only.  ``random``: seeded Gaussian data on the
    first ``modes`` blocks (modal) or on the whole grid (radial).
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {PRESETS}")
    blocks, off = _parts(operator)
    x = np.zeros(off[-1], dtype=complex)
    first = blocks[0]
    grid = getattr(first, "grid", None)
    if preset == "random":
        rng = np.random.default_rng(seed)
        hi = off[min(modes, len(blocks))] if grid is None else off[-1]
        x[:hi] = rng.standard_normal(hi) + 1j * rng.standard_normal(hi)
    elif grid is None:
        key = "u" if preset == "plate" else "theta0"
        x[first.layout[key]] = 1.0
    elif preset == "plate":
        # static deflection under a uniform load: smooth on each side and
        # compatible with the interface conditions
        lay = first.layout
        f = np.concatenate([lay["v"], lay["u"]])
        y = np.concatenate([lay["z"], lay["w"]])
        prof = np.linalg.solve(-first.A[np.ix_(y, f)], np.ones(grid.n_cells))
        x[first.layout["v"]] = prof[: grid.n_disc]
        x[first.layout["u"]] = prof[grid.n_disc:]
    else:
        r = grid.nodes[grid.index("annulus")]
        x[first.layout["theta0"]] = np.sin(math.pi * (r - grid.R0) / (grid.R - grid.R0))
    norm = math.sqrt(2.0 * float(_terms(operator, x[None, :])[0][0]))
    return x / norm


def mode_energies(trace: EvolutionTrace, blocks) -> np.ndarray:
    """Per-block energy, shape ``(len(times), len(blocks))``."""
    blk, off = _parts(blocks)
    return np.stack([energy_terms(b, trace.states[:, lo:hi])[0]
                     for b, lo, hi in zip(blk, off[:-1], off[1:])], axis=1)

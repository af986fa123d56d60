"""Radial finite differences for the partially thermoelastic transmission plate.

The elastic disc ``r < R0`` carries ``(v, z = v_t)``, the thermoelastic
annulus ``R0 < r < R`` carries ``(u, w = u_t, Theta_0..Theta_n)``.  Cells are
centred at ``r_i = (i - 1/2) h``, so no node sits on the ``r = 0`` singularity,
and the interface ``r = R0`` is a cell face.

Interface handling: the displacement pair is stored as one radial profile
``f = (v | u)``.  The ghost value of ``u`` on the disc side is the adjacent
``v`` (and vice versa), which makes the shared face flux the common slope and
so enforces ``u = v``, ``u_r = v_r``.  The bending moments
``Phi = kappa1 lap u + beta vartheta`` and ``Psi = kappa2 lap v`` are glued the
same way into one profile ``g = (Psi | Phi)``, which enforces the moment and
shear balances ``Phi = Psi``, ``Phi_r = Psi_r``.  Both profiles vanish at
``r = R`` through the Dirichlet ghost ``f_{N+1} = -f_N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import GramMatrix
from .model import PhaseLagModel
from .operator import DiscreteOperator

_BCS = ("dirichlet", "neumann")


@dataclass(frozen=True, eq=False)
class RadialGrid:
    R0: float
    R: float
    h: float

    def __post_init__(self):
        if not (0 < self.R0 < self.R):
            raise ValueError(f"need 0 < R0 < R, got R0={self.R0}, R={self.R}")
        if not self.h > 0:
            raise ValueError("h must be positive")
        for name, length in (("R0", self.R0), ("R - R0", self.R - self.R0)):
            cells = length / self.h
            if abs(cells - round(cells)) > 1e-12 * max(1.0, cells):
                raise ValueError(f"h = {self.h} does not divide {name} = {length}")

    @property
    def n_disc(self) -> int:
        return round(self.R0 / self.h)

    @property
    def n_cells(self) -> int:
        return round(self.R / self.h)

    @property
    def n_annulus(self) -> int:
        return self.n_cells - self.n_disc

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.h

    @property
    def faces(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * self.h

    @property
    def weights(self) -> np.ndarray:
        """Midpoint quadrature weights ``2 pi r_i h`` (exact cell areas)."""
        return 2.0 * math.pi * self.nodes * self.h

    @property
    def region(self) -> np.ndarray:
        tags = np.full(self.n_cells, "thermoelastic", dtype=object)
        tags[: self.n_disc] = "elastic"
        return tags

    def index(self, region: str) -> slice:
        if region == "full":
            return slice(0, self.n_cells)
        if region in ("disc", "elastic"):
            return slice(0, self.n_disc)
        if region in ("annulus", "thermoelastic"):
            return slice(self.n_disc, self.n_cells)
        raise ValueError(f"unknown region {region!r}")


def refine(grid: RadialGrid) -> RadialGrid:
    return RadialGrid(grid.R0, grid.R, grid.h / 2)


def radial_laplacian(grid: RadialGrid, region: str = "full",
                     bc: tuple[str, str] = ("neumann", "dirichlet")) -> np.ndarray:
    """Conservative radial Laplacian ``(1/r)(r f')'`` on one region.

    ``bc = (inner, outer)`` closes the two end faces: ``"dirichlet"`` puts a zero
    value on the face through the ghost ``-f``; ``"neumann"`` means zero flux.
    The face at ``r = 0`` has weight zero, so its condition is immaterial.
    """
    for side in bc:
        if side not in _BCS:
            raise ValueError(f"boundary condition must be one of {_BCS}, got {side!r}")
    sl = grid.index(region)
    r = grid.nodes[sl]
    rf = grid.faces[sl.start: sl.stop + 1]
    h = grid.h
    m = r.size
    lo, hi = rf[:-1], rf[1:]
    D = np.zeros((m, m))
    idx = np.arange(m)
    D[idx[1:], idx[:-1]] = lo[1:]
    D[idx[:-1], idx[1:]] = hi[:-1]
    diag = -(lo + hi)
    diag[0] += lo[0]
    diag[-1] += hi[-1]
    if bc[0] == "dirichlet":
        diag[0] -= 2 * lo[0]
    if bc[1] == "dirichlet":
        diag[-1] -= 2 * hi[-1]
    D[idx, idx] = diag
    return D / (r[:, None] * h * h)


@dataclass(frozen=True, eq=False)
class RadialOperator(DiscreteOperator):
    grid: RadialGrid


def assemble_transmission(model: PhaseLagModel, grid: RadialGrid, *,
                          paper_literal: bool = False) -> RadialOperator:
    """Generator and Gram matrix of the radial transmission problem.

    State layout: ``v`` (disc), ``u`` (annulus), ``z``, ``w``, then
    ``Theta_0..Theta_n`` on the annulus.
    """
    N, N2, N1 = grid.n_cells, grid.n_disc, grid.n_annulus
    if N2 < 4 or N1 < 4:
        raise ValueError(
            f"grid too coarse for the interface ghost relations: {N2} disc and "
            f"{N1} annulus cells (need at least 4 per side)")
    a = np.asarray(model.a)
    b = np.asarray(model.b)
    n = model.n
    beta = model.beta
    ann = grid.index("annulus")

    D = radial_laplacian(grid, "full", ("neumann", "dirichlet"))
    DT = radial_laplacian(grid, "annulus", ("dirichlet", "dirichlet"))
    w = grid.weights
    wa = w[ann]
    kappa = np.where(np.arange(N) < N2, model.kappa2, model.kappa1)

    dim = 2 * N + (n + 1) * N1
    f = np.arange(N)
    y = N + f
    th = [2 * N + j * N1 + np.arange(N1) for j in range(n + 1)]
    I1 = np.eye(N1)

    A = np.zeros((dim, dim))
    A[np.ix_(f, y)] = np.eye(N)
    A[np.ix_(y, f)] = -D @ (kappa[:, None] * D)
    for j in range(n + 1):
        A[np.ix_(y, th[j])] = -beta * a[j] * D[:, ann]
    for j in range(n):
        A[np.ix_(th[j], th[j + 1])] = I1
    A[np.ix_(th[n], y)] = (beta / a[n]) * D[ann, :]
    for j in range(n + 1):
        A[np.ix_(th[n], th[j])] += (b[j] / a[n]) * DT
    for j in range(n):
        col = th[j] if paper_literal else th[j + 1]
        A[np.ix_(th[n], col)] -= (a[j] / a[n]) * I1

    S = -(wa[:, None] * DT)
    S = 0.5 * (S + S.T)
    G = np.zeros((dim, dim))
    G[np.ix_(f, f)] = D.T @ ((kappa * w)[:, None] * D)
    G[np.ix_(y, y)] = np.diag(w)
    for j in range(n + 1):
        for k in range(n + 1):
            blk = a[j] * a[k] * np.diag(wa)
            if j == k and j < n:
                blk = blk + S
            G[np.ix_(th[j], th[k])] = blk
    G[np.ix_(f, f)] = 0.5 * (G[np.ix_(f, f)] + G[np.ix_(f, f)].T)

    layout = {
        "v": f[:N2], "u": f[N2:], "z": y[:N2], "w": y[N2:],
        **{f"theta{j}": th[j] for j in range(n + 1)},
    }
    return RadialOperator(A=A, G=GramMatrix(G), layout=layout, grad_gram=S, model=model,
                          grid=grid)

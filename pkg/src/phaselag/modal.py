"""Sine-basis block diagonalization of the fully thermoelastic plate.

With hinged plate and Dirichlet temperature conditions, every Dirichlet
eigenfunction of the Laplacian (``-lap phi = d phi``) spans an invariant
subspace of the generator, so the operator splits into independent
``(n+3) x (n+3)`` blocks over the state ``(u, v, Theta_0, ..., Theta_n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import GramMatrix
from .model import Interval, PhaseLagModel, Rectangle
from .operator import BlockSet, DiscreteOperator


@dataclass(frozen=True)
class DirichletMode:
    index: tuple[int, ...]
    d: float


@dataclass(frozen=True, eq=False)
class ModalBlock(DiscreteOperator):
    mode: DirichletMode

    @property
    def M(self) -> np.ndarray:
        return self.A


def dirichlet_eigenvalues(domain, K: int) -> list[DirichletMode]:
    """The ``K`` smallest Dirichlet-Laplacian eigenvalues, ascending, ties by index."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if isinstance(domain, Interval):
        return [DirichletMode((m,), (math.pi * m / domain.L) ** 2) for m in range(1, K + 1)]
    if not isinstance(domain, Rectangle):
        raise TypeError(f"sine basis needs a Rectangle or Interval, got {type(domain).__name__}")
    L1, L2 = domain.L1, domain.L2
    M = max(2, math.isqrt(K) + 1)
    while True:
        modes = sorted(
            (math.pi ** 2 * (m1 * m1 / L1 ** 2 + m2 * m2 / L2 ** 2), m1, m2)
            for m1 in range(1, M + 1) for m2 in range(1, M + 1)
        )[:K]
        # every mode outside the enumerated square exceeds this bound
        outside = math.pi ** 2 * min((M + 1) ** 2 / L1 ** 2 + 1 / L2 ** 2,
                                     1 / L1 ** 2 + (M + 1) ** 2 / L2 ** 2)
        if len(modes) == K and modes[-1][0] < outside:
            return [DirichletMode((m1, m2), d) for d, m1, m2 in modes]
        M *= 2


def assemble_block(model: PhaseLagModel, mode: DirichletMode, *,
                   paper_literal: bool = False) -> ModalBlock:
    """Generator and Gram matrix of one Dirichlet mode.

    Rows: ``u' = v``; ``v' = -kappa1 d^2 u + beta d vartheta``;
    ``Theta_j' = Theta_{j+1}``; and
    ``Theta_n' = (-beta d v - d sum b_j Theta_j - sum_{j<n} a_j Theta_{j+1}) / a_n``.
    ``paper_literal=True`` uses ``Theta_j`` in place of ``Theta_{j+1}`` in the
    last sum, which is not equivalent to the original heat equation.
    """
    d = float(mode.d)
    if not d > 0:
        raise ValueError("mode eigenvalue must be positive")
    a = np.asarray(model.a)
    b = np.asarray(model.b)
    n = model.n
    k1, beta = model.kappa1, model.beta
    m = n + 3
    A = np.zeros((m, m))
    A[0, 1] = 1.0
    A[1, 0] = -k1 * d * d
    A[1, 2:] = beta * d * a
    for j in range(n):
        A[2 + j, 3 + j] = 1.0
    last = m - 1
    A[last, 1] = -beta * d / a[n]
    A[last, 2:] += -d * b / a[n]
    for j in range(n):
        col = 2 + j if paper_literal else 3 + j
        A[last, col] += -a[j] / a[n]

    G = np.zeros((m, m))
    G[0, 0] = k1 * d * d
    G[1, 1] = 1.0
    T = np.outer(a, a)
    T[np.arange(n), np.arange(n)] += d
    G[2:, 2:] = T

    layout = {"u": np.array([0]), "v": np.array([1])}
    for j in range(n + 1):
        layout[f"theta{j}"] = np.array([2 + j])
    return ModalBlock(A=A, G=GramMatrix(G), layout=layout, grad_gram=np.array([[d]]),
                      model=model, mode=mode)


def assemble_blocks(model: PhaseLagModel, domain, K: int, *,
                    paper_literal: bool = False) -> BlockSet:
    return BlockSet(tuple(assemble_block(model, md, paper_literal=paper_literal)
                          for md in dirichlet_eigenvalues(domain, K)))


def assemble_full(model: PhaseLagModel, domain, K: int, *,
                  paper_literal: bool = False) -> DiscreteOperator:
    """Block-diagonal assembly of the first ``K`` blocks (dense; ``K <= 200``)."""
    if K > 200:
        raise ValueError("assemble_full is limited to K <= 200; use assemble_blocks")
    blocks = assemble_blocks(model, domain, K, paper_literal=paper_literal)
    return direct_sum(blocks)


def direct_sum(blocks: BlockSet) -> DiscreteOperator:
    items = list(blocks)
    A = sla.block_diag(*[blk.A for blk in items])
    G = sla.block_diag(*[blk.G.matrix for blk in items])
    offsets = np.cumsum([0] + [blk.dim for blk in items])
    layout = {}
    for name in items[0].layout:
        layout[name] = np.concatenate([off + blk.layout[name] for off, blk in zip(offsets, items)])
    S = sla.block_diag(*[blk.grad_gram for blk in items])
    return DiscreteOperator(A=A, G=GramMatrix(G), layout=layout, grad_gram=S, model=items[0].model)

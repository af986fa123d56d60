"""Assembled generator/Gram pairs shared by the modal and radial discretizations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .linalg import GramMatrix
from .model import PhaseLagModel


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Generator ``A`` with the Gram matrix of the discrete phase-space norm.

    ``layout`` maps state component names (``"u"``, ``"v"``, ``"w"``, ``"z"``,
    ``"theta0"``, ...) to index arrays into the state vector.  ``grad_gram`` is
    the Hermitian form ``S`` with ``Theta^H S Theta`` the discrete ``|grad Theta|^2``
    of one temperature component; the energy-identity terms are built from it.
    """

    A: np.ndarray
    G: GramMatrix
    layout: Mapping[str, np.ndarray]
    grad_gram: np.ndarray
    model: PhaseLagModel | None

    @classmethod
    def plain(cls, A, G=None) -> "DiscreteOperator":
        """Wrap a bare generator (no temperature components, identity Gram by default)."""
        A = np.atleast_2d(np.asarray(A))
        n = A.shape[0]
        gram = G if isinstance(G, GramMatrix) else GramMatrix(
            np.eye(n) if G is None else np.atleast_2d(np.asarray(G)))
        return cls(A=A, G=gram, layout={}, grad_gram=np.zeros((0, 0)), model=None)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def theta(self, x: np.ndarray) -> list[np.ndarray]:
        """Temperature components ``Theta_0..Theta_n`` of a state (or stack of states)."""
        x = np.asarray(x)
        if self.model is None:
            return []
        return [x[..., self.layout[f"theta{j}"]] for j in range(self.model.n + 1)]

    def shifted(self, shift: float) -> np.ndarray:
        return self.A - shift * np.eye(self.dim)

    def blocks(self) -> Sequence["DiscreteOperator"]:
        return (self,)


@dataclass(frozen=True, eq=False)
class BlockSet:
    """A direct sum of G-orthogonal operators, kept unassembled."""

    items: tuple[DiscreteOperator, ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("empty block set")
        object.__setattr__(self, "items", tuple(self.items))

    def blocks(self) -> Sequence[DiscreteOperator]:
        return self.items

    def __len__(self):
        return len(self.items)

    def __getitem__(self, k):
        return self.items[k]

    def __iter__(self):
        return iter(self.items)

    @property
    def dim(self) -> int:
        return sum(b.dim for b in self.items)


def energy_terms(op: DiscreteOperator, x: np.ndarray):
    """Energy ``E = ||x||_G^2 / 2`` and the two right-hand-side terms of its identity.

    ``x`` may be a single state or an array of states (last axis = state).
    Returns ``(E, d1, d2)`` with ``d1 = -Re (sum a_j Theta_j)^H S (sum b_j Theta_j)``
    and ``d2 = Re sum_{j<n} Theta_j^H S Theta_{j+1}``.
    """
    x = np.asarray(x, dtype=complex)
    G = op.G.matrix
    E = 0.5 * np.einsum("...i,ij,...j->...", x.conj(), G, x).real
    model = op.model
    if model is None:
        return E, np.zeros_like(E), np.zeros_like(E)
    th = op.theta(x)
    S = op.grad_gram
    vartheta = sum(aj * t for aj, t in zip(model.a, th))
    bsum = sum(bj * t for bj, t in zip(model.b, th))
    d1 = -np.einsum("...i,ij,...j->...", vartheta.conj(), S, bsum).real
    d2 = np.zeros_like(E)
    for j in range(model.n):
        d2 = d2 + np.einsum("...i,ij,...j->...", th[j].conj(), S, th[j + 1]).real
    return E, d1, d2


def grad_seminorms(op: DiscreteOperator, x: np.ndarray) -> np.ndarray:
    """``|grad Theta_j|^2`` for every component; shape ``(..., n+1)``."""
    S = op.grad_gram
    th = op.theta(np.asarray(x, dtype=complex))
    return np.stack([np.einsum("...i,ij,...j->...", t.conj(), S, t).real for t in th], axis=-1)

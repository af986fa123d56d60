"""Dense complex linear-algebra kernels.

Everything here works on plain ``numpy`` arrays.  The weighted norms are taken
in the inner product ``<x, y>_G = y^H G x`` of a Hermitian positive definite
Gram matrix ``G = L L^H``; the operator norm of ``M`` in that inner product is
``||L^H M L^{-H}||_2``.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from numba import njit

EPS = np.finfo(float).eps


class LinAlgError(Exception):
    """Base class for kernel failures."""


class SingularMatrixError(LinAlgError):
    def __init__(self, msg: str, pivot: int):
        super().__init__(msg)
        self.pivot = pivot


class ConvergenceError(LinAlgError):
    """An iteration stopped without meeting its tolerance.

    ``partial`` holds whatever was computed (converged eigenvalues, last
    iterate estimate) and ``residual`` the last residual, when meaningful.
    """

    def __init__(self, msg: str, partial=None, residual: float = float("nan")):
        super().__init__(msg)
        self.partial = partial
        self.residual = residual


class ExponentialOverflowError(LinAlgError):
    pass


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _square(A) -> np.ndarray:
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape}")
    return A


@dataclass(eq=False)
class GramMatrix:
    """Hermitian positive definite matrix with a lazily computed Cholesky factor.

    The factor is computed at most once, under a lock, so a ``GramMatrix`` can
    be shared between threads.
    """

    matrix: np.ndarray
    _chol: np.ndarray | None = field(default=None, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        G = _square(self.matrix)
        scale = max(np.abs(G).max(), np.finfo(float).tiny)
        if np.abs(G - G.conj().T).max() > 1e-12 * scale:
            raise ValueError("Gram matrix is not Hermitian to 1e-12 relative")
        self.matrix = 0.5 * (G + G.conj().T)

    @classmethod
    def identity(cls, n: int) -> "GramMatrix":
        return cls(np.eye(n, dtype=complex))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def cholesky(self) -> np.ndarray:
        """Lower triangular ``L`` with ``G = L L^H``."""
        if self._chol is None:
            with self._lock:
                if self._chol is None:
                    try:
                        self._chol = np.linalg.cholesky(self.matrix)
                    except np.linalg.LinAlgError as exc:
                        raise LinAlgError("Gram matrix is not positive definite") from exc
        return self._chol

    def inner(self, x, y) -> complex:
        return complex(np.vdot(y, self.matrix @ x))

    def norm(self, x) -> float:
        return math.sqrt(max(self.inner(x, x).real, 0.0))

    def to_orthonormal(self, A) -> np.ndarray:
        """``L^H A L^{-H}``: the matrix of ``A`` in a G-orthonormal basis."""
        L = self.cholesky
        B = L.conj().T @ _square(A)
        # B L^{-H} = (L^{-1} B^H)^H
        return sla.solve_triangular(L, B.conj().T, lower=True).conj().T


def _gram(G, n: int) -> GramMatrix:
    if G is None:
        return GramMatrix.identity(n)
    if not isinstance(G, GramMatrix):
        G = GramMatrix(np.atleast_2d(np.asarray(G, dtype=complex)))
    if G.n != n:
        raise ValueError(f"Gram matrix has size {G.n}, operator has size {n}")
    return G


# ---------------------------------------------------------------------------
# LU

def lu_factor(A):
    """Partial-pivoting LU of a square matrix.

    Raises ``SingularMatrixError`` carrying the (0-based) index of the first
    exactly zero pivot.
    """
    A = _square(A)
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    diag = np.abs(np.diag(lu))
    zero = np.flatnonzero(diag == 0.0)
    if zero.size:
        k = int(zero[0])
        raise SingularMatrixError(f"singular matrix: zero pivot at index {k}", pivot=k)
    return lu, piv


def lu_solve(A, B):
    """Solve ``A X = B``.  ``A`` may also be a factorization from ``lu_factor``."""
    factors = A if isinstance(A, tuple) else lu_factor(A)
    B = np.asarray(B, dtype=complex)
    if B.shape[0] != factors[0].shape[0]:
        raise ValueError(f"right-hand side has {B.shape[0]} rows, matrix has {factors[0].shape[0]}")
    return sla.lu_solve(factors, B, check_finite=False)


# ---------------------------------------------------------------------------
# Eigenvalues: balancing, Householder reduction to Hessenberg form, and the
# implicitly shifted complex QR iteration with Wilkinson shifts.

def balance(A) -> np.ndarray:
    """Parlett-Reinsch diagonal balancing (powers of two, so exact)."""
    A = _square(A).copy()
    n = A.shape[0]
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            c = np.abs(A[:, i]).sum() - abs(A[i, i])
            r = np.abs(A[i, :]).sum() - abs(A[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g, f, s = r / radix, 1.0, c + r
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c > g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * s:
                converged = False
                A[i, :] /= f
                A[:, i] *= f
    return A


def hessenberg(A) -> np.ndarray:
    """Unitary similarity to upper Hessenberg form via Householder reflectors."""
    H = _square(A).copy()
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0.0
    return H


@njit(cache=True)
def _hqr(H, maxiter):
    # Eigenvalues only: rotations are confined to the active window [lo, hi],
    # which is valid because deflated parts never feed back into it.
    n = H.shape[0]
    eig = np.zeros(n, dtype=np.complex128)
    done = np.zeros(n, dtype=np.bool_)
    eps = 2.220446049250313e-16
    hnorm = 0.0
    for i in range(n):
        for j in range(n):
            hnorm = max(hnorm, abs(H[i, j]))
    hi = n - 1
    its = 0
    total = 0
    while hi >= 0:
        if hi == 0:
            eig[0] = H[0, 0]
            done[0] = True
            break
        lo = hi
        while lo > 0:
            s = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if s == 0.0:
                s = hnorm
            if abs(H[lo, lo - 1]) <= eps * s:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eig[hi] = H[hi, hi]
            done[hi] = True
            hi -= 1
            its = 0
            continue
        if total >= maxiter:
            return eig, done, 1
        a = H[hi - 1, hi - 1]
        b = H[hi - 1, hi]
        c = H[hi, hi - 1]
        d = H[hi, hi]
        if its == 10 or its == 20:
            # exceptional shift to break cycles
            mu = d + 0.75 * abs(H[hi, hi - 1])
        else:
            half = 0.5 * (a - d)
            disc = np.sqrt(half * half + b * c)
            mu1 = 0.5 * (a + d) + disc
            mu2 = 0.5 * (a + d) - disc
            mu = mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2
        x = H[lo, lo] - mu
        y = H[lo + 1, lo]
        for k in range(lo, hi):
            r = np.sqrt(abs(x) ** 2 + abs(y) ** 2)
            if r == 0.0:
                cs = 1.0 + 0.0j
                sn = 0.0 + 0.0j
            else:
                cs = x / r
                sn = y / r
            # rows k, k+1  <-  Q^H [row k; row k+1],  Q = [[c, -conj(s)], [s, conj(c)]]
            for j in range(max(lo, k - 1), hi + 1):
                h1 = H[k, j]
                h2 = H[k + 1, j]
                H[k, j] = np.conj(cs) * h1 + np.conj(sn) * h2
                H[k + 1, j] = -sn * h1 + cs * h2
            # columns k, k+1  <-  [col k, col k+1] Q
            for i in range(lo, min(k + 2, hi) + 1):
                h1 = H[i, k]
                h2 = H[i, k + 1]
                H[i, k] = h1 * cs + h2 * sn
                H[i, k + 1] = -h1 * np.conj(sn) + h2 * np.conj(cs)
            if k < hi - 1:
                x = H[k + 1, k]
                y = H[k + 2, k]
        its += 1
        total += 1
    return eig, done, 0


def eigenvalues(A, *, maxiter_factor: int = 30, balance_first: bool = True) -> np.ndarray:
    """All eigenvalues of a dense square matrix (order unspecified).

    Raises ``ConvergenceError`` (with the eigenvalues deflated so far in
    ``partial``) after ``maxiter_factor * n`` QR sweeps.
    """
    A = _square(A)
    n = A.shape[0]
    if n > 2000:
        raise ValueError("eigenvalues: dimension above 2000 is not supported")
    if n == 1:
        return A[0].copy()
    H = hessenberg(balance(A) if balance_first else A)
    eig, done, status = _hqr(np.ascontiguousarray(H), maxiter_factor * n)
    if status:
        raise ConvergenceError(
            f"QR iteration did not converge after {maxiter_factor * n} sweeps",
            partial=eig[done].copy(),
        )
    return eig


# ---------------------------------------------------------------------------
# Weighted norms by subspace (block power) iteration with Rayleigh-Ritz.

def _top_singular_value(apply_gram, n: int, *, block: int, tol: float, maxiter: int,
                        seed: int, stall: int = 25) -> float:
    """Largest eigenvalue of the Hermitian PSD map ``apply_gram`` (= M^H M), square-rooted.

    Block power iteration with Rayleigh-Ritz.  Clustered top singular values
    stall a narrow block, so every ``stall`` steps the block width grows 4x
    (warm-started); at full width the Ritz step is exact.
    """
    p = min(n, block)
    rng = np.random.default_rng(seed)
    Q = rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p))
    Q, _ = np.linalg.qr(Q)
    theta_old = None
    step_old = 0.0
    resid = float("inf")
    theta = 0.0
    for it in range(1, maxiter + 1):
        Y = apply_gram(Q)
        H = Q.conj().T @ Y
        H = 0.5 * (H + H.conj().T)
        w, V = np.linalg.eigh(H)
        theta = float(w[-1])
        if not theta > 0.0:
            return 0.0 if theta == 0.0 else math.nan
        q = Q @ V[:, -1]
        resid = float(np.linalg.norm(Y @ V[:, -1] - theta * q)) / theta
        if p == n:
            return math.sqrt(theta)
        if theta_old is not None:
            step = abs(theta - theta_old)
            # geometric extrapolation of the remaining error from successive steps
            ratio = step / step_old if step_old > 0 else 0.0
            remaining = step * ratio / (1.0 - ratio) if ratio < 1.0 else math.inf
            if step <= tol * theta and remaining <= tol * theta and resid <= math.sqrt(tol):
                return math.sqrt(theta)
            step_old = step
        theta_old = theta
        Z = Y @ V[:, ::-1]
        if it % stall == 0:
            extra = min(n, 4 * p) - p
            Z = np.hstack([Z, rng.standard_normal((n, extra)) + 1j * rng.standard_normal((n, extra))])
            p += extra
        Q, _ = np.linalg.qr(Z)
    raise ConvergenceError(
        f"subspace iteration did not converge in {maxiter} steps",
        partial=math.sqrt(max(theta, 0.0)), residual=resid,
    )


@dataclass(frozen=True)
class NormEstimate:
    value: float
    singular: bool = False
    message: str = ""


def weighted_resolvent_norm(A, G=None, lam: complex = 0.0, *, tol: float = 1e-12,
                            maxiter: int = 500, block: int = 8, seed: int = 0,
                            info: bool = False):
    """``||(lam I - A)^{-1}||_G``, or ``inf`` when ``lam I - A`` is singular.

    The resolvent is never formed: each step applies ``(lam I - A)^{-1}`` and its
    adjoint through one LU factorization.  With ``info=True`` a
    ``NormEstimate`` carrying the singularity diagnostic is returned instead.
    """
    A = _square(A)
    n = A.shape[0]
    G = _gram(G, n)
    L = G.cholesky
    LH = L.conj().T
    shifted = lam * np.eye(n) - A
    try:
        lu = lu_factor(shifted)
    except SingularMatrixError as exc:
        est = NormEstimate(math.inf, True, str(exc))
        return est if info else est.value
    pivots = np.abs(np.diag(lu[0]))
    if pivots.min() <= n * EPS * max(np.abs(shifted).max(), 1.0):
        est = NormEstimate(math.inf, True,
                           f"lam I - A singular to working precision (pivot {int(pivots.argmin())})")
        return est if info else est.value

    def apply_gram(Z):
        # (L^H R L^{-H})^H (L^H R L^{-H}) Z = L^{-1} R^H G R L^{-H} Z
        Y = sla.solve_triangular(L, Z, lower=True, trans="C")
        Y = sla.lu_solve(lu, Y, check_finite=False)
        Y = L @ (LH @ Y)
        Y = sla.lu_solve(lu, Y, trans=2, check_finite=False)
        return sla.solve_triangular(L, Y, lower=True)

    value = _top_singular_value(apply_gram, n, block=block, tol=tol, maxiter=maxiter, seed=seed)
    if not math.isfinite(value):
        est = NormEstimate(math.inf, True, "resolvent overflowed")
    else:
        est = NormEstimate(value)
    return est if info else est.value


def weighted_norm(M, G=None, *, tol: float = 1e-12, maxiter: int = 500, block: int = 8,
                  seed: int = 0) -> float:
    """Operator norm ``||M||_G`` by the same subspace iteration."""
    M = _square(M)
    n = M.shape[0]
    G = _gram(G, n)
    Mt = G.to_orthonormal(M)
    scale = float(np.abs(Mt).max())
    if scale == 0.0 or not math.isfinite(scale):
        return scale
    Mt = Mt / scale
    MtH = Mt.conj().T
    return scale * _top_singular_value(lambda Z: MtH @ (Mt @ Z), n, block=block, tol=tol,
                                       maxiter=maxiter, seed=seed)


def numerical_abscissa(A, G=None) -> float:
    """``sup Re<Ax, x>_G / <x, x>_G`` as the top eigenvalue of ``(GA + A^H G)/2`` against ``G``."""
    A = _square(A)
    G = _gram(G, A.shape[0])
    At = G.to_orthonormal(A)
    return float(np.linalg.eigvalsh(0.5 * (At + At.conj().T))[-1])


# ---------------------------------------------------------------------------
# Matrix exponential: scaling and squaring around a [13/13] Pade approximant.

_PADE13 = (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
           1187353796428800.0, 129060195264000.0, 10559470521600.0,
           670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
           960960.0, 16380.0, 182.0, 1.0)
_THETA13 = 5.371920351148152


def matrix_exponential(A, t: float = 1.0, *, extra_squarings: int = 0) -> np.ndarray:
    """``exp(t A)``.

    ``extra_squarings`` scales further than the backward-error bound requires,
    which tightens the Pade truncation error (used for self-refinement checks).
    """
    A = _square(A)
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    n = A.shape[0]
    X = t * A
    norm1 = np.abs(X).sum(axis=0).max()
    if not math.isfinite(norm1):
        raise ExponentialOverflowError("t*A is not finite")
    if norm1 == 0.0:
        return np.eye(n, dtype=complex)
    s = max(0, math.ceil(math.log2(norm1 / _THETA13))) + int(extra_squarings)
    X = X / 2.0 ** s
    b = _PADE13
    ident = np.eye(n, dtype=complex)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X2 @ X4
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
             + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
    V = X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident
    with np.errstate(over="raise", invalid="raise"):
        try:
            F = lu_solve(V - U, V + U)
            for _ in range(s):
                F = F @ F
        except FloatingPointError as exc:
            raise ExponentialOverflowError(
                f"exp(tA) overflowed (||tA||_1 = {norm1:.3g})") from exc
    if not np.all(np.isfinite(F)):
        raise ExponentialOverflowError(f"exp(tA) overflowed (||tA||_1 = {norm1:.3g})")
    return F

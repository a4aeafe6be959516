"""Dense complex linear algebra behind the solvers.

All eigenvalue and singular value work goes through :class:`DenseBackend`, so a
structure-preserving eigensolver can be dropped in later without touching the
callers.  Resolvent solves are handled by :class:`Resolvent`, which either
factors ``lam*E - A`` from scratch at every point or reduces ``(A, E)`` once to
triangular form so that each point costs a single triangular solve.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from scipy.linalg.lapack import zgetrf, zgetrs, ztrtrs

from .errors import NumericalFailure, PoleProximity

EPS = np.finfo(float).eps

#: Relative size below which a homogeneous eigenvalue coordinate counts as zero.
HOMOGENEOUS_TOL = 64 * EPS


class SVD(NamedTuple):
    """``M = U @ diag(s) @ V.conj().T`` with ``s`` in descending order."""

    s: np.ndarray
    U: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class PencilEigenvalues:
    """Eigenvalues of a pencil ``Mp - lam*Np`` in homogeneous form.

    ``values`` holds ``alpha/beta`` for the finite eigenvalues and ``inf`` for
    the ones flagged ``infinite``.  Pairs with both coordinates negligible are
    flagged ``indeterminate`` (a symptom of a singular pencil) and also carry
    ``nan``.
    """

    alpha: np.ndarray
    beta: np.ndarray
    values: np.ndarray
    infinite: np.ndarray
    indeterminate: np.ndarray

    @property
    def finite_values(self) -> np.ndarray:
        return self.values[~(self.infinite | self.indeterminate)]


def _as_complex(M) -> np.ndarray:
    return np.asarray(M, dtype=complex)


def _split_homogeneous(alpha, beta, norm_m, norm_n):
    scale_a = HOMOGENEOUS_TOL * max(norm_m, np.finfo(float).tiny)
    scale_b = HOMOGENEOUS_TOL * max(norm_n, np.finfo(float).tiny)
    small_a = np.abs(alpha) <= scale_a
    small_b = np.abs(beta) <= scale_b
    indeterminate = small_a & small_b
    infinite = small_b & ~indeterminate
    values = np.full(alpha.shape, np.nan + 0j)
    ok = ~(infinite | indeterminate)
    values[ok] = alpha[ok] / beta[ok]
    values[infinite] = np.inf
    return values, infinite, indeterminate


class DenseBackend:
    """LAPACK backed dense kernels via :mod:`scipy.linalg`.

    Parameters
    ----------
    svd_driver : {'gesdd', 'gesvd'}
        LAPACK routine used for singular value decompositions.  ``gesvd`` is
        slower but sidesteps the rare accuracy problems of the divide and
        conquer driver.
    """

    name = "scipy-dense"

    def __init__(self, svd_driver: str = "gesdd"):
        if svd_driver not in ("gesdd", "gesvd"):
            raise ValueError(f"unknown SVD driver {svd_driver!r}")
        self.svd_driver = svd_driver

    def __repr__(self):
        return f"DenseBackend(svd_driver={self.svd_driver!r})"

    def svd(self, M, full_matrices: bool = True) -> SVD:
        M = _as_complex(M)
        if not np.all(np.isfinite(M)):
            raise NumericalFailure("non-finite entries passed to the SVD")
        try:
            U, s, Vh = sla.svd(M, full_matrices=full_matrices,
                               lapack_driver=self.svd_driver, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalFailure(f"SVD failed: {exc}") from exc
        return SVD(s, U, Vh.conj().T)

    def eig_pencil(self, Mp, Np) -> PencilEigenvalues:
        Mp = _as_complex(Mp)
        Np = _as_complex(Np)
        if not (np.all(np.isfinite(Mp)) and np.all(np.isfinite(Np))):
            raise NumericalFailure("non-finite entries passed to the QZ solver")
        try:
            w = sla.eig(Mp, Np, right=False, homogeneous_eigvals=True,
                        check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalFailure(f"QZ iteration failed: {exc}") from exc
        alpha, beta = w[0], w[1]
        values, infinite, indeterminate = _split_homogeneous(
            alpha, beta, np.linalg.norm(Mp), np.linalg.norm(Np))
        return PencilEigenvalues(alpha, beta, values, infinite, indeterminate)

    def eig_pencil_vectors(self, A, E):
        """Eigenvalues with unit-norm left and right eigenvectors of ``(A, E)``.

        Returns ``(eigs, left, right)`` with ``left[:, k]^H A = lam_k left[:, k]^H E``
        and ``A right[:, k] = lam_k E right[:, k]``.
        """
        A = _as_complex(A)
        E = _as_complex(E)
        try:
            w, vl, vr = sla.eig(A, E, left=True, right=True,
                                homogeneous_eigvals=True, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalFailure(f"QZ iteration failed: {exc}") from exc
        alpha, beta = w[0], w[1]
        values, infinite, indeterminate = _split_homogeneous(
            alpha, beta, np.linalg.norm(A), np.linalg.norm(E))
        vl = vl / np.linalg.norm(vl, axis=0)
        vr = vr / np.linalg.norm(vr, axis=0)
        eigs = PencilEigenvalues(alpha, beta, values, infinite, indeterminate)
        return eigs, vl, vr


DEFAULT_BACKEND = DenseBackend()


def svd_full(M, backend: DenseBackend | None = None) -> SVD:
    """Full SVD with ``U`` and ``V`` square."""
    return (backend or DEFAULT_BACKEND).svd(M, full_matrices=True)


def generalized_eigs(Mp, Np, backend: DenseBackend | None = None) -> PencilEigenvalues:
    """All eigenvalues of ``Mp - lam*Np``; infinite ones are flagged, not dropped."""
    return (backend or DEFAULT_BACKEND).eig_pencil(Mp, Np)


def smallest_singular_value(M, backend: DenseBackend | None = None):
    """Return ``(sigma_min, u, v)`` with ``M v = sigma_min u``."""
    s, U, V = (backend or DEFAULT_BACKEND).svd(M, full_matrices=True)
    k = min(M.shape) - 1
    return s[k], U[:, k], V[:, k]


def is_identity(M) -> bool:
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and np.array_equal(M, np.eye(M.shape[0]))


class PointSolver:
    """Solver for ``W Y = X`` with ``W = lam*E_r - A_r`` in reduced coordinates."""

    __slots__ = ("W", "_lu", "_piv", "triangular")

    def __init__(self, W, triangular):
        self.W = W
        self.triangular = triangular
        if triangular:
            if np.any(np.diag(W) == 0):
                raise PoleProximity("shifted matrix is exactly singular")
            self._lu = None
            self._piv = None
        else:
            lu, piv, info = zgetrf(W)
            if info > 0:
                raise PoleProximity("shifted matrix is exactly singular")
            if info < 0:
                raise NumericalFailure("LU factorization failed")
            self._lu = lu
            self._piv = piv

    def solve(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        if X.shape[0] == 0 or X.size == 0:
            return np.zeros_like(X)
        if self.triangular:
            Y, info = ztrtrs(self.W, X)
        else:
            Y, info = zgetrs(self._lu, self._piv, X)
        if info != 0:
            raise PoleProximity("shifted matrix is exactly singular")
        if not np.all(np.isfinite(Y)):
            raise PoleProximity("resolvent solve overflowed")
        return Y


class Resolvent:
    """Solves with ``lam*E - A`` at arbitrary complex shifts.

    In ``'lu'`` mode every shift gets a fresh LU factorization.  In
    ``'hessenberg'`` mode ``(A, E)`` is reduced once to complex generalized
    Schur form, ``A = Q S Z^H`` and ``E = Q T Z^H``, so a shift only needs a
    triangular solve with ``lam*T - S``; triangular is the sharpest form of
    Hessenberg structure and LAPACK solves it in quadratic time.

    The attributes ``A_r``, ``E_r``, ``B_r`` and ``C_r`` hold the reduced
    matrices; ``E_r`` is ``None`` when it is the identity.
    """

    MODES = ("lu", "hessenberg")

    def __init__(self, A, E=None, B=None, C=None, mode: str = "lu"):
        if mode not in self.MODES:
            raise ValueError(f"unknown resolvent mode {mode!r}")
        A = _as_complex(A)
        n = A.shape[0]
        identity_e = E is None or is_identity(E)
        E = None if identity_e else _as_complex(E)
        B = np.eye(n, dtype=complex) if B is None else _as_complex(B)
        C = np.eye(n, dtype=complex) if C is None else _as_complex(C)
        self.mode = mode
        self.n = n
        self.E = E
        if mode == "hessenberg":
            try:
                if identity_e:
                    S, Z = sla.schur(A, output="complex", check_finite=False)
                    Q, T = Z, None
                else:
                    S, T, Q, Z = sla.qz(A, E, output="complex", check_finite=False)
            except (np.linalg.LinAlgError, ValueError) as exc:
                raise NumericalFailure(f"Schur reduction failed: {exc}") from exc
            self.A_r, self.E_r = S, T
            self.Q, self.Z = Q, Z
            self.B_r = Q.conj().T @ B
            self.C_r = C @ Z
        else:
            self.A_r, self.E_r = A, E
            self.Q = self.Z = None
            self.B_r, self.C_r = B, C

    def shifted(self, lam) -> np.ndarray:
        """``lam*E_r - A_r`` in reduced coordinates."""
        if self.E_r is None:
            W = -self.A_r.copy()
            W[np.diag_indices(self.n)] += lam
            return W
        return lam * self.E_r - self.A_r

    def times_e(self, X) -> np.ndarray:
        """Multiply by the reduced ``E``."""
        return X if self.E_r is None else self.E_r @ X

    def factor(self, lam) -> PointSolver:
        return PointSolver(self.shifted(lam), self.mode == "hessenberg")

    def apply(self, lam, X) -> np.ndarray:
        """``(lam*E - A)^{-1} X`` in the original coordinates."""
        X = _as_complex(X)
        solver = self.factor(lam)
        if self.mode == "hessenberg":
            return self.Z @ solver.solve(self.Q.conj().T @ X)
        return solver.solve(X)


def resolvent_factor(A, E=None, mode: str = "lu") -> Resolvent:
    return Resolvent(A, E, mode=mode)


def resolvent_apply(fact: Resolvent, lam, X) -> np.ndarray:
    return fact.apply(lam, X)

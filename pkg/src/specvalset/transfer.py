"""Evaluation of ``||G(lam)||_2`` and its derivatives along lines and rays."""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .counters import Counters
from .errors import PoleProximity
from .linalg import DEFAULT_BACKEND, DenseBackend, Resolvent

#: Second derivatives are on by default up to this many entries in ``G``.
SECOND_DERIVATIVE_LIMIT = 64 * 64


@dataclass(frozen=True)
class SingularTriplet:
    """Largest singular value of ``G(lam)`` with its singular vectors.

    At a pole ``sigma`` is ``inf`` and the vectors are ``None``.
    """

    sigma: float
    u: np.ndarray | None
    v: np.ndarray | None
    singular_values: np.ndarray | None = None
    pole: bool = False


@dataclass(frozen=True)
class DerivativeBundle:
    """``sigma_1`` and its derivatives along a path ``lam(t)``.

    ``second`` is ``None`` when it was not requested or when the largest
    singular value is too close to being repeated for it to be meaningful;
    ``degenerate`` records the latter.  ``gap`` is the distance from
    ``sigma_1`` to the next eigenvalue of ``[[0, G], [G^H, 0]]``.
    """

    value: float
    first: float
    second: float | None
    parameterization: str
    gap: float
    degenerate: bool
    pole: bool = False
    triplet: SingularTriplet | None = None


class Sample(NamedTuple):
    """Value and derivatives of ``sigma_1 - 1/epsilon`` at one point."""

    f: float
    df: float
    d2f: float | None


def _pole_bundle(parameterization):
    return DerivativeBundle(np.inf, np.nan, None, parameterization, np.inf, False, True,
                            SingularTriplet(np.inf, None, None, None, True))


def _dilation_gap(s, p, m):
    if len(s) >= 2:
        return s[0] - s[1]
    return s[0] if p != m else 2 * s[0]


def _second_from_projections(s, row, col, p2_00, p, m):
    """Second derivative of the top eigenvalue of ``[[0, G], [G^H, 0]]``.

    ``row`` is ``u_1^H G' V`` (length ``m``), ``col`` is ``U^H G' v_1`` (length
    ``p``) and ``p2_00`` is ``u_1^H G'' v_1``, all in the singular bases of
    ``G``.  The sum runs over the eigenvectors ``[u_k; +-v_k]/sqrt(2)`` of the
    dilation, plus ``[u_k; 0]`` or ``[0; v_k]`` for the unpaired zero
    eigenvalues when ``G`` is not square.
    """
    s1 = s[0]
    r = min(p, m)
    total = p2_00.real + row[0].imag ** 2 / s1
    if r > 1:
        a = row[1:r]
        b = np.conj(col[1:r])
        sk = s[1:r]
        plus = np.abs(a + b) ** 2 / 4
        minus = np.abs(b - a) ** 2 / 4
        total += 2 * np.sum(plus / (s1 - sk) + minus / (s1 + sk))
    if p > m:
        total += np.sum(np.abs(col[m:]) ** 2) / s1
    elif m > p:
        total += np.sum(np.abs(row[p:]) ** 2) / s1
    return float(total)


def second_derivative_hermitian(s, U, V, dG, d2G) -> float:
    """Second derivative of ``sigma_1(G(t))`` from a full SVD of ``G``.

    ``U`` and ``V`` must be square (all left and right singular vectors);
    ``dG`` and ``d2G`` are the first and second derivatives of ``G``.  The
    largest singular value is assumed simple and positive.
    """
    p, m = dG.shape
    u1 = U[:, 0]
    v1 = V[:, 0]
    row = (u1.conj() @ dG) @ V
    col = U.conj().T @ (dG @ v1)
    p2 = u1.conj() @ d2G @ v1
    return _second_from_projections(np.asarray(s), row, col, p2, p, m)


class TransferEvaluator:
    """Computes ``||G(lam)||_2`` and derivatives for one system.

    Parameters
    ----------
    system : StateSpaceSystem
    mode : {'auto', 'lu', 'hessenberg'}
        Resolvent strategy.  ``'auto'`` picks the precomputed reduction when
        more than 8 evaluations are expected.
    path : {'auto', 'sigma-min', 'full'}
        ``'sigma-min'`` uses ``||G|| = 1/sigma_min(lam E - A)``, valid only when
        ``B = C = I`` and ``D = 0``; ``'auto'`` uses it exactly then.
    counters : Counters, optional
        ``svd_evals`` is incremented once per evaluation call.
    simplicity : float
        Relative gap below which ``sigma_1`` is treated as repeated.
    want_second : bool or None
        Default for second derivatives; ``None`` means on when ``m*p <= 4096``.
    """

    def __init__(self, system, mode: str = "auto", path: str = "auto",
                 backend: DenseBackend | None = None, counters: Counters | None = None,
                 simplicity: float = 1e-8, want_second: bool | None = None,
                 expected_evals: int | None = None):
        if path not in ("auto", "sigma-min", "full"):
            raise ValueError(f"unknown evaluation path {path!r}")
        if path == "sigma-min" and not system.has_identity_io:
            raise ValueError("the sigma-min path needs B = C = I and D = 0")
        if mode == "auto":
            mode = "hessenberg" if expected_evals is None or expected_evals > 8 else "lu"
        self.system = system
        self.path = "sigma-min" if path == "auto" and system.has_identity_io else (
            "full" if path == "auto" else path)
        self.backend = backend or DEFAULT_BACKEND
        self.counters = counters if counters is not None else Counters()
        self.simplicity = simplicity
        if want_second is None:
            want_second = system.m * system.p <= SECOND_DERIVATIVE_LIMIT
        self.want_second = want_second
        self.resolvent = Resolvent(system.A, system.E, system.B, system.C, mode=mode)
        self.mode = mode
        self._D = system.D

    @property
    def svd_counter(self) -> int:
        return self.counters.svd_evals

    # -- plain norm -------------------------------------------------------

    def norm_at(self, lam) -> SingularTriplet:
        """Largest singular triplet of ``G(lam)``; ``sigma = inf`` at a pole."""
        self.counters.add("svd_evals")
        lam = complex(lam)
        res = self.resolvent
        try:
            if self.path == "sigma-min":
                s, U, V = self.backend.svd(res.shifted(lam))
                if s[-1] == 0:
                    raise PoleProximity("shifted matrix is exactly singular")
                sg = 1.0 / s[::-1]
                u = res.C_r @ V[:, -1]
                v = res.B_r.conj().T @ U[:, -1]
                return SingularTriplet(float(sg[0]), u, v, sg)
            solver = res.factor(lam)
            G = res.C_r @ solver.solve(res.B_r) + self._D
        except PoleProximity:
            return SingularTriplet(np.inf, None, None, None, True)
        s, U, V = self.backend.svd(G, full_matrices=False)
        return SingularTriplet(float(s[0]), U[:, 0], V[:, 0], s)

    def norm(self, lam) -> float:
        return self.norm_at(lam).sigma

    def transfer(self, lam) -> np.ndarray:
        """``G(lam)`` itself (not counted as an SVD evaluation)."""
        res = self.resolvent
        return res.C_r @ res.factor(complex(lam)).solve(res.B_r) + self._D

    # -- derivatives ------------------------------------------------------

    def derivatives_at(self, lam, dlam, want_second: bool | None = None,
                       parameterization: str = "custom") -> DerivativeBundle:
        """``sigma_1`` and its derivatives along a path with ``lam'' = 0``."""
        self.counters.add("svd_evals")
        if want_second is None:
            want_second = self.want_second
        lam = complex(lam)
        dlam = complex(dlam)
        try:
            if self.path == "sigma-min":
                return self._derivatives_sigma_min(lam, dlam, want_second, parameterization)
            return self._derivatives_full(lam, dlam, want_second, parameterization)
        except PoleProximity:
            return _pole_bundle(parameterization)

    def derivatives_horizontal(self, x, y, want_second: bool | None = None) -> DerivativeBundle:
        """Derivatives with respect to ``x`` of ``sigma_1(G(x + iy))``."""
        return self.derivatives_at(complex(x, y), 1.0, want_second, "horizontal")

    def derivatives_radial(self, r, theta, want_second: bool | None = None) -> DerivativeBundle:
        """Derivatives with respect to ``r`` of ``sigma_1(G(r e^{i theta}))``."""
        w = cmath.exp(1j * theta)
        return self.derivatives_at(r * w, w, want_second, "radial")

    def objective(self, kind: str, psi: float, gamma: float,
                  want_second: bool | None = None):
        """Callable ``t -> Sample`` for ``sigma_1 - gamma`` along a line or ray.

        ``kind='horizontal'`` follows ``t + i psi``; ``kind='radial'`` follows
        ``t e^{i psi}``.
        """
        if kind == "horizontal":
            def fun(t):
                b = self.derivatives_horizontal(t, psi, want_second)
                return Sample(b.value - gamma, b.first, b.second)
        elif kind == "radial":
            def fun(t):
                b = self.derivatives_radial(t, psi, want_second)
                return Sample(b.value - gamma, b.first, b.second)
        else:
            raise ValueError(f"unknown search direction {kind!r}")
        return fun

    def _bundle(self, s, row, col, p2, p, m, want_second, parameterization, triplet):
        gap = _dilation_gap(s, p, m)
        degenerate = not s[0] > 0 or gap <= self.simplicity * max(s[0], 1.0)
        first = float(row[0].real)
        second = None
        if want_second and not degenerate:
            second = _second_from_projections(s, row, col, p2, p, m)
        return DerivativeBundle(float(s[0]), first, second, parameterization,
                                float(gap), degenerate, False, triplet)

    def _derivatives_full(self, lam, dlam, want_second, parameterization):
        res = self.resolvent
        solver = res.factor(lam)
        X1 = solver.solve(res.B_r)
        G = res.C_r @ X1 + self._D
        p, m = G.shape
        s, U, V = self.backend.svd(G, full_matrices=True)
        X2 = solver.solve(res.times_e(X1))
        dG = -dlam * (res.C_r @ X2)
        u1 = U[:, 0]
        v1 = V[:, 0]
        row = (u1.conj() @ dG) @ V
        col = U.conj().T @ (dG @ v1)
        p2 = 0.0
        if want_second:
            X3 = solver.solve(res.times_e(X2))
            p2 = 2 * dlam ** 2 * (u1.conj() @ (res.C_r @ (X3 @ v1)))
        triplet = SingularTriplet(float(s[0]), u1, v1, s)
        return self._bundle(s, row, col, p2, p, m, want_second, parameterization, triplet)

    def _derivatives_sigma_min(self, lam, dlam, want_second, parameterization):
        res = self.resolvent
        sw, Uw, Vw = self.backend.svd(res.shifted(lam))
        if sw[-1] == 0:
            raise PoleProximity("shifted matrix is exactly singular")
        n = len(sw)
        s = 1.0 / sw[::-1]
        Ur = Uw[:, ::-1]
        Vr = Vw[:, ::-1]
        # In the singular bases of G, dG = -dlam S K S and G'' = 2 dlam^2 S K S K S
        # with S = diag(s) and K = U^H E V taken from the SVD of lam E - A.
        K_row = Ur[:, 0].conj() @ res.times_e(Vr)
        K_col = Ur.conj().T @ res.times_e(Vr[:, 0])
        row = -dlam * s[0] * K_row * s
        col = -dlam * s[0] * K_col * s
        p2 = 0.0
        if want_second:
            p2 = 2 * dlam ** 2 * s[0] ** 2 * np.sum(K_row * s * K_col)
        triplet = SingularTriplet(float(s[0]), res.C_r @ Vr[:, 0],
                                  res.B_r.conj().T @ Ur[:, 0], s)
        return self._bundle(s, row, col, p2, n, n, want_second, parameterization, triplet)

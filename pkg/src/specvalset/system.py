"""Descriptor systems, problem validation and initial-point selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInclusion,
    EpsilonTooLarge,
    InvalidEpsilon,
    NumericalFailure,
    SingularE,
)
from .linalg import DEFAULT_BACKEND, DenseBackend, is_identity
from .options import SolverOptions

INCLUSIONS = ("all", "ctrb-obsv")
MODES = ("abscissa", "radius")


def _shape(M):
    return "x".join(str(k) for k in M.shape)


@dataclass(frozen=True, eq=False)
class StateSpaceSystem:
    """The matrices ``(A, B, C, D, E)`` of ``G(lam) = C (lam E - A)^{-1} B + D``.

    Arrays are stored as read-only complex copies.  Use :meth:`from_matrices`
    to get the usual defaults for missing matrices.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    name: str = ""

    def __post_init__(self):
        for key in "ABCDE":
            arr = np.array(getattr(self, key), dtype=complex)
            if arr.ndim != 2:
                raise DimensionMismatch(f"{key} must be a matrix, got {arr.ndim} dimensions")
            arr.setflags(write=False)
            object.__setattr__(self, key, arr)
        A, B, C, D, E = self.A, self.B, self.C, self.D, self.E
        n = A.shape[0]
        if A.shape != (n, n) or n == 0:
            raise DimensionMismatch(f"A must be square and non-empty, got {_shape(A)}")
        if E.shape != (n, n):
            raise DimensionMismatch(f"E is {_shape(E)} but A is {_shape(A)}")
        if B.shape[0] != n or B.shape[1] == 0:
            raise DimensionMismatch(f"B is {_shape(B)} but A is {_shape(A)}")
        if C.shape[1] != n or C.shape[0] == 0:
            raise DimensionMismatch(f"C is {_shape(C)} but A is {_shape(A)}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise DimensionMismatch(
                f"D is {_shape(D)} but C is {_shape(C)} and B is {_shape(B)}")

    @classmethod
    def from_matrices(cls, A, B=None, C=None, D=None, E=None, name: str = ""):
        """Build a system; ``B``, ``C`` and ``E`` default to the identity and ``D`` to zero."""
        A = np.atleast_2d(np.asarray(A))
        n = A.shape[0]
        B = np.eye(n) if B is None else np.atleast_2d(np.asarray(B))
        C = np.eye(n) if C is None else np.atleast_2d(np.asarray(C))
        E = np.eye(n) if E is None else np.atleast_2d(np.asarray(E))
        if D is None:
            D = np.zeros((C.shape[0], B.shape[1]))
        return cls(A, B, C, np.atleast_2d(np.asarray(D)), E, name)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @cached_property
    def is_real_valued(self) -> bool:
        return all(not np.any(M.imag) for M in (self.A, self.B, self.C, self.D, self.E))

    @cached_property
    def has_identity_io(self) -> bool:
        """True when ``B = C = I`` and ``D = 0``, i.e. the set is a pseudospectrum."""
        return is_identity(self.B) and is_identity(self.C) and not np.any(self.D)

    @cached_property
    def norm_d(self) -> float:
        return float(np.linalg.norm(self.D, 2)) if self.D.size else 0.0

    def rotated(self, phase: complex) -> "StateSpaceSystem":
        """System with ``A`` and ``B`` multiplied by ``phase``.

        Its transfer function at ``mu`` equals the original one at ``mu/phase``
        whenever ``|phase| = 1``.
        """
        return StateSpaceSystem(phase * self.A, phase * self.B, self.C, self.D,
                                self.E, self.name)

    def transfer_matrix(self, lam) -> np.ndarray:
        """Direct evaluation of ``G(lam)`` by a dense solve."""
        X = np.linalg.solve(lam * self.E - self.A, self.B)
        return self.C @ X + self.D


@dataclass(frozen=True, eq=False)
class SvsProblem:
    system: StateSpaceSystem
    epsilon: float
    inclusion: str = "all"
    mode: str = "abscissa"
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.inclusion not in INCLUSIONS:
            raise ValueError(f"inclusion must be one of {INCLUSIONS}, got {self.inclusion!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def gamma(self) -> float:
        """The level ``1/epsilon`` that ``||G||`` is compared against."""
        return 1.0 / self.epsilon

    @property
    def backend(self) -> DenseBackend:
        return self.options.backend

    @property
    def tol(self):
        return self.options.tolerances

    def replace(self, **changes) -> "SvsProblem":
        data = dict(system=self.system, epsilon=self.epsilon, inclusion=self.inclusion,
                    mode=self.mode, options=self.options)
        data.update(changes)
        return SvsProblem(**data)


def validate(problem: SvsProblem) -> SvsProblem:
    """Check a problem before solving; raises a :class:`~.errors.SvsError` subclass."""
    sys_ = problem.system
    eps = problem.epsilon
    if not isinstance(eps, (int, float, np.floating, np.integer)) or not math.isfinite(eps) \
            or eps <= 0:
        raise InvalidEpsilon(f"epsilon must be a positive finite number, got {eps!r}")
    for key in "ABCDE":
        if not np.all(np.isfinite(getattr(sys_, key))):
            raise NumericalFailure(f"{key} has non-finite entries")
    if eps * sys_.norm_d >= 1.0:
        raise EpsilonTooLarge(
            f"epsilon * ||D||_2 = {eps * sys_.norm_d:.6g} must be below 1")
    if problem.options.require_invertible_e and not is_identity(sys_.E):
        s = np.linalg.svd(sys_.E, compute_uv=False)
        rcond = s[-1] / s[0] if s[0] > 0 else 0.0
        if rcond < problem.tol.singular_e:
            raise SingularE(f"E is numerically singular (rcond = {rcond:.3g})")
    return problem


@dataclass(frozen=True)
class ClassifiedEigenvalue:
    value: complex
    infinite: bool
    controllable: bool
    observable: bool

    def included(self, inclusion: str) -> bool:
        if inclusion == "all":
            return True
        return self.controllable and self.observable


def classify_spectrum(system: StateSpaceSystem, tol: float = 1e-10,
                      backend: DenseBackend | None = None) -> list[ClassifiedEigenvalue]:
    """Eigenvalues of ``(A, E)`` with controllability and observability flags.

    An eigenvalue with unit right eigenvector ``x`` is unobservable when
    ``||C x|| <= tol * ||C||``; with unit left eigenvector ``y`` it is
    uncontrollable when ``||B^H y|| <= tol * ||B||``.
    """
    backend = backend or DEFAULT_BACKEND
    eigs, left, right = backend.eig_pencil_vectors(system.A, system.E)
    if np.any(eigs.indeterminate):
        raise NumericalFailure("the pencil (A, E) appears to be singular")
    norm_b = np.linalg.norm(system.B, 2)
    norm_c = np.linalg.norm(system.C, 2)
    obs = np.linalg.norm(system.C @ right, axis=0) > tol * norm_c
    ctrb = np.linalg.norm(system.B.conj().T @ left, axis=0) > tol * norm_b
    return [ClassifiedEigenvalue(complex(v), bool(inf), bool(c), bool(o))
            for v, inf, c, o in zip(eigs.values, eigs.infinite, ctrb, obs)]


def initial_point(problem: SvsProblem, spectrum: list[ClassifiedEigenvalue] | None = None):
    """Rightmost (abscissa) or outermost (radius) eigenvalue that passes the filter.

    Returns ``math.inf`` when an included eigenvalue is infinite.  Ties go to
    the first eigenvalue in the order returned by the eigensolver.
    """
    if spectrum is None:
        spectrum = classify_spectrum(problem.system, problem.tol.observability,
                                     problem.backend)
    kept = [ev for ev in spectrum if ev.included(problem.inclusion)]
    if not kept:
        raise EmptyInclusion(
            f"no eigenvalue survives the {problem.inclusion!r} filter")
    if any(ev.infinite for ev in kept):
        return math.inf
    values = np.array([ev.value for ev in kept])
    score = values.real if problem.mode == "abscissa" else np.abs(values)
    return complex(values[int(np.argmax(score))])

"""Matrix pencils whose eigenvalues locate boundary points of the set.

For a level ``gamma = 1/epsilon`` the boundary points on a vertical line, on
an arbitrary straight line, or on a circle centred at the origin are read off
from the imaginary (respectively unimodular) eigenvalues of a ``2n x 2n``
pencil.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .counters import Counters

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class BoundaryPointSet:
    """Sorted, deduplicated ordinates of boundary points on one curve.

    ``geometry`` is ``'vertical'`` (ordinates are ``y`` on ``Re lam = level``),
    ``'line'`` (signed positions ``omega`` along the line through
    ``i*level*e^{i theta}`` with direction ``e^{i theta}``) or ``'circle'``
    (angles in ``[0, 2 pi)`` on ``|lam| = level``).
    """

    geometry: str
    level: float
    ordinates: np.ndarray
    theta: float = math.pi / 2
    suspected_singular: bool = False

    def points(self) -> np.ndarray:
        w = np.asarray(self.ordinates, dtype=float)
        if self.geometry == "vertical":
            return self.level + 1j * w
        if self.geometry == "circle":
            return self.level * np.exp(1j * w)
        return cmath.exp(1j * self.theta) * (w + 1j * self.level)

    def __len__(self):
        return len(self.ordinates)


def _hermitian_solve(D, gamma, rhs, left):
    """Apply ``(D^H D - gamma^2 I)^{-1}`` (left) or ``(D D^H - gamma^2 I)^{-1}``."""
    if not np.any(D):
        return rhs / -(gamma ** 2)
    R = D.conj().T @ D if left else D @ D.conj().T
    R = R - gamma ** 2 * np.eye(R.shape[0])
    return np.linalg.solve(R, rhs)


def _coupling_blocks(system, gamma):
    A, B, C, D = system.A, system.B, system.C, system.D
    Rinv_DhC = _hermitian_solve(D, gamma, D.conj().T @ C, left=True)
    Rinv_Bh = _hermitian_solve(D, gamma, B.conj().T, left=True)
    Sinv_C = _hermitian_solve(D, gamma, C, left=False)
    F = A - B @ Rinv_DhC
    top_right = -gamma * (B @ Rinv_Bh)
    bottom_left = gamma * (C.conj().T @ Sinv_C)
    return F, top_right, bottom_left


def vertical_pencil(system, gamma: float, x: float):
    """Pencil ``(M, N)`` whose eigenvalue ``iy`` means ``gamma`` is a singular value of ``G(x + iy)``."""
    F, top_right, bottom_left = _coupling_blocks(system, gamma)
    F = F - x * system.E
    M = np.block([[F, top_right], [bottom_left, -F.conj().T]])
    n = system.n
    N = np.zeros((2 * n, 2 * n), dtype=complex)
    N[:n, :n] = system.E
    N[n:, n:] = system.E.conj().T
    return M, N


def circle_pencil(system, gamma: float, r: float):
    """Pencil ``(S, T)`` whose eigenvalue ``e^{i theta}`` means ``gamma`` is a singular value of ``G(r e^{i theta})``."""
    F, top_right, bottom_left = _coupling_blocks(system, gamma)
    n = system.n
    E = system.E
    zero = np.zeros((n, n), dtype=complex)
    S = np.block([[F, top_right], [zero, r * E.conj().T]])
    T = np.block([[r * E, zero], [-bottom_left, F.conj().T]])
    return S, T


def dedup_sorted(values, tol: float) -> np.ndarray:
    """Sort and merge runs of values closer than ``tol`` into their mean."""
    values = np.sort(np.asarray(values, dtype=float))
    if len(values) < 2:
        return values
    groups = [[values[0]]]
    for v in values[1:]:
        if v - groups[-1][-1] <= tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return np.array([sum(g) / len(g) for g in groups])


def _imaginary_ordinates(eigs, tol_eig, tol_dedup):
    vals = eigs.finite_values
    keep = np.abs(vals.real) <= tol_eig * np.maximum(1.0, np.abs(vals))
    ys = vals[keep].imag
    scale = max(1.0, float(np.max(np.abs(ys)))) if len(ys) else 1.0
    return dedup_sorted(ys, tol_dedup * scale)


def interior_filter(points: BoundaryPointSet, ev, gamma: float,
                    tol: float = 1e-6) -> BoundaryPointSet:
    """Drop ordinates where ``||G|| > gamma (1 + tol)``.

    The pencils report every point where *some* singular value of ``G``
    equals ``gamma``.  Where a smaller singular value crosses the level while
    the largest one exceeds it the point is interior, not a boundary point.
    """
    if ev is None or not len(points):
        return points
    limit = gamma * (1.0 + tol)
    keep = np.array([ev.norm(z) <= limit for z in points.points()], dtype=bool)
    return replace(points, ordinates=points.ordinates[keep])


def _count(counters, name):
    if counters is not None:
        counters.add("eig_solves")
        counters.add(name)


def vertical_boundary_points(problem, x: float, counters: Counters | None = None,
                             ev=None) -> BoundaryPointSet:
    """Boundary ordinates ``y`` with ``||G(x + iy)|| = 1/epsilon``.

    Given a transfer evaluator ``ev``, crossings of smaller singular values
    inside the set are removed (see :func:`interior_filter`).
    """
    M, N = vertical_pencil(problem.system, problem.gamma, x)
    eigs = problem.backend.eig_pencil(M, N)
    _count(counters, "level_searches")
    tol = problem.tol
    ys = _imaginary_ordinates(eigs, tol.eig, tol.dedup)
    out = BoundaryPointSet("vertical", float(x), ys, math.pi / 2,
                           bool(np.any(eigs.indeterminate)))
    return interior_filter(out, ev, problem.gamma, tol.boundary)


def line_boundary_points(problem, theta: float, s: float,
                         counters: Counters | None = None, ev=None) -> BoundaryPointSet:
    """Boundary positions along the line ``{e^{i theta}(omega + i s)}``.

    The system is rotated so that the line becomes vertical, at ``x = -s``.
    ``theta = 0`` with ``s = y`` is the horizontal line at height ``y``;
    ``theta = pi/2`` is the vertical line ``Re lam = -s``.
    """
    phase = cmath.exp(1j * (math.pi / 2 - theta))
    rotated = problem.system.rotated(phase)
    M, N = vertical_pencil(rotated, problem.gamma, -s)
    eigs = problem.backend.eig_pencil(M, N)
    _count(counters, "line_searches")
    tol = problem.tol
    ws = _imaginary_ordinates(eigs, tol.eig, tol.dedup)
    out = BoundaryPointSet("line", float(s), ws, float(theta),
                           bool(np.any(eigs.indeterminate)))
    return interior_filter(out, ev, problem.gamma, tol.boundary)


def circle_boundary_points(problem, r: float, counters: Counters | None = None,
                           ev=None) -> BoundaryPointSet:
    """Boundary angles ``theta`` with ``||G(r e^{i theta})|| = 1/epsilon``."""
    S, T = circle_pencil(problem.system, problem.gamma, r)
    eigs = problem.backend.eig_pencil(S, T)
    _count(counters, "level_searches")
    tol = problem.tol
    vals = eigs.finite_values
    keep = np.abs(np.abs(vals) - 1.0) <= tol.eig
    angles = np.mod(np.angle(vals[keep]), TWO_PI)
    angles[angles >= TWO_PI] = 0.0
    angles = dedup_sorted(angles, tol.dedup)
    if len(angles) >= 2 and angles[0] + TWO_PI - angles[-1] <= tol.dedup:
        angles = angles[:-1]
    singular = bool(np.any(eigs.indeterminate)) or np.count_nonzero(keep) > 2 * problem.system.n
    out = BoundaryPointSet("circle", float(r), angles, 0.0, singular)
    return interior_filter(out, ev, problem.gamma, tol.boundary)

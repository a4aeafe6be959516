"""Solver settings and tolerance bundle."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .linalg import DenseBackend


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds, all relative unless noted.

    eig : an eigenvalue counts as imaginary (or unimodular) when its distance
        to the axis (or unit circle) is at most ``eig * max(1, |lam|)``.
    root : root searches stop once ``|sigma - 1/eps| <= root / eps``.
    simple : the largest singular value is treated as repeated when the gap to
        the next eigenvalue of the Hermitian dilation is below
        ``simple * max(sigma_1, 1)``.
    dedup : boundary ordinates closer than ``dedup * scale`` are merged.
    split : relative half-width of the window around a section midpoint that
        triggers the split safeguard of the line-search variant.
    membership : midpoint membership threshold is ``(1/eps) * (1 - membership)``.
    observability : ``||C x|| <= observability * ||C||`` marks an eigenvalue
        unobservable; the same factor is used for controllability.
    singular_e : ``E`` is rejected when its reciprocal condition number is
        below this value.
    boundary : a pencil crossing counts as interior, and is dropped, when
        ``||G|| > (1/eps) * (1 + boundary)`` there.
    """

    eig: float = 1e-8
    root: float = 1e-12
    simple: float = 1e-8
    dedup: float = 1e-10
    split: float = 1e-2
    membership: float = 1e-12
    observability: float = 1e-10
    singular_e: float = 1e3 * 2.220446049250313e-16
    boundary: float = 1e-6

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SolverOptions:
    """Knobs shared by every solver.

    method : ``'improved'`` uses root searches between level searches,
        ``'direct'`` uses eigenvalue based line searches instead.
    horizontal_first : for ``method='direct'`` in abscissa mode, start with a
        horizontal search through the initial eigenvalue instead of a vertical
        search just to its right.
    random_angles : number of random ray directions added to the first radial
        search and used when a circular search yields no arcs (escape rounds
        always use at least one).
    seed : seed for every random choice, so runs are reproducible.
    evaluation : ``'auto'``, ``'lu'`` or ``'hessenberg'`` resolvent mode.
    path : ``'auto'``, ``'sigma-min'`` or ``'full'``; ``'sigma-min'`` evaluates
        ``1/sigma_min(lam E - A)`` and needs ``B = C = I`` and ``D = 0``.
    want_second : whether root searches use second derivatives (Halley);
        ``None`` enables them when ``m * p <= 64 * 64``.
    real_warm_start : for real systems, first search along the real axis.
    prune_conjugates : for real systems, drop cross sections lying entirely in
        the open lower half-plane.
    max_iterations : cap on level searches per solve.
    escape_cap : cap on consecutive random-direction rounds that make progress
        without producing arcs.
    require_invertible_e : reject numerically singular ``E`` up front.
    """

    method: str = "improved"
    horizontal_first: bool = False
    random_angles: int = 3
    seed: int = 100
    evaluation: str = "auto"
    path: str = "auto"
    svd_driver: str = "gesdd"
    want_second: bool | None = None
    real_warm_start: bool = True
    prune_conjugates: bool = True
    stagnation_check: bool = True
    max_iterations: int = 100
    max_root_iterations: int = 100
    escape_cap: int = 10
    require_invertible_e: bool = True
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.method not in ("improved", "direct"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.evaluation not in ("auto", "lu", "hessenberg"):
            raise ValueError(f"unknown evaluation mode {self.evaluation!r}")
        if self.path not in ("auto", "sigma-min", "full"):
            raise ValueError(f"unknown evaluation path {self.path!r}")
        if self.random_angles < 0:
            raise ValueError("random_angles must be non-negative")

    @property
    def backend(self) -> DenseBackend:
        return DenseBackend(self.svd_driver)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["tolerances"] = self.tolerances.as_dict()
        return out

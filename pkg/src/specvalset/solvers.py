"""Abscissa and radius solvers.

Two variants are provided.  The improved one alternates a global level search
(a vertical line for the abscissa, a circle for the radius) with a batch of
root searches launched from the midpoints of the resulting cross sections.
The line-search variant replaces those root searches by one eigenvalue-based
search per cross section, which is simpler but costs an extra ``2n x 2n``
eigensolve per section.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .counters import Counters
from .pencils import (
    TWO_PI,
    circle_boundary_points,
    line_boundary_points,
    vertical_boundary_points,
)
from .roots import fast_search
from .sections import (
    assemble_circular,
    assemble_vertical,
    launchable,
    prune_conjugates,
    split_safeguard,
)
from .system import SvsProblem, classify_spectrum, initial_point, validate
from .transfer import TransferEvaluator

#: Relative residual above which a line-search result is flagged.
ROUNDING_FLAG_TOL = 1e-10


def _enc(x):
    if isinstance(x, complex):
        return [_enc(x.real), _enc(x.imag)]
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def _dec(x):
    if isinstance(x, list):
        return complex(_dec(x[0]), _dec(x[1]))
    if x is None:
        return None
    return float(x)


@dataclass
class SolveReport:
    """Result of a solve.

    ``eta`` is the computed abscissa or radius and ``point`` the boundary
    point attaining it.  ``iterates`` lists the successive values of ``eta``
    (strictly increasing).  ``events`` is a trace of every level search and
    batch of root searches, and ``termination`` names the reason the solver
    stopped.
    """

    eta: float
    converged: bool
    mode: str
    method: str
    epsilon: float
    lambda0: complex | float
    point: complex | None
    iterates: list
    counters: Counters
    escape_events: int = 0
    diagnostics: list = field(default_factory=list)
    events: list = field(default_factory=list)
    termination: str = ""
    settings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "eta": _enc(self.eta),
            "converged": self.converged,
            "mode": self.mode,
            "method": self.method,
            "epsilon": _enc(self.epsilon),
            "lambda0": _enc(self.lambda0) if isinstance(self.lambda0, complex)
            else {"real": _enc(self.lambda0)},
            "point": None if self.point is None else _enc(complex(self.point)),
            "iterates": [_enc(v) for v in self.iterates],
            "counters": self.counters.as_dict(),
            "escape_events": self.escape_events,
            "diagnostics": list(self.diagnostics),
            "events": [dict(e, eta=_enc(e["eta"])) for e in self.events],
            "termination": self.termination,
            "settings": self.settings,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolveReport":
        lam0 = data["lambda0"]
        lam0 = _dec(lam0["real"]) if isinstance(lam0, dict) else _dec(lam0)
        return cls(
            eta=_dec(data["eta"]),
            converged=bool(data["converged"]),
            mode=data["mode"],
            method=data["method"],
            epsilon=_dec(data["epsilon"]),
            lambda0=lam0,
            point=_dec(data["point"]),
            iterates=[_dec(v) for v in data["iterates"]],
            counters=Counters.from_dict(data["counters"]),
            escape_events=int(data["escape_events"]),
            diagnostics=list(data["diagnostics"]),
            events=[dict(e, eta=_dec(e["eta"])) for e in data["events"]],
            termination=data["termination"],
            settings=data["settings"],
        )


class _Run:
    """Shared state of one solve."""

    def __init__(self, problem: SvsProblem, method: str):
        validate(problem)
        self.problem = problem
        self.opts = problem.options
        self.tol = problem.tol
        self.counters = Counters()
        self.ev = TransferEvaluator(
            problem.system, mode=self.opts.evaluation, path=self.opts.path,
            backend=problem.backend, counters=self.counters,
            simplicity=self.tol.simple, want_second=self.opts.want_second)
        spectrum = classify_spectrum(problem.system, self.tol.observability,
                                     problem.backend)
        self.lam0 = initial_point(problem, spectrum)
        self.real = problem.system.is_real_valued and self.opts.prune_conjugates
        self.rng = np.random.default_rng(self.opts.seed)
        self.method = method
        self.iterates = []
        self.events = []
        self.diagnostics = []
        self.escape_events = 0
        self.eta = math.nan
        self.point = None
        self.settings = {"options": self.opts.as_dict()}

    def event(self, kind, eta, progress, **extra):
        self.events.append(dict(kind=kind, eta=float(eta), progress=bool(progress), **extra))

    def advance(self, eta, point):
        self.eta = float(eta)
        self.point = None if point is None else complex(point)
        self.iterates.append(self.eta)

    def search(self, candidates, kind, label):
        """Run a batch of root searches; returns True on progress."""
        fs = fast_search(self.eta, candidates, kind, self.ev, self.problem.epsilon,
                         root_tol=self.tol.root, maxiter=self.opts.max_root_iterations)
        self.counters.add("root_searches_solved", fs.solved)
        self.counters.add("root_searches_requested", fs.requested)
        self.diagnostics.extend(fs.diagnostics)
        progressed = fs.eta > self.eta
        self.event(label, fs.eta, progressed, solved=fs.solved, requested=fs.requested)
        if progressed:
            self.advance(fs.eta, fs.point)
        return progressed

    def report(self, converged, termination):
        if self.point is not None and math.isfinite(self.eta) and self.method == "direct":
            sigma = self.ev.norm(self.point)
            gamma = self.problem.gamma
            if not abs(sigma - gamma) <= ROUNDING_FLAG_TOL * gamma:
                self.diagnostics.append(
                    f"suspected-rounding: ||G|| at the final point is {sigma!r}, "
                    f"level is {gamma!r}")
        return SolveReport(
            eta=self.eta, converged=converged, mode=self.problem.mode,
            method=self.method, epsilon=float(self.problem.epsilon),
            lambda0=self.lam0, point=self.point, iterates=list(self.iterates),
            counters=self.counters, escape_events=self.escape_events,
            diagnostics=self.diagnostics, events=self.events,
            termination=termination, settings=self.settings)

    def infinite(self):
        self.eta = math.inf
        self.iterates = [math.inf]
        self.diagnostics.append("an included eigenvalue of (A, E) is infinite")
        return self.report(True, "infinite-eigenvalue")

    def random_angles(self, at_least=0):
        count = max(self.opts.random_angles, at_least)
        return list(self.rng.uniform(0.0, TWO_PI, count))


def _check_mode(problem, mode):
    if problem.mode != mode:
        problem = problem.replace(mode=mode)
    return problem


def svs_abscissa(problem: SvsProblem) -> SolveReport:
    """Largest real part over the set, by vertical level searches and root searches."""
    problem = _check_mode(problem, "abscissa")
    run = _Run(problem, "improved")
    if not isinstance(run.lam0, complex):
        return run.infinite()
    lam0 = run.lam0
    eps = problem.epsilon
    run.advance(lam0.real, lam0)
    if run.real and run.opts.real_warm_start and lam0.imag != 0:
        run.search([0.0], "horizontal", "warm-start")
    run.search([lam0.imag], "horizontal", "initial")

    for _ in range(run.opts.max_iterations):
        pts = vertical_boundary_points(problem, run.eta, run.counters, run.ev)
        if pts.suspected_singular:
            run.diagnostics.append(f"suspected singular pencil at x={run.eta!r}")
        secs = assemble_vertical(pts, run.ev, eps, run.tol.membership)
        secs = launchable(prune_conjugates(secs, run.real))
        run.event("level", run.eta, False, sections=len(secs))
        if not secs:
            return run.report(True, "no-cross-sections")
        if run.search([s.midpoint for s in secs], "horizontal", "search"):
            continue
        if run.opts.stagnation_check:
            jitter = [s.midpoint + run.rng.uniform(-0.1, 0.1) * s.length for s in secs]
            if run.search(jitter, "horizontal", "jitter"):
                continue
        return run.report(True, "no-progress")
    run.diagnostics.append("iteration cap reached")
    return run.report(False, "iteration-cap")


def svs_radius(problem: SvsProblem) -> SolveReport:
    """Largest modulus over the set, by circular level searches and radial root searches."""
    problem = _check_mode(problem, "radius")
    run = _Run(problem, "improved")
    if not isinstance(run.lam0, complex):
        return run.infinite()
    lam0 = run.lam0
    eps = problem.epsilon
    run.advance(abs(lam0), lam0)
    if run.real and run.opts.real_warm_start and lam0.imag != 0:
        run.search([0.0, math.pi], "radial", "warm-start")
    run.search([cmath.phase(lam0) % TWO_PI] + run.random_angles(), "radial", "initial")

    streak = 0
    for _ in range(run.opts.max_iterations):
        pts = circle_boundary_points(problem, run.eta, run.counters, run.ev)
        if pts.suspected_singular:
            run.diagnostics.append(f"suspected singular pencil at r={run.eta!r}")
        secs = assemble_circular(pts, run.ev, eps, run.tol.membership)
        secs = launchable(prune_conjugates(secs, run.real))
        run.event("level", run.eta, False, sections=len(secs))
        if secs:
            if run.search([s.midpoint for s in secs], "radial", "search"):
                streak = 0
                continue
        run.escape_events += 1
        # An escape round without directions could never leave a tangent circle.
        if run.search(run.random_angles(1), "radial", "escape"):
            if not secs:
                streak += 1
                if streak > run.opts.escape_cap:
                    run.diagnostics.append("escape-cap: too many rounds without arcs")
                    return run.report(True, "escape-cap")
            continue
        return run.report(True, "no-progress")
    run.diagnostics.append("iteration cap reached")
    return run.report(False, "iteration-cap")


def _farthest_positive(pts):
    """Largest ordinate of a line search, or ``-inf`` when there is none."""
    return float(pts.ordinates[-1]) if len(pts.ordinates) else -math.inf


def _line_searches(run, secs, theta_of, s_of):
    best, best_psi = -math.inf, None
    for sec in secs:
        psi = sec.midpoint
        lp = line_boundary_points(run.problem, theta_of(psi), s_of(psi), run.counters)
        run.counters.add("root_searches_requested")
        reach = _farthest_positive(lp)
        if math.isfinite(reach):
            run.counters.add("root_searches_solved")
        if reach > best:
            best, best_psi = reach, psi
    return best, best_psi


def _direct_abscissa(problem):
    run = _Run(problem, "direct")
    if not isinstance(run.lam0, complex):
        return run.infinite()
    lam0 = run.lam0
    eps = problem.epsilon
    run.advance(lam0.real, lam0)
    last_best = None
    if run.opts.horizontal_first:
        lp = line_boundary_points(problem, 0.0, lam0.imag, run.counters)
        reach = _farthest_positive(lp)
        run.event("line", reach, reach > run.eta)
        if reach > run.eta:
            run.advance(reach, complex(reach, lam0.imag))
            last_best = lam0.imag
        x_level = run.eta
    else:
        pert = max(1e-8, 1e-8 * abs(lam0))
        run.settings["perturbation"] = pert
        x_level = lam0.real + pert

    for _ in range(run.opts.max_iterations):
        pts = vertical_boundary_points(problem, x_level, run.counters, run.ev)
        secs = assemble_vertical(pts, run.ev, eps, run.tol.membership)
        secs = prune_conjugates(secs, run.real)
        secs = launchable(split_safeguard(secs, last_best, run.tol.split))
        run.event("level", x_level, False, sections=len(secs))
        if not secs:
            return run.report(True, "no-cross-sections")
        best, psi = _line_searches(run, secs, lambda psi: 0.0, lambda psi: psi)
        progressed = best > run.eta
        run.event("search", best, progressed)
        if not progressed:
            return run.report(True, "no-progress")
        run.advance(best, complex(best, psi))
        x_level = best
        last_best = psi
    run.diagnostics.append("iteration cap reached")
    return run.report(False, "iteration-cap")


def _direct_radius(problem):
    run = _Run(problem, "direct")
    if not isinstance(run.lam0, complex):
        return run.infinite()
    lam0 = run.lam0
    eps = problem.epsilon
    run.advance(abs(lam0), lam0)
    theta0 = cmath.phase(lam0) % TWO_PI
    lp = line_boundary_points(problem, theta0, 0.0, run.counters)
    reach = _farthest_positive(lp)
    run.event("line", reach, reach > run.eta)
    if reach > run.eta:
        run.advance(reach, reach * cmath.exp(1j * theta0))

    # Push the first circle just outside the set so it is not tangent to it.
    b = run.ev.derivatives_radial(run.eta, theta0, want_second=False)
    f = b.value - problem.gamma
    step = -f / b.first if math.isfinite(f) and b.first and math.isfinite(b.first) else math.nan
    if not step > 0:
        step = max(1e-8, 1e-8 * run.eta)
    r_level = run.eta
    k = 0
    while f > 0 and k < 50:
        k += 1
        r_level = run.eta + k * step
        f = run.ev.derivatives_radial(r_level, theta0, want_second=False).value - problem.gamma
    run.settings["perturbation"] = r_level - run.eta
    last_best = theta0

    for _ in range(run.opts.max_iterations):
        pts = circle_boundary_points(problem, r_level, run.counters, run.ev)
        secs = assemble_circular(pts, run.ev, eps, run.tol.membership)
        secs = prune_conjugates(secs, run.real)
        secs = launchable(split_safeguard(secs, last_best, run.tol.split))
        run.event("level", r_level, False, sections=len(secs))
        if not secs:
            return run.report(True, "no-cross-sections")
        best, psi = _line_searches(run, secs, lambda psi: psi, lambda psi: 0.0)
        progressed = best > run.eta
        run.event("search", best, progressed)
        if not progressed:
            return run.report(True, "no-progress")
        run.advance(best, best * cmath.exp(1j * psi))
        r_level = best
        last_best = psi
    run.diagnostics.append("iteration cap reached")
    return run.report(False, "iteration-cap")


def svs_direct_extended(problem: SvsProblem) -> SolveReport:
    """Line-search variant: each cross section is followed by an eigenvalue-based line search."""
    if problem.mode == "abscissa":
        return _direct_abscissa(problem)
    return _direct_radius(problem)


def solve(problem: SvsProblem) -> SolveReport:
    """Dispatch on ``problem.mode`` and ``problem.options.method``."""
    if problem.options.method == "direct":
        return svs_direct_extended(problem)
    if problem.mode == "abscissa":
        return svs_abscissa(problem)
    return svs_radius(problem)


def membership(problem: SvsProblem, lam, band: float = 1e-10) -> str:
    """Classify ``lam`` as ``'inside'``, ``'outside'`` or ``'boundary'``.

    Points within ``band`` (relative) of the level count as boundary; poles
    are inside.
    """
    ev = TransferEvaluator(problem.system, mode="lu", path=problem.options.path,
                           backend=problem.backend)
    sigma = ev.norm(lam)
    gamma = problem.gamma
    if math.isinf(sigma):
        return "inside"
    if abs(sigma - gamma) <= band * gamma:
        return "boundary"
    return "inside" if sigma > gamma else "outside"

"""Safeguarded one-dimensional root searches for ``sigma_1 - 1/epsilon``.

The searches move rightward along a horizontal line (abscissa) or outward
along a ray from the origin (radius), starting from a point inside the set,
and stop at a boundary crossing.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .transfer import Sample

EPS = np.finfo(float).eps

#: Largest number of multiples of the last step tried when nudging a root
#: to the outside of the set.
NUDGE_CAP = 50


@dataclass(frozen=True)
class RootResult:
    """Outcome of :func:`find_root_to_the_right`.

    ``value`` is the objective at ``root`` and ``step`` the Newton or Halley
    step computed there; ``bracket`` is the final ``(inside, outside)`` pair.
    """

    root: float
    value: float
    step: float
    iterations: int
    evaluations: int
    converged: bool
    bracket: tuple


@dataclass
class FastSearchResult:
    eta: float
    psi: float | None
    point: complex | None
    solved: int
    requested: int
    diagnostics: list = field(default_factory=list)

    def progressed_from(self, eta0: float) -> bool:
        return self.eta > eta0


def halley_step(sample: Sample) -> float:
    """Halley step for ``sample``, falling back to Newton.

    Newton is used when no second derivative is available or when the Halley
    denominator ``2 f'^2 - f f''`` is not positive, i.e. when Halley would step
    against the Newton direction.  ``nan`` means no usable step.
    """
    f, df, d2f = sample
    if not (math.isfinite(f) and math.isfinite(df)) or df == 0:
        return math.nan
    if d2f is None or not math.isfinite(d2f):
        return -f / df
    denom = 2 * df * df - f * d2f
    if denom <= 0:
        return -f / df
    return -2 * f * df / denom


def newton_step(sample: Sample) -> float:
    f, df, _ = sample
    if not (math.isfinite(f) and math.isfinite(df)) or df == 0:
        return math.nan
    return -f / df


def find_root_to_the_right(fun: Callable[[float], Sample], x0: float, *, ftol: float,
                           xtol: float = 1e-15, maxiter: int = 100,
                           sample0: Sample | None = None,
                           use_second: bool = True) -> RootResult:
    """Find a point ``r > x0`` where ``fun`` changes sign from positive to non-positive.

    ``fun(t)`` returns a :class:`Sample` of the objective and its derivatives;
    a non-finite value (a pole) counts as positive.  The search first grows
    the step until the objective turns non-positive, then refines the bracket
    with Halley (or Newton) steps that fall back to bisection whenever a step
    leaves the bracket or makes too little progress.

    Stops when ``|f| <= ftol`` or the bracket is narrower than
    ``xtol * max(1, |r|)``.
    """
    step_of = halley_step if use_second else newton_step
    evals = 0
    if sample0 is None:
        sample0 = fun(x0)
        evals += 1
    if not sample0.f > 0:
        raise ValueError("the starting point must be strictly inside the set")

    lo, s_lo = x0, sample0
    hi, s_hi = None, None
    x, s = x0, sample0
    first = max(1e-6, 0.01 * abs(x0))
    it = 0
    while it < maxiter:
        it += 1
        step = step_of(s)
        grow = x - x0
        if math.isfinite(step):
            grow = max(grow, 2 * abs(step))
        if x == x0:
            grow = max(grow, first)
        xn = x + grow
        sn = fun(xn)
        evals += 1
        if not math.isfinite(sn.f) or sn.f > 0:
            lo, s_lo = xn, sn
            x, s = xn, sn
            continue
        hi, s_hi = xn, sn
        break
    if hi is None:
        return RootResult(lo, s_lo.f, math.nan, it, evals, False, (lo, math.inf))
    if s_hi.f == 0:
        return RootResult(hi, 0.0, 0.0, it, evals, True, (lo, hi))

    if not math.isfinite(s_lo.f) or abs(s_hi.f) < abs(s_lo.f):
        x, s = hi, s_hi
    else:
        x, s = lo, s_lo
    bisect = False
    converged = False
    while True:
        if abs(s.f) <= ftol or hi - lo <= xtol * max(1.0, abs(x)):
            converged = True
            break
        if it >= maxiter:
            break
        it += 1
        step = step_of(s)
        xt = x + step if math.isfinite(step) else math.nan
        if bisect or not lo < xt < hi:
            xt = 0.5 * (lo + hi)
        st = fun(xt)
        evals += 1
        width = hi - lo
        if not math.isfinite(st.f) or st.f > 0:
            lo, s_lo = xt, st
        elif st.f < 0:
            hi, s_hi = xt, st
        else:
            return RootResult(xt, 0.0, 0.0, it, evals, True, (lo, hi))
        if not math.isfinite(st.f):
            bisect = True
            continue
        # One-sided quadratic convergence shrinks the bracket slowly, so only
        # bisect when the residual has not dropped either.
        bisect = (hi - lo) > 0.75 * width and abs(st.f) > 0.5 * abs(s.f)
        x, s = xt, st
    return RootResult(x, s.f, step_of(s), it, evals, converged, (lo, hi))


def _priority(sample: Sample, order: str) -> float:
    f, df, _ = sample
    if not math.isfinite(f):
        return math.inf
    if f > 0 and math.isfinite(df) and df >= 0:
        return math.inf
    step = halley_step(sample) if order == "halley" else newton_step(sample)
    return step if math.isfinite(step) else -math.inf


def _order(kind):
    if kind not in ("horizontal", "radial"):
        raise ValueError(f"unknown search direction {kind!r}")


def priority_steps(eta: float, candidates, kind: str, ev, epsilon: float,
                   order: str = "halley") -> list[float]:
    """Predicted first step lengths used to rank candidate ordinates.

    Larger means more promising.  Candidates at a pole, or inside the set
    with ``sigma'`` not negative, get ``inf``.
    """
    _order(kind)
    gamma = 1.0 / epsilon
    samples = [ev.objective(kind, psi, gamma)(eta) for psi in candidates]
    return [_priority(s, order) for s in samples]


def _point(kind, t, psi):
    if kind == "horizontal":
        return complex(t, psi)
    return t * cmath.exp(1j * psi)


def fast_search(eta0: float, candidates, kind: str, ev, epsilon: float, *,
                order: str | None = None, root_tol: float = 1e-12,
                maxiter: int = 100) -> FastSearchResult:
    """Advance ``eta0`` by root searches along several lines or rays.

    Every candidate ordinate ``psi`` (a height for ``kind='horizontal'``, an
    angle for ``kind='radial'``) is ranked by its predicted first step.  The
    candidates are then visited in that order, each warm started from the
    best point found so far and skipped when that point is already outside
    the set along its line.  Finally the best root is pushed just outside the
    set by small multiples of its last step.
    """
    _order(kind)
    candidates = [float(c) for c in candidates]
    gamma = 1.0 / epsilon
    if order is None:
        order = "halley" if ev.want_second else "newton"
    use_second = order == "halley"
    ftol = root_tol * gamma
    funs = [ev.objective(kind, psi, gamma, use_second) for psi in candidates]
    samples = [fun(eta0) for fun in funs]
    prio = [_priority(s, order) for s in samples]
    ranked = sorted(range(len(candidates)), key=lambda k: -prio[k])

    x = eta0
    best = None
    solved = 0
    diagnostics = []
    for k in ranked:
        sample = samples[k] if x == eta0 else funs[k](x)
        if not sample.f > 0:
            continue
        res = find_root_to_the_right(funs[k], x, ftol=ftol, maxiter=maxiter,
                                     sample0=sample, use_second=use_second)
        solved += 1
        if not res.converged:
            diagnostics.append(f"root search along psi={candidates[k]!r} hit the iteration cap")
        if res.root > x:
            x = res.root
            best = (k, res)

    result = FastSearchResult(x, None, None, solved, len(candidates), diagnostics)
    if best is None:
        return result
    k, res = best
    psi = candidates[k]
    if res.value > 0:
        probe = ev.objective(kind, psi, gamma, False)
        delta = abs(res.step) if math.isfinite(res.step) else 0.0
        delta = max(delta, abs(x) * EPS, float(np.spacing(abs(x))))
        for j in range(1, NUDGE_CAP + 1):
            xj = x + j * delta
            if probe(xj).f <= 0:
                x = xj
                break
        else:
            diagnostics.append("nudge-cap: final point could not be pushed outside the set")
    result.eta = x
    result.psi = psi
    result.point = _point(kind, x, psi)
    return result

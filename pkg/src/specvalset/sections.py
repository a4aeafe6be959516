"""Turning boundary ordinates into cross sections of the set."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .pencils import TWO_PI, BoundaryPointSet


@dataclass(frozen=True)
class CrossSection:
    """A maximal piece of a vertical line (``kind='interval'``) or circle
    (``kind='arc'``) lying in the set.

    Intervals run over ``y`` in ``[lo, hi]`` at ``Re lam = level``.  Arcs run
    over angles ``[lo, hi]`` at ``|lam| = level``, with ``lo`` in ``[0, 2 pi)``
    and ``hi <= lo + 2 pi``; an arc may wrap past ``2 pi``.
    """

    kind: str
    lo: float
    hi: float
    level: float

    @property
    def midpoint(self) -> float:
        mid = 0.5 * (self.lo + self.hi)
        if self.kind == "arc" and mid >= TWO_PI:
            mid -= TWO_PI
        return mid

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        if self.kind == "arc":
            value = self.lo + (value - self.lo) % TWO_PI
        return self.lo <= value <= self.hi


def _inside(ev, lam, gamma, membership_tol):
    return ev.norm_at(lam).sigma >= gamma * (1.0 - membership_tol)


def assemble_vertical(points: BoundaryPointSet, ev, epsilon: float,
                      membership_tol: float = 1e-12) -> list[CrossSection]:
    """Intervals between consecutive boundary ordinates whose midpoint is in the set."""
    gamma = 1.0 / epsilon
    ys = points.ordinates
    x = points.level
    out = []
    for lo, hi in zip(ys[:-1], ys[1:]):
        mid = 0.5 * (lo + hi)
        if _inside(ev, complex(x, mid), gamma, membership_tol):
            out.append(CrossSection("interval", float(lo), float(hi), x))
    return out


def assemble_circular(points: BoundaryPointSet, ev, epsilon: float,
                      membership_tol: float = 1e-12) -> list[CrossSection]:
    """Arcs between consecutive boundary angles, including the one wrapping past ``2 pi``."""
    gamma = 1.0 / epsilon
    th = list(points.ordinates)
    r = points.level
    if not th:
        return []
    pairs = list(zip(th[:-1], th[1:])) + [(th[-1], th[0] + TWO_PI)]
    out = []
    for lo, hi in pairs:
        mid = 0.5 * (lo + hi)
        lam = r * complex(math.cos(mid), math.sin(mid))
        if _inside(ev, lam, gamma, membership_tol):
            out.append(CrossSection("arc", float(lo), float(hi), r))
    return out


def prune_conjugates(sections: list[CrossSection], is_real: bool) -> list[CrossSection]:
    """For real systems drop sections lying entirely in the open lower half-plane.

    The set is symmetric about the real axis in that case, so every dropped
    section has a mirror image that is kept.
    """
    if not is_real:
        return list(sections)
    kept = []
    for s in sections:
        if s.kind == "interval":
            lower = s.hi < 0
        else:
            lower = s.lo > math.pi and s.hi < TWO_PI
        if not lower:
            kept.append(s)
    return kept


def split_safeguard(sections: list[CrossSection], last_best: float | None,
                    rel_tol: float) -> list[CrossSection]:
    """Split the first section whose midpoint nearly repeats ``last_best``.

    A line search launched from the same ordinate as the previous best would
    find the same point again, so the section is cut in half at its midpoint
    and both halves are searched instead.  At most one section is split.
    """
    if last_best is None:
        return list(sections)
    out = list(sections)
    for k, s in enumerate(out):
        if not s.contains(last_best) or s.length <= 0:
            continue
        target = last_best
        if s.kind == "arc":
            target = s.lo + (last_best - s.lo) % TWO_PI
        mid = 0.5 * (s.lo + s.hi)
        if abs(target - mid) <= rel_tol * s.length:
            out[k:k + 1] = [CrossSection(s.kind, s.lo, mid, s.level),
                            CrossSection(s.kind, mid, s.hi, s.level)]
            break
    return out


def launchable(sections: list[CrossSection]) -> list[CrossSection]:
    """Sections of positive length; degenerate ones never seed a search."""
    return [s for s in sections if s.length > 0]

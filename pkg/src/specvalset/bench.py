"""Side-by-side timing of the improved and line-search solvers."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .files import MANIFEST, load_system
from .options import SolverOptions
from .solvers import solve
from .system import SvsProblem


def percent_faster(t_direct: float, t_improved: float) -> float:
    """Positive when the improved solver is faster, negative otherwise.

    The magnitude is ``100 * (t_slow / t_fast - 1)``.
    """
    if t_improved <= t_direct:
        return 100.0 * (t_direct / t_improved - 1.0) if t_improved > 0 else float("inf")
    return -100.0 * (t_improved / t_direct - 1.0) if t_direct > 0 else float("-inf")


@dataclass
class BenchRow:
    name: str
    mode: str
    n: int
    m: int
    p: int
    epsilon: float
    direct: object
    improved: object
    t_direct: float
    t_improved: float

    @property
    def faster(self) -> float:
        return percent_faster(self.t_direct, self.t_improved)

    def as_dict(self) -> dict:
        return {
            "name": self.name, "mode": self.mode, "n": self.n, "m": self.m, "p": self.p,
            "epsilon": self.epsilon,
            "eta_direct": self.direct.eta, "eta_improved": self.improved.eta,
            "counters_direct": self.direct.counters.as_dict(),
            "counters_improved": self.improved.counters.as_dict(),
            "t_direct": self.t_direct, "t_improved": self.t_improved,
            "percent_faster": self.faster,
        }


def discover(directory) -> list[Path]:
    """Subdirectories of ``directory`` that hold a system."""
    directory = Path(directory)
    return sorted(p for p in directory.iterdir()
                  if p.is_dir() and ((p / MANIFEST).exists() or (p / "A.mtx").exists()))


def _timed(problem):
    t0 = time.perf_counter()
    report = solve(problem)
    return report, time.perf_counter() - t0


def bench_one(path, epsilon=None, modes=("abscissa", "radius"), options=None) -> list[BenchRow]:
    loaded = load_system(path)
    eps = epsilon if epsilon is not None else loaded.epsilon
    if eps is None:
        raise ValueError(f"{path}: no epsilon given and none in the manifest")
    options = options or SolverOptions()
    system = loaded.system
    rows = []
    for mode in modes:
        base = SvsProblem(system, eps, mode=mode, options=options)
        direct, t_d = _timed(base.replace(options=replace(options, method="direct")))
        improved, t_i = _timed(base.replace(options=replace(options, method="improved")))
        rows.append(BenchRow(system.name or Path(path).name, mode, system.n, system.m,
                             system.p, eps, direct, improved, t_d, t_i))
    return rows


def run_bench(directory, epsilon=None, modes=("abscissa", "radius"), jobs: int = 1,
              options=None) -> list[BenchRow]:
    """Bench every system below ``directory``; ``jobs > 1`` runs systems concurrently."""
    paths = discover(directory)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            chunks = list(pool.map(lambda p: bench_one(p, epsilon, modes, options), paths))
    else:
        chunks = [bench_one(p, epsilon, modes, options) for p in paths]
    return [row for chunk in chunks for row in chunk]


def _pair(a, b):
    return f"{a}/{b}"


def format_table(rows: list[BenchRow]) -> str:
    head = ("system", "mode", "n", "m", "p", "eig d/i", "svd d/i", "level d/i",
            "roots d/i", "time d", "time i", "% faster")
    lines = [head]
    for r in rows:
        cd, ci = r.direct.counters, r.improved.counters
        lines.append((
            r.name, r.mode, str(r.n), str(r.m), str(r.p),
            _pair(cd.eig_solves, ci.eig_solves),
            _pair(cd.svd_evals, ci.svd_evals),
            _pair(cd.level_searches, ci.level_searches),
            _pair(cd.root_searches_requested,
                  f"{ci.root_searches_solved}({ci.root_searches_requested})"),
            f"{r.t_direct:.3f}", f"{r.t_improved:.3f}", f"{r.faster:+.1f}",
        ))
    widths = [max(len(row[k]) for row in lines) for k in range(len(head))]
    return "\n".join("  ".join(cell.rjust(w) if k >= 2 else cell.ljust(w)
                               for k, (cell, w) in enumerate(zip(row, widths)))
                     for row in lines)

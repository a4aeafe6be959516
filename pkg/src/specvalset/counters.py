"""Work counters collected during a solve."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field, fields


@dataclass
class Counters:
    """Tallies of the expensive operations performed by a solver.

    Increments go through :meth:`add`, which holds a lock so evaluators shared
    between threads never lose counts.
    """

    eig_solves: int = 0
    svd_evals: int = 0
    level_searches: int = 0
    line_searches: int = 0
    root_searches_solved: int = 0
    root_searches_requested: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False,
                                  compare=False)

    def add(self, name: str, amount: int = 1) -> None:
        with self._lock:
            setattr(self, name, getattr(self, name) + amount)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)
                if not f.name.startswith("_")}

    @classmethod
    def from_dict(cls, data: dict) -> "Counters":
        return cls(**{k: int(v) for k, v in data.items()})

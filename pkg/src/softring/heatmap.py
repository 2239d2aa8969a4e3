"""Grid results over (mass, stiffness) and ordered parallel evaluation."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .design import DesignPoint

HEADER = ("M_kg", "k_N_per_mm", "value", "flag")
ABSENT = "absent"


@dataclass(frozen=True)
class Heatmap:
    """One scalar per design point with a per-point flag.

    ``value`` is NaN where the point is absent (infeasible or failed).
    """

    metric: str
    mass: np.ndarray
    k_n_per_mm: np.ndarray
    value: np.ndarray
    flag: tuple[str, ...]

    def __len__(self):
        return self.value.size

    def column(self, mass: float, rtol: float = 1e-9):
        sel = np.isclose(self.mass, mass, rtol=rtol)
        order = np.argsort(self.k_n_per_mm[sel])
        idx = np.flatnonzero(sel)[order]
        return self.k_n_per_mm[idx], self.value[idx], tuple(self.flag[i] for i in idx)

    @property
    def masses(self) -> np.ndarray:
        return np.unique(self.mass)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HEADER)
            for m, k, v, f in zip(self.mass, self.k_n_per_mm, self.value, self.flag):
                w.writerow([f"{m:.17g}", f"{k:.17g}", "" if np.isnan(v) else f"{v:.16e}", f])

    @classmethod
    def from_csv(cls, path, metric: str = "") -> "Heatmap":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or set(HEADER) - set(rows[0]):
            raise ValueError(f"{path}: expected columns {','.join(HEADER)}")
        val = np.array([float(r["value"]) if r["value"] else np.nan for r in rows])
        return cls(metric, np.array([float(r["M_kg"]) for r in rows]),
                   np.array([float(r["k_N_per_mm"]) for r in rows]), val,
                   tuple(r["flag"] for r in rows))

    @classmethod
    def from_results(cls, metric: str, points: Sequence[DesignPoint], values, flags) -> "Heatmap":
        return cls(metric, np.array([p.mass for p in points]),
                   np.array([p.stiffness_n_per_mm for p in points]),
                   np.asarray(values, dtype=float), tuple(flags))


def run_ordered(func: Callable, items: Sequence, threads: int = 1) -> list:
    """``[func(x) for x in items]`` on a bounded process pool, in input order."""
    threads = max(1, int(threads))
    if threads == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(threads, os.cpu_count() or 1, len(items))) as ex:
        return list(ex.map(func, items))

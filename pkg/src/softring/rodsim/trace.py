"""Simulation traces: uniform time grid plus named probe channels."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class SimulationError(RuntimeError):
    """Integration produced non-finite values; ``time`` is when it happened."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t = {time:.6g} s")
        self.time = time


@dataclass(frozen=True)
class SimTrace:
    time: np.ndarray
    channels: dict
    meta: dict = field(default_factory=dict)
    positions: np.ndarray | None = None
    velocities: np.ndarray | None = None

    @property
    def dt(self) -> float:
        return float(self.time[1] - self.time[0]) if self.time.size > 1 else 0.0

    def __len__(self):
        return self.time.size

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    def __contains__(self, name: str) -> bool:
        return name in self.channels

    def columns(self):
        """Flattened ``(header, column)`` pairs for every probe channel."""
        out = [("time", self.time)]
        for name, arr in self.channels.items():
            arr = np.asarray(arr)
            if arr.ndim == 1:
                out.append((name, arr))
                continue
            flat = arr.reshape(arr.shape[0], -1)
            axes = "xyz"
            for j in range(flat.shape[1]):
                if arr.ndim == 2 and arr.shape[1] <= 3:
                    suffix = axes[j]
                elif arr.ndim == 3 and arr.shape[2] <= 3:
                    suffix = f"{j // arr.shape[2] + 1}_{axes[j % arr.shape[2]]}"
                else:
                    suffix = str(j + 1)
                out.append((f"{name}_{suffix}", flat[:, j]))
        return out

    def to_csv(self, path) -> None:
        cols = self.columns()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([h for h, _ in cols])
            data = np.column_stack([c for _, c in cols])
            for row in data:
                w.writerow([f"{v:.16e}" for v in row])

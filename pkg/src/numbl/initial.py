"""Built-in initial conditions and sampled-data loading."""

from __future__ import annotations

from pathlib import Path
from typing import Callable

import numpy as np

__all__ = ["gaussian_bump", "constant", "linear", "sine", "from_samples", "get_initial", "INITIAL_CONDITIONS"]


def gaussian_bump(x):
    return np.exp(-100.0 * (np.asarray(x, dtype=float) - 0.5) ** 2)


def constant(x):
    return np.ones_like(np.asarray(x, dtype=float))


def linear(x):
    return np.asarray(x, dtype=float).copy()


def sine(x):
    return np.sin(2 * np.pi * np.asarray(x, dtype=float))


INITIAL_CONDITIONS: dict[str, Callable] = {
    "gaussian_bump": gaussian_bump,
    "constant": constant,
    "linear": linear,
    "sine": sine,
}


def from_samples(path: str | Path) -> Callable:
    """Piecewise-linear interpolant of ``x, u`` samples read from a text file.

    The file holds two whitespace- or comma-separated columns (a header line
    starting with ``#`` or a non-numeric token is skipped).  Outside the
    sampled range the function is zero.  The simulator then takes exact cell
    averages of this interpolant, so the samples are point values, not
    averages.
    """
    text = Path(path).read_text().replace(",", " ").splitlines()
    rows = []
    for line in text:
        parts = line.split()
        if not parts or line.lstrip().startswith("#"):
            continue
        try:
            rows.append([float(v) for v in parts[:2]])
        except ValueError:
            continue
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: need at least two rows of 'x u' samples")
    order = np.argsort(data[:, 0])
    xs, us = data[order, 0], data[order, 1]
    if not np.all(np.isfinite(us)):
        raise ValueError(f"{path}: non-finite sample values")

    def u0(x):
        return np.interp(np.asarray(x, dtype=float), xs, us, left=0.0, right=0.0)

    return u0


def get_initial(name: str) -> Callable:
    if name in INITIAL_CONDITIONS:
        return INITIAL_CONDITIONS[name]
    if Path(name).is_file():
        return from_samples(name)
    raise ValueError(
        f"unknown initial condition {name!r}; use one of {', '.join(INITIAL_CONDITIONS)} or a data file"
    )

"""The bundled two-variable, five-constraint instance and its known solution.

On ``[0, 1]`` the optimum sits where rows 4 and 5 bind; on ``(1, 2]`` rows 3
and 5 bind and row 4 joins them at ``t = 2``.  The closed forms below are used
as reference data by tests and by ``ctlp example``.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .instance import CTLPInstance, Trajectory, load_instance
from .timefunc import TimeGrid

OPTIMAL_VALUE = -11.0 / 3.0


def example1_document() -> str:
    return resources.files("ctlp.data").joinpath("example1.json").read_text()


def example1() -> CTLPInstance:
    return load_instance(example1_document())


def zbar(t: float, piece: int) -> np.ndarray:
    if piece == 0:
        return np.array([11 / 4 - 5 / 8 * t, 1 / 4 + 5 / 8 * t])
    return np.array([1 / 4 + 5 / 8 * t, 1 / 4 + 5 / 8 * t])


def multipliers(t: float, piece: int) -> np.ndarray:
    if piece == 0:
        return np.array([0.0, 0.0, 0.0, 1.0 - t, t])
    return np.array([0.0, 0.0, t - 1.0, 0.0, t])


def dual(t: float, piece: int) -> np.ndarray:
    return -multipliers(t, piece)


def slacks(t: float, piece: int) -> np.ndarray:
    """``b - A zbar`` written out by hand."""
    y1 = 1 / 4 + 5 / 8 * t
    if piece == 0:
        return np.array([y1, 11 / 4 - 5 / 8 * t, 5 / 2 - 5 / 4 * t, 0.0, 0.0])
    return np.array([y1, 1 / 4 + 5 / 8 * t, 0.0, 5 / 2 - 5 / 4 * t, 0.0])


def reference(grid: TimeGrid) -> dict[str, Trajectory]:
    """``zbar``, ``u`` and ``w`` sampled on ``grid``."""
    return {
        "z": Trajectory.sample(grid, zbar),
        "u": Trajectory.sample(grid, multipliers),
        "w": Trajectory.sample(grid, dual),
    }

"""Deterministic grids on the boundary of the cube, used for covering-radius certificates."""

from __future__ import annotations

import math

import numpy as np


def half_cube_surface(k: int, h: float) -> tuple[np.ndarray, float]:
    """Grid points on the faces ``{a_j = +1}`` of ``[-1, 1]^k`` and their l2 covering radius.

    Together with their negatives the points cover the whole cube surface:
    every surface point is within the returned radius of ``g`` or ``-g`` for
    some grid point ``g``.
    """
    if k == 1:
        return np.ones((1, 1)), 0.0
    steps = max(1, math.ceil(2.0 / h))
    ticks = np.linspace(-1.0, 1.0, steps + 1)
    h = 2.0 / steps
    free = np.stack(np.meshgrid(*([ticks] * (k - 1)), indexing="ij"), axis=-1).reshape(-1, k - 1)
    faces = []
    for j in range(k):
        pts = np.insert(free, j, 1.0, axis=1)
        faces.append(pts)
    return np.vstack(faces), 0.5 * h * math.sqrt(k - 1)


def spacing_for_budget(k: int, budget: int) -> float:
    if k == 1:
        return 2.0
    per_axis = max(2.0, (budget / k) ** (1.0 / (k - 1)))
    return 2.0 / (per_axis - 1.0)

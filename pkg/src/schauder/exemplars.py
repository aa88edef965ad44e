"""Built-in frames: canonical bases, the l1 and l2 counterexamples, random Parseval frames."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import ortho_group

from .frames import FrameInstance
from .norms import PNormSpace, format_p, parse_p

__all__ = [
    "TightFrameParams",
    "canonical",
    "l1_pathological",
    "l2_tight",
    "random_parseval",
    "mercedes",
    "bundled",
]


def canonical(p=2, d: int = 3) -> FrameInstance:
    """Unit vector basis with its coordinate functionals."""
    space = PNormSpace(d, p)
    eye = np.eye(d)
    return FrameInstance(
        space, eye, eye, name=f"canonical(p={format_p(space.p)},d={d})", provenance="unit vector basis"
    )


def l1_pathological(N: int = 6, d: int | None = None) -> FrameInstance:
    """Unconditional frame of l1 that is neither locally shrinking nor locally boundedly complete.

    ``x_{2i-1} = x_{2i} = e_i`` and

    * ``f_1 = 1`` (all-ones functional),
    * ``f_2 = e_1^* - 1``,
    * ``f_{2k-1} = e_k^* - e_1^*/2^k`` and ``f_{2k} = e_1^*/2^k`` for ``k >= 2``,

    truncated to ``d`` coordinates.  Vectors supported on the first ``N/2``
    coordinates are reconstructed exactly; the all-ones functional is cut
    at ``d``.
    """
    if N % 2 or N < 4:
        raise ValueError(f"N must be even and >= 4, got {N}")
    half = N // 2
    if d is None:
        d = half + 1
    if d < half + 1:
        raise ValueError(f"need d >= N/2 + 1 = {half + 1}, got d={d}")
    eye = np.eye(d)
    ones = np.ones(d)
    X = np.repeat(eye[:half], 2, axis=0)
    F = np.empty((N, d))
    F[0] = ones
    F[1] = eye[0] - ones
    for k in range(2, half + 1):
        F[2 * k - 2] = eye[k - 1] - eye[0] / 2.0**k
        F[2 * k - 1] = eye[0] / 2.0**k
    return FrameInstance(
        PNormSpace(d, 1),
        X,
        F,
        name=f"l1_pathological(N={N},d={d})",
        provenance="duplicated l1 basis with all-ones correction",
        reconstruction_span=eye[:half],
    )


@dataclass(frozen=True)
class TightFrameParams:
    """Weights ``c_i`` in (0, 1) with ``sum c_i^2 < 1``; ``c = sqrt(1 - sum c_i^2)``."""

    c_i: tuple[float, ...]

    def __post_init__(self):
        c_i = tuple(float(v) for v in self.c_i)
        object.__setattr__(self, "c_i", c_i)
        if not c_i:
            raise ValueError("need at least one weight c_i")
        if any(not (0.0 < v < 1.0) for v in c_i):
            raise ValueError("every c_i must lie in (0, 1)")
        if sum(v * v for v in c_i) >= 1.0:
            raise ValueError("need sum c_i^2 < 1")

    @property
    def c(self) -> float:
        return math.sqrt(1.0 - sum(v * v for v in self.c_i))


def l2_tight(params: TightFrameParams | Sequence[float] = (0.6, 0.48)) -> FrameInstance:
    """Semi-normalised Parseval frame of l2 (truncated to ``M + 1`` coordinates).

    ``x_1 = c e_1``, ``x_{2i} = (e_{i+1} + c_i e_1)/sqrt 2`` and
    ``x_{2i+1} = (e_{i+1} - c_i e_1)/sqrt 2``, with ``f_i = <x_i, .>``.
    Differences ``x_{2i} - x_{2i+1} = sqrt 2 c_i e_1`` keep ``e_1`` in every
    tail span, so the frame is not locally shrinking.
    """
    if not isinstance(params, TightFrameParams):
        params = TightFrameParams(tuple(params))
    M = len(params.c_i)
    d = M + 1
    X = np.zeros((2 * M + 1, d))
    X[0, 0] = params.c
    r = 1.0 / math.sqrt(2.0)
    for i, ci in enumerate(params.c_i, start=1):
        X[2 * i - 1, i] = r
        X[2 * i - 1, 0] = ci * r
        X[2 * i, i] = r
        X[2 * i, 0] = -ci * r
    return FrameInstance(
        PNormSpace(d, 2),
        X,
        X.copy(),
        name=f"l2_tight(c_i={list(params.c_i)})",
        provenance="tight l2 frame with e_1 in every tail span",
        metadata={"c": params.c, "c_i": list(params.c_i)},
    )


def _parseval_rows(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    if n == d:
        return ortho_group.rvs(d, random_state=rng) if d > 1 else np.array([[1.0]])
    Q, R = np.linalg.qr(rng.standard_normal((n, d)))
    # fix the sign ambiguity of QR so the result is a function of the draw only
    return Q * np.sign(np.diag(R))


def random_parseval(d: int, n: int, seed: int = 0, groups: int = 1) -> FrameInstance:
    """Rows of a random ``n x d`` matrix with orthonormal columns, ``f_i = <x_i, .>``.

    With ``groups > 1`` the coordinates and frame indices are split into
    consecutive groups and an independent Parseval frame is drawn on each,
    giving a block-diagonal frame whose early functionals vanish on late
    vectors.
    """
    if n < d:
        raise ValueError(f"need n >= d, got n={n}, d={d}")
    if groups < 1 or groups > d:
        raise ValueError(f"groups must lie in [1, d], got {groups}")
    rng = np.random.default_rng(seed)
    dims = np.array_split(np.arange(d), groups)
    sizes = [len(ix) for ix in np.array_split(np.arange(n), groups)]
    if any(s < len(ix) for s, ix in zip(sizes, dims)):
        raise ValueError("each group needs at least as many vectors as coordinates")
    X = np.zeros((n, d))
    row = 0
    for ix, size in zip(dims, sizes):
        X[row : row + size, ix] = _parseval_rows(len(ix), size, rng)
        row += size
    name = f"random_parseval(d={d},n={n},seed={seed}" + (f",groups={groups})" if groups > 1 else ")")
    return FrameInstance(PNormSpace(d, 2), X, X.copy(), name=name, provenance="random Parseval frame")


def mercedes() -> FrameInstance:
    """Three unit vectors at 120 degrees in R^2 with canonical dual ``f_i = (2/3) x_i``."""
    angles = np.pi / 2 + 2 * np.pi * np.arange(3) / 3
    X = np.column_stack([np.cos(angles), np.sin(angles)])
    return FrameInstance(
        PNormSpace(2, 2), X, 2.0 * X / 3.0, name="mercedes", provenance="harmonic frame of R^2"
    )


def bundled() -> list[FrameInstance]:
    """The exemplar corpus used by ``verify`` and the acceptance suite."""
    return [
        canonical(1, 3),
        canonical(2, 3),
        canonical("inf", 3),
        l1_pathological(6, 4),
        l2_tight((0.6, 0.48)),
        random_parseval(4, 7, seed=0),
        mercedes(),
    ]


def from_kind(kind: str, **params) -> FrameInstance:
    kind = kind.replace("-", "_")
    if kind == "canonical":
        return canonical(parse_p(params.get("p", 2)), int(params.get("dim", 3)))
    if kind == "l1_pathological":
        return l1_pathological(int(params.get("n", 6)), params.get("dim"))
    if kind == "l2_tight":
        return l2_tight(TightFrameParams(tuple(params.get("c", (0.6, 0.48)))))
    if kind == "random_parseval":
        return random_parseval(
            int(params.get("dim", 4)),
            int(params.get("n", 7)),
            int(params.get("seed", 0)),
            int(params.get("groups", 1)),
        )
    if kind == "mercedes":
        return mercedes()
    raise ValueError(f"unknown frame kind {kind!r}")

"""Tail restriction-norm profiles and three-valued trend verdicts.

A finite truncation cannot certify a limit, so profiles are sampled on a
grid of tail starts and summarised by :func:`verdict`, which may answer
``INCONCLUSIVE``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .frames import FrameInstance
from .norms import Bounds, RestrictedNormSolver

__all__ = [
    "Target",
    "Tag",
    "DecayProfile",
    "Verdict",
    "default_grid",
    "shrinking_profile",
    "boundedly_complete_profile",
    "norming_profile",
    "verdict",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("frame", "target", "n", "lower", "upper", "method")


class Target(str, enum.Enum):
    FUNCTIONAL = "FUNCTIONAL"  # f_m restricted to tail vector spans
    VECTOR = "VECTOR"  # x_m restricted to tail functional spans
    NORMING = "NORMING"  # x normed by initial functional spans


class Tag(str, enum.Enum):
    DECAYING = "DECAYING"
    STALLED = "STALLED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class DecayProfile:
    frame: str
    target: Target
    index: int | None
    grid: tuple[int, ...]
    values: tuple[Bounds, ...]

    def uppers(self) -> np.ndarray:
        return np.array([b.upper for b in self.values])

    def lowers(self) -> np.ndarray:
        return np.array([b.lower for b in self.values])

    def monotone_violations(self, slack: float = 1e-9) -> list[int]:
        """Grid positions where the profile rises by more than the solver enclosure allows.

        Tail profiles should not increase; norming profiles should not decrease.
        """
        lo, hi = self.lowers(), self.uppers()
        bad = []
        for j in range(1, len(self.values)):
            if self.target is Target.NORMING:
                if hi[j] < lo[j - 1] - slack * max(1.0, lo[j - 1]):
                    bad.append(j)
            elif lo[j] > hi[j - 1] + slack * max(1.0, hi[j - 1]):
                bad.append(j)
        return bad

    def label(self) -> str:
        if self.target is Target.NORMING:
            return "norming"
        kind = "shrinking" if self.target is Target.FUNCTIONAL else "boundedly_complete"
        return f"{kind}(m={self.index})"

    def csv_rows(self) -> list[tuple]:
        return [
            (self.frame, self.label(), n, repr(b.lower), repr(b.upper), b.method.value)
            for n, b in zip(self.grid, self.values)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(self.csv_rows())
        return buf.getvalue()


@dataclass(frozen=True)
class Verdict:
    tag: Tag
    tau: float
    window: int
    detail: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"tag": self.tag.value, "tau": self.tau, "window": self.window}


def default_grid(N: int) -> tuple[int, ...]:
    """``n = ceil(N/8) * k`` for ``k = 1, 2, ...`` up to ``N``."""
    step = max(1, math.ceil(N / 8))
    return tuple(range(step, N + 1, step))


def _grid(frame: FrameInstance, grid) -> tuple[int, ...]:
    g = default_grid(frame.N) if grid is None else tuple(int(n) for n in grid)
    if not g:
        raise ValueError("empty grid")
    if any(n < 1 or n > frame.N for n in g):
        raise IndexError(f"grid points must lie in [1, {frame.N}]")
    return g


def _check_m(frame: FrameInstance, m: int, grid) -> None:
    if not (1 <= m <= frame.N):
        raise IndexError(f"m must lie in [1, {frame.N}], got {m}")
    if not m < max(grid):
        raise ValueError(f"need m < max(grid), got m={m}, max(grid)={max(grid)}")


def shrinking_profile(frame: FrameInstance, m: int, grid=None) -> DecayProfile:
    """``r(n) = ||f_m restricted to span(x_i : n <= i <= N)||``."""
    g = _grid(frame, grid)
    _check_m(frame, m, g)
    f = frame.functionals[m - 1]
    vals = tuple(RestrictedNormSolver(frame.space, frame.vectors[n - 1 :])(f) for n in g)
    return DecayProfile(frame.name, Target.FUNCTIONAL, m, g, vals)


def boundedly_complete_profile(frame: FrameInstance, m: int, grid=None) -> DecayProfile:
    """``r(n) = sup {|f(x_m)| : f in span(f_i : n <= i <= N), ||f|| <= 1}``."""
    g = _grid(frame, grid)
    _check_m(frame, m, g)
    x = frame.vectors[m - 1]
    dual = frame.space.dual()
    vals = tuple(RestrictedNormSolver(dual, frame.functionals[n - 1 :])(x) for n in g)
    return DecayProfile(frame.name, Target.VECTOR, m, g, vals)


def norming_profile(frame: FrameInstance, x, grid=None) -> DecayProfile:
    """``c(n) = sup {|f(x)| : f in span(f_1..f_n), ||f|| <= 1}``.

    With the full prefix the value lies in ``[||x||/K, ||x||]`` for any
    ``x`` the frame reconstructs.
    """
    g = _grid(frame, grid)
    x = frame.space.check(x)
    dual = frame.space.dual()
    vals = tuple(RestrictedNormSolver(dual, frame.functionals[:n])(x) for n in g)
    return DecayProfile(frame.name, Target.NORMING, None, g, vals)


def verdict(profile: DecayProfile, tau: float = 1e-3, window: int = 3) -> Verdict:
    """Summarise a tail profile.

    ``DECAYING`` when the last value is at most ``tau`` and at most half the
    value ``window`` grid points earlier; ``STALLED`` when the last value is
    at least ``10 tau`` and the last ``window`` values agree within 1%;
    otherwise ``INCONCLUSIVE``.  Upper ends are used for the decay test and
    lower ends for the stall test, so neither tag is claimed on the strength
    of solver slack.
    """
    if not profile.values:
        raise ValueError("empty profile")
    if window < 1:
        raise ValueError("window must be >= 1")
    hi, lo = profile.uppers(), profile.lowers()
    start = max(0, len(hi) - 1 - window)
    last_hi, last_lo = hi[-1], lo[-1]
    tail_lo, tail_hi = lo[start:], hi[start:]
    detail = {"last_upper": float(last_hi), "last_lower": float(last_lo), "reference": float(hi[start])}
    if last_hi <= tau and last_hi <= 0.5 * lo[start]:
        return Verdict(Tag.DECAYING, tau, window, detail)
    if last_lo >= 10 * tau and tail_hi.max() - tail_lo.min() <= 0.01 * tail_hi.max():
        return Verdict(Tag.STALLED, tau, window, detail)
    return Verdict(Tag.INCONCLUSIVE, tau, window, detail)

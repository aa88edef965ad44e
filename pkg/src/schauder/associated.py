"""Minimal and maximal associated norms, synthesis/analysis maps and basis constants.

Coefficient vectors are indexed like the frame (entry ``i`` pairs with
``x_{i+1}`` / ``f_{i+1}``); shorter vectors are padded with zeros.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _mesh
from .frames import FrameInstance, intervals, projection_constant
from .norms import (
    EPS,
    Bounds,
    DimensionError,
    LinearConstraintSet,
    Method,
    PNormSpace,
    SupportFunctionSolver,
    lp_norm,
    two_to_p_bound,
)

__all__ = [
    "Side",
    "MinNormOracle",
    "MaxNormOracle",
    "FiniteSequence",
    "DependenceError",
    "min_norm",
    "max_norm",
    "synthesis_apply",
    "analysis_apply",
    "sup_ratio",
    "basis_constant",
    "interval_projection_constant",
    "sequence_unconditional_constant",
    "block_sandwich_report",
    "sandwich_constants_report",
    "restrict",
    "VERTEX_BUDGET",
]

VERTEX_BUDGET = 2_000_000
MESH_BUDGET = 200_000


class DependenceError(ValueError):
    """Raised when a finite sequence is (numerically) linearly dependent."""


class Side(str, enum.Enum):
    VECTORS = "VECTORS"
    FUNCTIONALS = "FUNCTIONALS"


def _coeffs(frame: FrameInstance, a) -> np.ndarray:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.ndim != 1 or a.shape[0] > frame.N:
        raise DimensionError(f"at most {frame.N} coefficients expected, got shape {a.shape}")
    if a.shape[0] < frame.N:
        a = np.concatenate([a, np.zeros(frame.N - a.shape[0])])
    return a


def restrict(a, m: int, n: int) -> np.ndarray:
    """Zero out every entry outside positions ``m..n`` (1-based, inclusive)."""
    a = np.asarray(a, dtype=float)
    out = np.zeros_like(a)
    out[m - 1 : n] = a[m - 1 : n]
    return out


class MinNormOracle:
    """``||a||_Min = max_{m<=n} ||sum_{i=m}^n a_i g_i||`` with ``g_i = x_i`` or ``g_i = f_i``.

    On the FUNCTIONALS side the sums are measured in the dual norm.
    """

    def __init__(self, frame: FrameInstance, side: Side | str = Side.VECTORS):
        self.frame = frame
        self.side = Side(side)
        if self.side is Side.VECTORS:
            self.G, self.p = frame.vectors, frame.p
        else:
            self.G, self.p = frame.functionals, frame.space.q

    def detail(self, a) -> tuple[float, tuple[int, int]]:
        """Value and the lexicographically smallest maximising interval."""
        a = _coeffs(self.frame, a)
        S = np.vstack([np.zeros(self.G.shape[1]), np.cumsum(a[:, None] * self.G, axis=0)])
        N = self.frame.N
        best, key = -1.0, (1, 1)
        for m in range(1, N + 1):
            vals = lp_norm(S[m:] - S[m - 1], self.p, axis=1)
            j = int(np.argmax(vals))
            if vals[j] > best:
                best, key = float(vals[j]), (m, m + j)
        return best, key

    def __call__(self, a) -> float:
        return self.detail(a)[0]


def min_norm(oracle: MinNormOracle, a) -> float:
    return oracle(a)


class MaxNormOracle:
    """``||a||_Max = sup {|<a, b>| : ||b||_Min(FUNCTIONALS) <= 1}``.

    The body is encoded as one constraint per interval ``[m, n]``:
    ``||F_{m,n}^T b||_q <= 1`` where ``F_{m,n}`` holds ``f_m..f_n``.
    """

    def __init__(self, frame: FrameInstance, tol: float = 1e-6):
        self.frame = frame
        self.tol = tol
        F = frame.functionals
        maps = []
        for m, n in intervals(frame.N):
            B = np.zeros((frame.dim, frame.N))
            B[:, m - 1 : n] = F[m - 1 : n].T
            maps.append((B, frame.space.q))
        self.body = LinearConstraintSet(maps)
        self._solver = SupportFunctionSolver(self.body)

    def __call__(self, a) -> Bounds:
        return self._solver.solve(_coeffs(self.frame, a), self.tol)


def max_norm(oracle: MaxNormOracle, a) -> Bounds:
    return oracle(a)


def synthesis_apply(frame: FrameInstance, a) -> np.ndarray:
    """``sum a_i x_i``."""
    return _coeffs(frame, a) @ frame.vectors


def analysis_apply(frame: FrameInstance, x) -> np.ndarray:
    """``(f_i(x))_i``."""
    return frame.functionals @ frame.space.check(x)


@dataclass(frozen=True, eq=False)
class FiniteSequence:
    """Vectors ``w_1..w_k`` (rows) in an lp space."""

    space: PNormSpace
    vectors: np.ndarray

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if W.shape[1] != self.space.dim:
            raise DimensionError(f"vectors must have length {self.space.dim}")
        object.__setattr__(self, "vectors", W)

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    def check_independent(self, rtol: float = 1e-10) -> None:
        s = np.linalg.svd(self.vectors, compute_uv=False)
        if s.size < self.k or s[-1] <= rtol * max(s[0], 1e-300):
            raise DependenceError(f"the {self.k} vectors are linearly dependent")


def _ratio_values(Wm: np.ndarray, cands: np.ndarray, masks: np.ndarray, p: float):
    """max over masks of ||Wm (D a)|| / ||Wm a|| for each candidate row ``a``."""
    den = lp_norm(cands @ Wm.T, p, axis=1)
    ok = den > 1e-13 * max(1.0, float(np.abs(cands).max(initial=0.0)))
    best = np.full(len(cands), -np.inf)
    arg = np.zeros(len(cands), dtype=int)
    for j, D in enumerate(masks):
        num = lp_norm((cands * D) @ Wm.T, p, axis=1)
        r = np.where(ok, num / np.where(ok, den, 1.0), -np.inf)
        upd = r > best
        best[upd] = r[upd]
        arg[upd] = j
    return best, arg


def _vertex_candidates(Wm: np.ndarray, p: float):
    """Directions containing every vertex of ``{a : ||Wm a||_p <= 1}`` for p in {1, inf}."""
    d, k = Wm.shape
    if k == 1:
        yield np.ones((1, 1))
        return
    if p == 1.0:
        # vertices have k-1 vanishing coordinates: kernels of (k-1)-row submatrices
        for combos in _chunks(itertools.combinations(range(d), k - 1), 20000):
            sub = Wm[np.array(combos)]
            _, s, Vt = np.linalg.svd(sub)
            good = s[:, -1] > 1e-12 * np.maximum(s[:, 0], 1e-300)
            if good.any():
                yield Vt[good, -1, :]
    else:
        signs = np.array([(1.0,) + s for s in itertools.product((1.0, -1.0), repeat=k - 1)])
        for combos in _chunks(itertools.combinations(range(d), k), max(1, 20000 // len(signs))):
            sub = Wm[np.array(combos)]
            cond = np.linalg.cond(sub)
            good = np.isfinite(cond) & (cond < 1e12)
            if good.any():
                sol = np.linalg.solve(sub[good][:, None, :, :], signs[None, :, :, None])[..., 0]
                yield sol.reshape(-1, k)


def _chunks(it, size):
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield block


def _mesh_ratio(Wm: np.ndarray, masks: np.ndarray, p: float, budget: int) -> Bounds:
    """Grid on the cube surface with a Lipschitz covering certificate for the upper bound."""
    k = Wm.shape[1]
    h = _mesh.spacing_for_budget(k, budget)
    grid, rho = _mesh.half_cube_surface(k, h)
    L = two_to_p_bound(Wm, p)
    den = lp_norm(grid @ Wm.T, p, axis=1)
    best, upper, arg = -np.inf, -np.inf, None
    for j, D in enumerate(masks):
        num = lp_norm((grid * D) @ Wm.T, p, axis=1)
        r = num / den
        i = int(np.argmax(r))
        if r[i] > best:
            best, arg = float(r[i]), (j, tuple(grid[i]))
        LD = two_to_p_bound(Wm * D, p)
        safe = den - L * rho
        if np.any(safe <= 0):
            upper = math.inf
        else:
            upper = max(upper, float(((num + LD * rho) / safe).max()))
    return Bounds(best, max(upper, best), rho, Method.MESH, arg)


def sup_ratio(seq: FiniteSequence, masks, budget: int = VERTEX_BUDGET) -> Bounds:
    """``max_D sup_{a != 0} ||sum D_i a_i w_i|| / ||sum a_i w_i||`` over diagonal masks ``D``.

    Initial-segment masks give the basis constant, interval masks the
    projection constant and sign masks the unconditional constant.
    """
    seq.check_independent()
    masks = np.atleast_2d(np.asarray(masks, dtype=float))
    Wm = seq.vectors.T  # d x k, columns are the w_i
    p = seq.space.p
    k = seq.k
    if masks.shape[1] != k:
        raise DimensionError("masks must have one entry per sequence element")

    if p == 2.0:
        G = Wm.T @ Wm
        lower, upper, arg = -1.0, -1.0, None
        for j, D in enumerate(masks):
            GD = G * np.outer(D, D)
            lam, vec = scipy.linalg.eigh(GD, G)
            a = vec[:, -1]
            r = float(np.linalg.norm(Wm @ (D * a)) / np.linalg.norm(Wm @ a))
            if r > lower:
                lower, arg = r, j
            slack = 64 * EPS * k * max(1.0, abs(lam[-1])) * np.linalg.cond(G)
            upper = max(upper, math.sqrt(max(lam[-1], 0.0) + slack), r)
        return Bounds(lower, upper, 0.0, Method.EIGEN, (arg,))

    if seq.space.polyhedral:
        d = seq.space.dim
        count = math.comb(d, k - 1) if p == 1.0 else math.comb(d, k) * 2 ** (k - 1)
        if count <= budget:
            best, arg = -1.0, None
            for cands in _vertex_candidates(Wm, p):
                vals, which = _ratio_values(Wm, cands, masks, p)
                i = int(np.argmax(vals))
                if vals[i] > best:
                    best, arg = float(vals[i]), (int(which[i]),)
            return Bounds(best, best * (1.0 + 1e-12), 0.0, Method.EXACT, arg)

    return _mesh_ratio(Wm, masks, p, MESH_BUDGET)


def basis_constant(seq: FiniteSequence) -> Bounds:
    """Largest norm of an initial-segment projection on ``span(w_i)``."""
    seq.check_independent()
    k = seq.k
    if k == 1:
        return Bounds.exact(1.0)
    masks = np.tril(np.ones((k - 1, k)))  # row j keeps w_1..w_{j+1}
    return sup_ratio(seq, masks)


def interval_projection_constant(seq: FiniteSequence) -> Bounds:
    """Largest norm of an interval projection ``sum_{i=m}^n a_i w_i`` on ``span(w_i)``."""
    seq.check_independent()
    k = seq.k
    masks = []
    for m, n in intervals(k):
        D = np.zeros(k)
        D[m - 1 : n] = 1.0
        masks.append(D)
    return sup_ratio(seq, np.array(masks))


def sequence_unconditional_constant(seq: FiniteSequence) -> Bounds:
    """``max_sigma sup_a ||sum sigma_i a_i w_i|| / ||sum a_i w_i||`` by sign enumeration."""
    seq.check_independent()
    k = seq.k
    signs = np.array([(1.0,) + s for s in itertools.product((1.0, -1.0), repeat=k - 1)])
    b = sup_ratio(seq, signs)
    method = Method.SIGN_ENUM if b.method in (Method.EXACT, Method.EIGEN) else b.method
    return Bounds(b.lower, b.upper, b.tol, method, b.witness)


def _block_support(y: np.ndarray) -> tuple[int, int]:
    nz = np.flatnonzero(y)
    if nz.size == 0:
        raise ValueError("zero block")
    return int(nz[0]) + 1, int(nz[-1]) + 1


@dataclass(frozen=True)
class BlockSandwichReport:
    lhs: float
    mid: float
    bound: float
    K: float
    K_basis: float
    alpha: float
    bound_with_basis_constant: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.mid + self.tol and self.mid <= self.bound + self.tol

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["holds"] = self.holds
        return d


def block_sandwich_report(
    frame: FrameInstance, blocks, a, tol: float = 1e-9, constants: tuple[float, float] | None = None
) -> BlockSandwichReport:
    """``||sum a_i w_i|| <= ||sum a_i y_i||_Min <= (2K/alpha + K) ||sum a_i w_i||``.

    ``blocks`` are coefficient vectors ``y_i`` with consecutive disjoint
    supports and ``||y_i||_Min <= 1``; ``w_i = sum_j y_i[j] x_j``.  ``K`` is
    the interval projection constant of ``(w_i)``; the same bound with the
    (initial-segment) basis constant is reported alongside.  Pass
    ``constants=(K, K_basis)`` to reuse values across many ``a``.
    """
    Y = np.atleast_2d(np.asarray([_coeffs(frame, y) for y in blocks]))
    a = np.asarray(a, dtype=float)
    if a.shape != (Y.shape[0],):
        raise DimensionError("one coefficient per block expected")
    oracle = MinNormOracle(frame, Side.VECTORS)
    prev_end = 0
    for i, y in enumerate(Y):
        start, end = _block_support(y)
        if start <= prev_end:
            raise ValueError(f"block {i + 1} overlaps or precedes block {i}")
        prev_end = end
        if oracle(y) > 1.0 + 1e-12:
            raise ValueError(f"block {i + 1} lies outside the Min unit ball")
    W = Y @ frame.vectors
    norms = lp_norm(W, frame.p, axis=1)
    alpha = float(norms.min())
    if alpha < 1e-8:
        raise ValueError(f"degenerate block image (min ||w_i|| = {alpha:.3g})")
    if constants is None:
        seq = FiniteSequence(frame.space, W)
        constants = (interval_projection_constant(seq).upper, basis_constant(seq).upper)
    K, Kb = constants
    lhs = float(lp_norm(a @ W, frame.p))
    mid = oracle(a @ Y)
    return BlockSandwichReport(
        lhs=lhs,
        mid=mid,
        bound=(2 * K / alpha + K) * lhs,
        K=K,
        K_basis=Kb,
        alpha=alpha,
        bound_with_basis_constant=(2 * Kb / alpha + Kb) * lhs,
        tol=tol * max(1.0, mid),
    )


@dataclass(frozen=True)
class SandwichReport:
    min_value: float
    max_value: Bounds
    K: float
    tol: float

    @property
    def holds(self) -> bool:
        """Certified: uses the lower end of the Max enclosure."""
        return self.min_value <= self.K * self.max_value.lower + self.tol

    @property
    def certainly_violated(self) -> bool:
        return self.min_value > self.K * self.max_value.upper + self.tol

    def to_dict(self) -> dict:
        return {
            "min": self.min_value,
            "max": self.max_value.to_dict(),
            "K": self.K,
            "holds": self.holds,
        }


def sandwich_constants_report(
    frame: FrameInstance,
    a,
    K: float | None = None,
    max_oracle: MaxNormOracle | None = None,
    tol: float = 1e-8,
) -> SandwichReport:
    """Check ``||a||_Min <= K ||a||_Max``."""
    if K is None:
        K = projection_constant(frame).upper
    if max_oracle is None:
        max_oracle = MaxNormOracle(frame)
    mn = MinNormOracle(frame, Side.VECTORS)(a)
    mx = max_oracle(a)
    return SandwichReport(mn, mx, K, tol * max(1.0, mn))

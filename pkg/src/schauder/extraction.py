"""Subsequence extraction: gap indices, greedy basic selection and the unconditional recursion.

Blocks are coefficient vectors over a frame (consecutive, disjoint
supports); the block vectors are their syntheses ``u_j = sum_i c_i x_i``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from . import _mesh
from .associated import (
    FiniteSequence,
    basis_constant,
    sequence_unconditional_constant,
    synthesis_apply,
)
from .frames import FrameInstance, SignMode, projection_constant, unconditional_constant
from .norms import (
    Bounds,
    DimensionError,
    Method,
    RestrictedNormSolver,
    lp_norm,
    orthonormal_basis,
    two_to_p_bound,
)

__all__ = [
    "Status",
    "GapReport",
    "gap_index",
    "schedule",
    "schedule_is_valid",
    "ExtractionReport",
    "extract_basic",
    "extract_unconditional",
    "random_blocks",
    "block_supports",
    "WitnessReport",
    "witness_check_c0",
    "witness_check_l1",
]

GAP_MESH_BUDGET = 4000


class Status(str, enum.Enum):
    FOUND = "FOUND"
    NOT_FOUND = "NOT_FOUND"
    INCONCLUSIVE = "INCONCLUSIVE"
    SUCCESS = "SUCCESS"
    PARTIAL = "PARTIAL"
    FAILED = "FAILED"


def block_supports(frame: FrameInstance, blocks) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Pad blocks to length N and check they are nonzero, consecutive and disjoint."""
    rows = []
    for y in blocks:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if y.ndim != 1 or y.shape[0] > frame.N:
            raise DimensionError(f"blocks must have at most {frame.N} coefficients")
        rows.append(np.concatenate([y, np.zeros(frame.N - y.shape[0])]))
    if not rows:
        raise ValueError("no blocks given")
    Y = np.array(rows)
    supports = []
    prev = 0
    for j, y in enumerate(Y, start=1):
        nz = np.flatnonzero(y)
        if nz.size == 0:
            raise ValueError(f"block {j} is zero")
        lo, hi = int(nz[0]) + 1, int(nz[-1]) + 1
        if lo <= prev:
            raise ValueError(f"block {j} overlaps or precedes block {j - 1}")
        supports.append((lo, hi))
        prev = hi
    return Y, supports


def random_blocks(frame: FrameInstance, M: int, seed: int = 0) -> np.ndarray:
    """``M`` consecutive blocks tiling ``1..N`` with Gaussian coefficients, normalised so ``||u_j|| = 1``."""
    N = frame.N
    if not 1 <= M <= N:
        raise ValueError(f"need 1 <= M <= {N}")
    rng = np.random.default_rng(seed)
    cuts = np.sort(rng.choice(np.arange(1, N), size=M - 1, replace=False)) if M > 1 else np.array([], int)
    edges = np.concatenate([[0], cuts, [N]])
    Y = np.zeros((M, N))
    for j in range(M):
        lo, hi = edges[j], edges[j + 1]
        for _ in range(100):
            c = rng.standard_normal(hi - lo)
            u = c @ frame.vectors[lo:hi]
            s = float(lp_norm(u, frame.p))
            if s > 1e-6:
                break
        else:
            raise ValueError(f"could not draw a nonzero block on {lo + 1}..{hi}")
        Y[j, lo:hi] = c / s
    return Y


# gap index ---------------------------------------------------------------


@dataclass(frozen=True)
class GapReport:
    status: Status
    N: int | None
    beta: Bounds
    threshold: float
    K: float
    eps: float
    trail: tuple[tuple[int, Bounds], ...]
    mesh_radius: float = 0.0
    minimal: bool = True

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "N": self.N,
            "beta": self.beta.to_dict(),
            "threshold": self.threshold,
            "K": self.K,
            "eps": self.eps,
            "mesh_radius": self.mesh_radius,
            "minimal": self.minimal,
            "trail": [{"N": n, "beta": b.to_dict()} for n, b in self.trail],
        }


def _beta_hilbert(Q: np.ndarray, tail: np.ndarray) -> Bounds:
    T = orthonormal_basis(tail) if tail.size else np.zeros((Q.shape[0], 0))
    R = Q - T @ (T.T @ Q)
    s = np.linalg.svd(R, compute_uv=False)
    v = float(s[-1])
    slack = 64 * np.finfo(float).eps * max(Q.shape)
    return Bounds(max(v - slack, 0.0), min(v + slack, 1.0), 0.0, Method.EIGEN)


def _beta_mesh(frame: FrameInstance, Q: np.ndarray, tail: np.ndarray, budget: int) -> tuple[Bounds, float]:
    """``inf_{y in S_Y} dist(y, span(tail))`` from a cube-surface grid with a covering certificate."""
    space = frame.space
    k = Q.shape[1]
    grid, rho = _mesh.half_cube_surface(k, _mesh.spacing_for_budget(k, budget))
    U = grid @ Q.T
    un = lp_norm(U, space.p, axis=1)
    L = two_to_p_bound(Q, space.p)
    m = float(un.min()) - L * rho
    # dist(y, T) = ||y|_{T-annihilator}|| measured in the dual space
    if tail.size:
        A = scipy.linalg.null_space(tail)
    else:
        A = np.eye(space.dim)
    if A.shape[1] == 0:
        return Bounds(0.0, 0.0, rho, Method.MESH), rho
    solver = RestrictedNormSolver(space.dual(), A.T)
    lo, hi = math.inf, math.inf
    for u, s in zip(U, un):
        b = solver(u / s)
        lo, hi = min(lo, b.lower), min(hi, b.upper)
    if rho > 0:
        lo = lo - 2 * L * rho / m if m > 0 else 0.0
    return Bounds(max(lo, 0.0), hi, rho, Method.MESH), rho


def _basis_columns(Y) -> np.ndarray:
    if isinstance(Y, FiniteSequence):
        Y = Y.vectors
    Q = orthonormal_basis(np.atleast_2d(np.asarray(Y, dtype=float)))
    if Q.shape[1] == 0:
        raise ValueError("Y is degenerate (spans only zero)")
    return Q


def gap_index(
    frame: FrameInstance,
    Y,
    eps: float,
    n_max: int | None = None,
    K: float | None = None,
    mesh_budget: int = GAP_MESH_BUDGET,
) -> GapReport:
    """Smallest ``N <= n_max`` with ``beta(N) >= 1/(K + eps)``.

    ``beta(N) = inf {||y + x|| : y in span(Y), ||y|| = 1, x in span(x_i : N <= i <= frame.N)}``
    equals the distance from the unit sphere of ``span(Y)`` to the tail
    span.  For p = 2 it is a smallest singular value; otherwise a mesh of
    the sphere with one distance LP per point, whose lower end is reduced
    by the covering radius times the Lipschitz constant.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n_max = frame.N if n_max is None else int(n_max)
    if not 1 <= n_max <= frame.N:
        raise IndexError(f"n_max must lie in [1, {frame.N}]")
    if K is None:
        K = projection_constant(frame).upper
    Q = _basis_columns(Y)
    # express the columns in the frame's norm so that ||y|| = 1 means the lp norm
    thr = 1.0 / (K + eps)
    trail = []
    rho = 0.0
    straddled = False
    for N in range(1, n_max + 1):
        tail = frame.vectors[N - 1 :]
        if frame.p == 2.0:
            b = _beta_hilbert(Q, tail)
        else:
            b, rho = _beta_mesh(frame, Q, tail, mesh_budget)
        trail.append((N, b))
        if b.lower >= thr:
            return GapReport(Status.FOUND, N, b, thr, K, eps, tuple(trail), rho, not straddled)
        if b.upper >= thr:
            straddled = True
    best = max((b for _, b in trail), key=lambda b: b.upper)
    status = Status.INCONCLUSIVE if straddled else Status.NOT_FOUND
    return GapReport(status, None, best, thr, K, eps, tuple(trail), rho, True)


# schedule ----------------------------------------------------------------


def schedule(eps: float, K_u: float, length: int) -> list[float]:
    """``delta_i = eps / (8 K_u^2 2^i)`` for ``i = 1..length``."""
    base = eps / (8.0 * K_u * K_u)
    return [math.ldexp(base, -i) for i in range(1, length + 1)]


def schedule_is_valid(deltas, eps: float, K_u: float) -> bool:
    """Exact rational check of ``sum_{j>i} delta_j < delta_i`` and ``sum delta_i < eps/(8 K_u^2)``.

    The geometric choice meets the first condition with equality only in
    the infinite limit, so every finite schedule is strictly valid.
    """
    d = [Fraction(x) for x in deltas]
    if any(x <= 0 for x in d):
        return False
    for i in range(len(d)):
        if sum(d[i + 1 :], Fraction(0)) >= d[i]:
            return False
    # the cap is compared with the rational value of the float it was computed from
    cap = Fraction(eps) / (8 * Fraction(K_u) ** 2)
    return sum(d, Fraction(0)) < cap


# reports -----------------------------------------------------------------


@dataclass
class ExtractionReport:
    mode: str
    input_blocks: int
    selected: list[int]
    achieved: Bounds | None
    target: float
    constant: float
    eps: float
    status: Status
    reason: str
    steps: list[dict] = field(default_factory=list)
    deltas: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "input_blocks": self.input_blocks,
            "selected": list(self.selected),
            "achieved": None if self.achieved is None else self.achieved.to_dict(),
            "target": self.target,
            "constant": self.constant,
            "eps": self.eps,
            "status": self.status.value,
            "reason": self.reason,
            "deltas": list(self.deltas),
            "steps": self.steps,
        }


def _status(count: int, verified: bool, stalled: bool) -> Status:
    if count < 2 or not verified:
        return Status.FAILED
    return Status.PARTIAL if stalled else Status.SUCCESS


def extract_basic(
    frame: FrameInstance, blocks, eps: float, K: float | None = None, tol: float = 1e-6
) -> ExtractionReport:
    """Greedy basic subsequence with basis constant at most ``K + eps``.

    Each step asks :func:`gap_index` for a tail start ``N`` beyond which no
    vector can pull the span of the blocks chosen so far below
    ``1/(K + eps)``, then admits the next block whose support starts at or
    after ``N``.  The loop ends when no block is left (``exhausted``), when
    the gap lies past every remaining block (``truncation``) or when no gap
    index exists (``stall``).  The basis constant of the selection is then
    recomputed independently.
    """
    Y, supports = block_supports(frame, blocks)
    W = Y @ frame.vectors
    norms = lp_norm(W, frame.p, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValueError("blocks must be normalised (||u_j|| = 1)")
    if K is None:
        K = projection_constant(frame).upper
    M = len(Y)
    selected = [0]
    steps = [{"step": 1, "admitted": 1, "support": list(supports[0])}]
    reason = "exhausted"
    while True:
        last = selected[-1]
        if last == M - 1:
            reason = "exhausted"
            break
        gap = gap_index(frame, W[selected], eps, K=K)
        step = {"step": len(selected) + 1, "gap": gap.to_dict()}
        if gap.status is not Status.FOUND:
            step["admitted"] = None
            steps.append(step)
            reason = "stall"
            break
        nxt = next((j for j in range(last + 1, M) if supports[j][0] >= gap.N), None)
        step["skipped"] = [j + 1 for j in range(last + 1, M) if nxt is None or j < nxt]
        if nxt is None:
            step["admitted"] = None
            steps.append(step)
            reason = "truncation"
            break
        step["admitted"] = nxt + 1
        step["support"] = list(supports[nxt])
        steps.append(step)
        selected.append(nxt)

    target = K + eps
    achieved = None
    verified = False
    if len(selected) >= 2:
        achieved = basis_constant(FiniteSequence(frame.space, W[selected]))
        verified = achieved.upper <= target + tol
    status = _status(len(selected), verified, reason == "stall")
    return ExtractionReport(
        "basic", M, [j + 1 for j in selected], achieved, target, K, eps, status, reason, steps
    )


def _e2_profile(frame: FrameInstance, coeff_rows: np.ndarray) -> np.ndarray:
    """``E[k] = max over rows c and N >= k of ||sum_{s=k}^N c_s x_s||`` for ``k = 1..N+1``."""
    Nf = frame.N
    X = frame.vectors
    E = np.zeros(Nf + 2)
    for c in coeff_rows:
        terms = c[:, None] * X
        # suffix-anchored partial sums: S[k..N] = C[N] - C[k-1]
        C = np.vstack([np.zeros(frame.dim), np.cumsum(terms, axis=0)])
        for k in range(1, Nf + 1):
            v = lp_norm(C[k:] - C[k - 1], frame.p, axis=1).max()
            E[k] = max(E[k], float(v))
    return E[1:]


def extract_unconditional(
    frame: FrameInstance,
    blocks,
    eps: float,
    K_u: float | None = None,
    tol: float = 1e-6,
    max_steps: int = 20,
) -> ExtractionReport:
    """Subsequence that is ``K_u + eps`` unconditional, chosen by the ``(E1)/(E2)`` recursion.

    The frame is first rescaled to unit vectors (block vectors are
    unchanged).  With ``k_0 = 1`` and ``delta_i = eps/(8 K_u^2 2^i)``:

    * ``n_i`` is the first later block with ``|f_s(u)| < delta_i / k_{i-1}``
      for all ``s <= k_{i-1}`` (E1);
    * ``k_i`` is the smallest index after ``k_{i-1}`` such that the tail
      sums ``sum_{s=k_i}^N f_s(v) x_s`` stay below ``delta_{i+1}`` for every
      ``N`` and every sign combination ``v`` of the chosen blocks (E2).  The
      expression is convex in the coefficients, so sign vertices suffice.

    The recursion ends when no block is left (``exhausted``), when every
    remaining block starts before ``k_i`` (``truncation``) or when no
    remaining block passes (E1) (``stall``).  The unconditional constant
    of the selection is then recomputed by sign enumeration.
    """
    Y, supports = block_supports(frame, blocks)
    W = Y @ frame.vectors
    if np.any(np.abs(lp_norm(W, frame.p, axis=1) - 1.0) > 1e-9):
        raise ValueError("blocks must be normalised (||u_j|| = 1)")
    if K_u is None:
        K_u = unconditional_constant(frame, SignMode.EXACT_SIGNS).upper
    nf = frame.normalized()
    F = nf.functionals
    M = len(Y)
    deltas = schedule(eps, K_u, min(M, max_steps) + 1)
    coeffs = W @ F.T  # f_s(u_j) in the rescaled frame, rows indexed by j
    selected: list[int] = []
    k_prev = 1
    steps = []
    reason = "exhausted"
    while True:
        i = len(selected) + 1
        start = selected[-1] + 1 if selected else 0
        if start >= M:
            reason = "exhausted"
            break
        if i > max_steps:
            reason = "step_limit"
            break
        delta_i = deltas[i - 1]
        bound = delta_i / k_prev
        cand = None
        rejected = []
        for j in range(start, M):
            e1 = float(np.abs(coeffs[j, :k_prev]).max())
            if e1 < bound:
                cand = (j, e1)
                break
            rejected.append({"block": j + 1, "e1": e1})
        if cand is None:
            reason = "truncation" if all(supports[j][0] <= k_prev for j in range(start, M)) else "stall"
            steps.append({"i": i, "k_prev": k_prev, "delta": delta_i, "rejected": rejected})
            break
        j, e1 = cand
        selected.append(j)
        signs = np.array([(1.0,) + s for s in itertools.product((1.0, -1.0), repeat=i - 1)])
        rows = signs @ coeffs[selected]
        E = _e2_profile(nf, rows)  # E[k-1] for k = 1..N, plus the empty tail at N+1
        delta_next = deltas[i]
        k_i = next((k for k in range(k_prev + 1, nf.N + 2) if E[k - 1] < delta_next), nf.N + 1)
        steps.append(
            {
                "i": i,
                "n_i": j + 1,
                "k_prev": k_prev,
                "delta": delta_i,
                "e1_max": e1,
                "e1_bound": bound,
                "e1_margin": bound - e1,
                "k_i": k_i,
                "e2_max": float(E[k_i - 1]),
                "e2_bound": delta_next,
                "e2_margin": delta_next - float(E[k_i - 1]),
                "e2_vertices": int(len(signs)),
                "rejected": rejected,
            }
        )
        k_prev = k_i

    target = K_u + eps
    achieved = None
    verified = False
    if len(selected) >= 2:
        achieved = sequence_unconditional_constant(FiniteSequence(frame.space, W[selected]))
        verified = achieved.upper <= target + tol
    status = _status(len(selected), verified, reason in ("stall", "step_limit"))
    return ExtractionReport(
        "unconditional",
        M,
        [j + 1 for j in selected],
        achieved,
        target,
        K_u,
        eps,
        status,
        reason,
        steps,
        deltas[: len(selected) + 1],
    )


# witness inequalities ----------------------------------------------------


@dataclass(frozen=True)
class WitnessReport:
    kind: str
    samples: int
    lower_constant: float
    upper_constant: float | None
    lower_violations: int
    upper_violations: int
    min_lower_margin: float
    min_upper_margin: float | None
    stronger_lower_held: bool | None = None
    notes: tuple[str, ...] = ()

    @property
    def holds(self) -> bool:
        return self.lower_violations == 0 and self.upper_violations == 0

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["notes"] = list(self.notes)
        d["holds"] = self.holds
        return d


def _lambdas(M: int, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lam = rng.uniform(-1.0, 1.0, size=(samples, M))
    return np.vstack([np.zeros(M), lam])


def witness_check_c0(
    frame: FrameInstance,
    blocks,
    delta: float,
    C: float | None = None,
    K_u: float | None = None,
    samples: int = 100,
    seed: int = 0,
    check_upper: bool = True,
    tol: float = 1e-9,
) -> WitnessReport:
    """``(delta/2C) max|lambda_j| <= ||sum lambda_j u_j|| <= K_u max|lambda_j|`` on sampled ``lambda``.

    ``C`` defaults to the basis constant of the block vectors and ``K_u`` to
    the frame's unconditional constant.  The upper inequality applies only
    to blocks whose coefficient pattern comes from one unit vector; the
    caller vouches for that via ``check_upper``.
    """
    Y, _ = block_supports(frame, blocks)
    U = Y @ frame.vectors
    norms = lp_norm(U, frame.p, axis=1)
    bad = np.flatnonzero(norms < delta - tol)
    if bad.size:
        raise ValueError(f"||u_j|| >= delta fails for blocks {(bad + 1).tolist()}")
    if C is None:
        C = basis_constant(FiniteSequence(frame.space, U)).upper if len(U) > 1 else 1.0
    if check_upper and K_u is None:
        K_u = unconditional_constant(frame, SignMode.EXACT_SIGNS).upper
    lam = _lambdas(len(U), samples, seed)
    vals = lp_norm(lam @ U, frame.p, axis=1)
    mx = np.abs(lam).max(axis=1)
    lower_c = delta / (2 * C)
    lo_margin = vals - lower_c * mx + tol
    lo_viol = int((lo_margin < 0).sum())
    up_viol, up_margin = 0, None
    if check_upper:
        m = K_u * mx + tol - vals
        up_viol, up_margin = int((m < 0).sum()), float(m.min())
    return WitnessReport(
        "c0",
        len(lam),
        lower_c,
        K_u if check_upper else None,
        lo_viol,
        up_viol,
        float(lo_margin.min()),
        up_margin,
    )


def witness_check_l1(
    frame: FrameInstance,
    blocks,
    f,
    delta: float,
    K_u: float | None = None,
    samples: int = 100,
    seed: int = 0,
    tol: float = 1e-9,
) -> WitnessReport:
    """``||sum lambda_i u_i|| >= (delta/2K_u) sum|lambda_i|`` on sampled ``lambda``.

    Requires ``||f|| = 1`` and ``f(u_n) >= delta`` for every block.  Whether
    the sharper constant ``delta/K_u`` also held on the samples is recorded,
    and so is the measured unconditional constant of the blocks against
    the assumed ``2 K_u``.
    """
    Y, _ = block_supports(frame, blocks)
    U = Y @ frame.vectors
    f = frame.space.check(f)
    fn = float(lp_norm(f, frame.space.q))
    if abs(fn - 1.0) > 1e-9:
        raise ValueError(f"f must have norm 1, got {fn}")
    fu = U @ f
    bad = np.flatnonzero(fu < delta - tol)
    if bad.size:
        detail = ", ".join(f"f(u_{j + 1})={fu[j]:.6g}" for j in bad)
        raise ValueError(f"f(u_n) >= delta fails: {detail}")
    if K_u is None:
        K_u = unconditional_constant(frame, SignMode.EXACT_SIGNS).upper
    notes = []
    if len(U) > 1:
        ku_blocks = sequence_unconditional_constant(FiniteSequence(frame.space, U))
        notes.append(
            f"block unconditional constant {ku_blocks.upper:.6g} "
            f"{'<=' if ku_blocks.upper <= 2 * K_u + tol else '>'} 2K_u = {2 * K_u:.6g}"
        )
    lam = _lambdas(len(U), samples, seed)
    vals = lp_norm(lam @ U, frame.p, axis=1)
    s1 = np.abs(lam).sum(axis=1)
    lower_c = delta / (2 * K_u)
    margin = vals - lower_c * s1 + tol
    stronger = bool(np.all(vals - (delta / K_u) * s1 + tol >= 0))
    return WitnessReport(
        "l1",
        len(lam),
        lower_c,
        None,
        int((margin < 0).sum()),
        0,
        float(margin.min()),
        None,
        stronger,
        tuple(notes),
    )

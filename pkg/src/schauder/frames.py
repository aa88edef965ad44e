"""Frame data model and global frame constants."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .norms import (
    EPS,
    Bounds,
    DimensionError,
    Method,
    PNormSpace,
    dual_norm,
    lp_norm,
    norm,
    operator_norm,
    restricted_functional_norm,
)

__all__ = [
    "FrameInstance",
    "SignMode",
    "reconstruction_residual",
    "partial_sum",
    "interval_projection",
    "intervals",
    "projection_constant",
    "unconditional_constant",
    "hilbert_frame_bounds",
    "dual_inequality_report",
    "DualInequalityReport",
    "EXACT_SIGN_LIMIT",
]

EXACT_SIGN_LIMIT = 22


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FrameInstance:
    """Ordered pairs ``(x_i, f_i)``, stored as the rows of two ``N x d`` arrays.

    ``reconstruction_span`` lists vectors (rows) on which exact reconstruction
    is demanded; ``None`` means the whole space.
    """

    space: PNormSpace
    vectors: np.ndarray
    functionals: np.ndarray
    name: str = "frame"
    provenance: str = ""
    reconstruction_span: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        X = _frozen(self.vectors)
        F = _frozen(self.functionals)
        d = self.space.dim
        if X.ndim != 2 or X.shape[1] != d:
            raise DimensionError(f"vectors must be an N x {d} array, got {X.shape}")
        if F.shape != X.shape:
            raise DimensionError(f"functionals shape {F.shape} != vectors shape {X.shape}")
        if X.shape[0] == 0:
            raise ValueError("a frame needs at least one pair")
        zero_x = np.flatnonzero(~X.any(axis=1))
        zero_f = np.flatnonzero(~F.any(axis=1))
        if zero_x.size or zero_f.size:
            raise ValueError(
                f"frame elements must be nonzero (zero x at {(zero_x + 1).tolist()}, "
                f"zero f at {(zero_f + 1).tolist()})"
            )
        object.__setattr__(self, "vectors", X)
        object.__setattr__(self, "functionals", F)
        if self.reconstruction_span is not None:
            R = _frozen(np.atleast_2d(self.reconstruction_span))
            if R.shape[1] != d:
                raise DimensionError("reconstruction_span vectors have the wrong length")
            object.__setattr__(self, "reconstruction_span", R)

    @property
    def N(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def p(self) -> float:
        return self.space.p

    def span_sample(self) -> np.ndarray:
        if self.reconstruction_span is None:
            return np.eye(self.dim)
        return np.array(self.reconstruction_span)

    def normalized(self) -> "FrameInstance":
        """Rescale to ``||x_i|| = 1``; each rank-one term ``x_i f_i^T`` is unchanged."""
        s = lp_norm(self.vectors, self.p, axis=1)
        return FrameInstance(
            self.space,
            self.vectors / s[:, None],
            self.functionals * s[:, None],
            name=self.name,
            provenance=self.provenance,
            reconstruction_span=self.reconstruction_span,
            metadata=dict(self.metadata),
        )

    def __repr__(self):
        return f"FrameInstance({self.name!r}, N={self.N}, dim={self.dim}, p={self.p})"


def _check_interval(frame: FrameInstance, m: int, n: int) -> None:
    if not (1 <= m <= n <= frame.N):
        raise IndexError(f"need 1 <= m <= n <= {frame.N}, got m={m}, n={n}")


def intervals(N: int):
    """All ``(m, n)`` with ``1 <= m <= n <= N`` in lexicographic order."""
    for m in range(1, N + 1):
        for n in range(m, N + 1):
            yield m, n


def partial_sum(frame: FrameInstance, x, m: int, n: int) -> np.ndarray:
    """``sum_{i=m}^n f_i(x) x_i``."""
    x = frame.space.check(x)
    _check_interval(frame, m, n)
    coeffs = frame.functionals[m - 1 : n] @ x
    return coeffs @ frame.vectors[m - 1 : n]


def reconstruction_residual(frame: FrameInstance, x) -> float:
    x = frame.space.check(x)
    return norm(frame.space, partial_sum(frame, x, 1, frame.N) - x)


def interval_projection(frame: FrameInstance, m: int, n: int) -> np.ndarray:
    """The matrix of ``P_{m,n} = sum_{i=m}^n x_i f_i^T``."""
    _check_interval(frame, m, n)
    return frame.vectors[m - 1 : n].T @ frame.functionals[m - 1 : n]


def _merge_max(results):
    """Reduce ``(key, Bounds)`` pairs by max with the smallest key winning ties."""
    lower = -math.inf
    upper = -math.inf
    best_key = None
    method = Method.EXACT
    tol = 0.0
    for key, b in results:
        if b.lower > lower:
            lower = b.lower
            best_key = key
        upper = max(upper, b.upper)
        tol = max(tol, b.tol)
        if b.method != Method.EXACT:
            method = b.method
    return Bounds(lower, upper, tol, method, best_key)


def projection_constant(frame: FrameInstance) -> Bounds:
    """``K = max_{m<=n} ||P_{m,n}||``; the witness is the maximising ``(m, n)``."""
    X, F = frame.vectors, frame.functionals
    if frame.space.polyhedral:
        # all interval projections at once from prefix sums of rank-one terms
        terms = np.einsum("ia,ib->iab", X, F)
        prefix = np.concatenate([np.zeros((1,) + terms.shape[1:]), np.cumsum(terms, axis=0)])
        axis = 1 if frame.p == 1.0 else 2  # column sums for p=1, row sums for p=inf
        best, key = -1.0, None
        for m in range(1, frame.N + 1):
            P = prefix[m:] - prefix[m - 1]
            vals = np.abs(P).sum(axis=axis).max(axis=1)
            j = int(np.argmax(vals))
            if vals[j] > best + 0.0:
                best, key = float(vals[j]), (m, m + j)
        return Bounds.exact(best, key)
    return _merge_max(
        ((m, n), operator_norm(frame.space, interval_projection(frame, m, n)))
        for m, n in intervals(frame.N)
    )


class SignMode(str, enum.Enum):
    EXACT_SIGNS = "EXACT_SIGNS"
    RANDOMIZED = "RANDOMIZED"


def _sign_patterns(N: int, chunk: int = 4096):
    """All sign vectors with sigma_1 = +1 (sigma and -sigma give the same norm)."""
    total = 1 << (N - 1)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (idx[:, None] >> np.arange(N - 1)) & 1
        signs = np.ones((idx.size, N))
        signs[:, 1:] = 1.0 - 2.0 * bits
        yield signs


def _signed_norms(frame: FrameInstance, signs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper operator-norm values for each row of ``signs``."""
    P = np.einsum("si,ia,ib->sab", signs, frame.vectors, frame.functionals)
    if frame.p == 1.0:
        v = np.abs(P).sum(axis=1).max(axis=1)
        return v, v
    if math.isinf(frame.p):
        v = np.abs(P).sum(axis=2).max(axis=1)
        return v, v
    if frame.p == 2.0:
        v = np.linalg.norm(P, ord=2, axis=(1, 2))
        fro = np.linalg.norm(P, axis=(1, 2))
        slack = 64 * EPS * fro * frame.dim
        return np.maximum(v - slack, 0.0), v + slack
    lo = np.empty(len(P))
    hi = np.empty(len(P))
    for k, A in enumerate(P):
        b = operator_norm(frame.space, A)
        lo[k], hi[k] = b.lower, b.upper
    return lo, hi


def unconditional_constant(
    frame: FrameInstance,
    mode: SignMode | str = SignMode.EXACT_SIGNS,
    seed: int = 0,
    trials: int = 2000,
) -> Bounds:
    """``K_u = max_sigma ||sum sigma_i x_i f_i^T||``.

    ``EXACT_SIGNS`` enumerates all patterns (N <= 22).  ``RANDOMIZED`` only
    yields a lower bound: no finite upper bound in terms of ``K`` is
    available, so ``upper`` is ``inf``.  The witness is the maximising sign
    vector.
    """
    mode = SignMode(mode)
    N = frame.N
    if mode is SignMode.EXACT_SIGNS:
        if N > EXACT_SIGN_LIMIT:
            raise ValueError(f"EXACT_SIGNS needs N <= {EXACT_SIGN_LIMIT}, got N={N}")
        lower, upper, best = -1.0, -1.0, None
        chunk = max(1, min(4096, (1 << 22) // (frame.dim * frame.dim)))
        for signs in _sign_patterns(N, chunk):
            lo, hi = _signed_norms(frame, signs)
            j = int(np.argmax(lo))
            if lo[j] > lower:
                lower, best = float(lo[j]), tuple(int(s) for s in signs[j])
            upper = max(upper, float(hi.max()))
        return Bounds(lower, upper, 0.0, Method.SIGN_ENUM, best)

    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=(trials, N))
    signs[:, 0] = 1.0
    signs = np.vstack([np.ones((1, N)), signs])
    lo, _ = _signed_norms(frame, signs)
    j = int(np.argmax(lo))
    return Bounds(float(lo[j]), math.inf, 0.0, Method.SIGN_ENUM, tuple(int(s) for s in signs[j]))


def hilbert_frame_bounds(frame: FrameInstance) -> tuple[float, float]:
    """Extreme eigenvalues of the frame operator ``S = sum x_i x_i^T``."""
    if frame.p != 2.0:
        raise ValueError("Hilbert frame bounds are only defined for p = 2")
    S = frame.vectors.T @ frame.vectors
    lam = np.linalg.eigvalsh(S)
    return float(lam[0]), float(lam[-1])


@dataclass(frozen=True)
class DualInequalityReport:
    m: int
    n: int
    lhs: float
    rhs1: float
    rhs2: float
    K: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs1 + self.tol and self.lhs <= self.rhs2 + self.tol

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "lhs": self.lhs,
            "rhs1": self.rhs1,
            "rhs2": self.rhs2,
            "K": self.K,
            "holds": self.holds,
        }


def dual_inequality_report(
    frame: FrameInstance, f, m: int, n: int, K: float | None = None, tol: float = 1e-8
) -> DualInequalityReport:
    """Compare ``||sum_{i=m}^n f(x_i) f_i||`` with ``K||f||`` and ``K||f|span(x_i:i>=m)||``.

    ``tol`` is relative to the size of the right-hand side.
    """
    f = frame.space.check(f)
    _check_interval(frame, m, n)
    if K is None:
        K = projection_constant(frame).upper
    g = (frame.vectors[m - 1 : n] @ f) @ frame.functionals[m - 1 : n]
    lhs = dual_norm(frame.space, g)
    rhs1 = K * dual_norm(frame.space, f)
    rhs2 = K * restricted_functional_norm(frame.space, f, frame.vectors[m - 1 :]).upper
    scale = max(1.0, rhs1)
    return DualInequalityReport(m, n, lhs, rhs1, rhs2, K, tol * scale)

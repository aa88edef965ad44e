"""Norm, dual-norm and operator-norm oracles over finite-dimensional lp spaces.

Every iterative or optimisation-based routine returns a :class:`Bounds`
enclosure instead of a bare float, so callers can tell a certified value
from a best-effort one.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "Method",
    "Bounds",
    "PNormSpace",
    "LinearConstraintSet",
    "SupportFunctionSolver",
    "DimensionError",
    "UnboundedError",
    "parse_p",
    "format_p",
    "lp_norm",
    "norm",
    "dual_norm",
    "two_to_p_bound",
    "operator_norm",
    "restricted_functional_norm",
    "RestrictedNormSolver",
    "linear_max_over_convex",
    "orthonormal_basis",
]

EPS = np.finfo(float).eps


class DimensionError(ValueError):
    """Raised when array shapes do not match the ambient space."""


class UnboundedError(ValueError):
    """Raised when a constraint body has a nontrivial recession direction."""


class Method(str, enum.Enum):
    EXACT = "EXACT"
    LP = "LP"
    EIGEN = "EIGEN"
    CONIC = "CONIC"
    MESH = "MESH"
    SIGN_ENUM = "SIGN_ENUM"


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (tuple, list, np.ndarray)):
        return tuple(_plain(w) for w in v)
    return v


@dataclass(frozen=True)
class Bounds:
    """Certified enclosure ``lower <= value <= upper``.

    ``tol`` is the accuracy that was requested from the solver; ``converged``
    tells whether the enclosure is actually that tight.
    """

    lower: float
    upper: float
    tol: float = 0.0
    method: Method = Method.EXACT
    witness: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))
        if self.witness is not None:
            object.__setattr__(self, "witness", tuple(_plain(w) for w in self.witness))
        if self.lower > self.upper:
            # rounding can flip a zero-width enclosure
            if self.lower - self.upper <= 64 * EPS * max(1.0, abs(self.upper)):
                object.__setattr__(self, "upper", self.lower)
            else:
                raise ValueError(f"lower {self.lower} > upper {self.upper}")

    @classmethod
    def exact(cls, value: float, witness=None) -> "Bounds":
        value = float(value)
        return cls(value, value, 0.0, Method.EXACT, witness)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        if math.isinf(self.upper):
            return self.lower
        return 0.5 * (self.lower + self.upper)

    @property
    def converged(self) -> bool:
        scale = max(1.0, abs(self.upper)) if math.isfinite(self.upper) else math.inf
        return self.gap <= max(self.tol, 64 * EPS) * scale

    def scaled(self, c: float) -> "Bounds":
        if c < 0:
            raise ValueError("scale must be nonnegative")
        return Bounds(self.lower * c, self.upper * c, self.tol, self.method, self.witness)

    def to_dict(self) -> dict:
        return {
            "lower": float(self.lower),
            "upper": float(self.upper) if math.isfinite(self.upper) else "inf",
            "method": self.method.value,
        }


def parse_p(p) -> float:
    """Accept 1, 2, ``"inf"``, ``math.inf`` or any real > 1."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return math.inf
        p = float(s)
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"norm exponent must be >= 1, got {p}")
    return p


def format_p(p: float) -> str:
    if math.isinf(p):
        return "inf"
    if p == int(p):
        return str(int(p))
    return repr(p)


def _dual_exponent(p: float) -> float:
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class PNormSpace:
    """The space R^dim with the lp norm."""

    dim: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", parse_p(self.p))

    @property
    def q(self) -> float:
        return _dual_exponent(self.p)

    @property
    def polyhedral(self) -> bool:
        return self.p == 1.0 or math.isinf(self.p)

    def dual(self) -> "PNormSpace":
        return PNormSpace(self.dim, self.q)

    def check(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.shape[0] != self.dim:
            raise DimensionError(f"expected a vector of length {self.dim}, got shape {v.shape}")
        return v


def lp_norm(v, p: float, axis=-1):
    v = np.abs(np.asarray(v, dtype=float))
    if p == 1.0:
        return v.sum(axis=axis)
    if math.isinf(p):
        return v.max(axis=axis, initial=0.0)
    # scale by the largest entry so tiny or huge vectors neither underflow nor overflow
    scale = v.max(axis=axis, keepdims=True, initial=0.0)
    safe = np.where(scale > 0, scale, 1.0)
    out = np.squeeze(safe, axis=axis) * ((v / safe) ** p).sum(axis=axis) ** (1.0 / p)
    return np.where(np.squeeze(scale, axis=axis) > 0, out, 0.0)


def norm(space: PNormSpace, v) -> float:
    return float(lp_norm(space.check(v), space.p))


def dual_norm(space: PNormSpace, f) -> float:
    return float(lp_norm(space.check(f), space.q))


def two_to_p_bound(M: np.ndarray, p: float) -> float:
    """Upper bound for ||M||_{2->p} from row norms (|<r, a>| <= ||r||_2 ||a||_2)."""
    rows = np.sqrt((np.asarray(M, dtype=float) ** 2).sum(axis=1))
    return float(lp_norm(rows, p))


def _check_square(space: PNormSpace, A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape != (space.dim, space.dim):
        raise DimensionError(f"expected a {space.dim}x{space.dim} matrix, got {A.shape}")
    return A


def _spectral_norm(A: np.ndarray, tol: float) -> Bounds:
    """Largest singular value with a residual-based enclosure.

    The lower bound is ||A v|| for the computed unit top eigenvector v of
    A^T A, which is a valid lower bound whatever the eigensolver did.  The
    upper bound adds the eigen-residual and loss of orthogonality (Weyl).
    """
    M = A.T @ A
    scale = float(np.abs(M).max(initial=0.0))
    if scale == 0.0:
        return Bounds(0.0, 0.0, tol, Method.EIGEN)
    try:
        lam, V = scipy.linalg.eigh(M)
    except (np.linalg.LinAlgError, ValueError):
        fro = float(np.linalg.norm(A))
        col = float(np.sqrt((A * A).sum(axis=0)).max())
        return Bounds(col, fro, tol, Method.EIGEN)
    v = V[:, -1]
    lower = float(np.linalg.norm(A @ v) / np.linalg.norm(v))
    resid = float(np.linalg.norm(M @ V - V * lam))
    ortho = float(np.linalg.norm(V.T @ V - np.eye(len(lam))))
    slack = resid + abs(lam[-1]) * ortho + 8 * EPS * scale * len(lam)
    upper = math.sqrt(max(lam[-1], 0.0) + slack)
    return Bounds(lower, max(upper, lower), tol, Method.EIGEN)


def _general_operator_norm(A: np.ndarray, p: float, tol: float, seed: int = 0) -> Bounds:
    """Best effort for p not in {1, 2, inf}.

    Upper bound from Riesz-Thorin interpolation between the column- and
    row-sum norms; lower bound from a fixed-point (Boyd) iteration started
    at a few seeded points.
    """
    n1 = float(np.abs(A).sum(axis=0).max())
    ninf = float(np.abs(A).sum(axis=1).max())
    theta = 1.0 / p
    upper = n1**theta * ninf ** (1.0 - theta)
    q = _dual_exponent(p)
    rng = np.random.default_rng(seed)
    best = 0.0
    starts = [np.ones(A.shape[1])] + [rng.standard_normal(A.shape[1]) for _ in range(7)]
    for x in starts:
        x = x / lp_norm(x, p)
        for _ in range(200):
            y = A @ x
            ny = lp_norm(y, p)
            if ny == 0.0:
                break
            best = max(best, float(ny))
            # dual vector of y, pulled back and mapped to the primal sphere
            z = A.T @ (np.sign(y) * (np.abs(y) / ny) ** (p - 1.0))
            x_new = np.sign(z) * np.abs(z) ** (q - 1.0)
            nx = lp_norm(x_new, p)
            if nx == 0.0:
                break
            x_new = x_new / nx
            if np.allclose(x_new, x, rtol=0, atol=1e-13):
                break
            x = x_new
        best = max(best, float(lp_norm(A @ x, p)))
    return Bounds(min(best, upper), upper, tol, Method.MESH)


def operator_norm(space: PNormSpace, A, tol: float = 1e-12) -> Bounds:
    """Enclosure of ||A||_{p->p}."""
    A = _check_square(space, A)
    if space.p == 1.0:
        return Bounds.exact(np.abs(A).sum(axis=0).max(initial=0.0))
    if math.isinf(space.p):
        return Bounds.exact(np.abs(A).sum(axis=1).max(initial=0.0))
    if space.p == 2.0:
        return _spectral_norm(A, tol)
    return _general_operator_norm(A, space.p, tol)


def orthonormal_basis(V, rtol: float = 1e-10) -> np.ndarray:
    """Columns spanning the row space of ``V`` (rows are vectors)."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.size == 0:
        return np.zeros((V.shape[-1] if V.ndim == 2 else 0, 0))
    U, s, _ = np.linalg.svd(V.T, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((V.shape[1], 0))
    rank = int((s > rtol * s[0] * max(V.shape)).sum())
    return U[:, :rank]


class LinearConstraintSet:
    """The symmetric convex body ``{b : ||B_k b||_{p_k} <= 1 for every k}``.

    ``maps`` is a sequence of ``(B_k, p_k)`` pairs; every ``B_k`` has the
    same number of columns (the coefficient dimension).
    """

    def __init__(self, maps: Sequence[tuple[np.ndarray, float]]):
        if not maps:
            raise ValueError("need at least one constraint map")
        mats = []
        ps = []
        for B, p in maps:
            B = np.atleast_2d(np.asarray(B, dtype=float))
            mats.append(B)
            ps.append(parse_p(p))
        n = mats[0].shape[1]
        if any(B.shape[1] != n for B in mats):
            raise DimensionError("constraint maps disagree on the coefficient dimension")
        self.maps = tuple(mats)
        self.ps = tuple(ps)
        self.dim = n
        self._stack = np.vstack(mats)
        self._sigma_min = None

    def __len__(self):
        return len(self.maps)

    @property
    def polyhedral(self) -> bool:
        return all(p == 1.0 or math.isinf(p) for p in self.ps)

    def gauge(self, b) -> float:
        b = np.asarray(b, dtype=float)
        return max(float(lp_norm(B @ b, p)) for B, p in zip(self.maps, self.ps))

    def _stack_sigma_min(self) -> float:
        if self._sigma_min is None:
            s = np.linalg.svd(self._stack, compute_uv=False)
            smin = float(s[-1]) if s.size >= self.dim else 0.0
            if smin <= 1e-12 * max(float(s[0]) if s.size else 0.0, 1.0):
                smin = 0.0
            self._sigma_min = smin
        return self._sigma_min

    def check_bounded(self) -> None:
        if self._stack_sigma_min() == 0.0:
            raise UnboundedError("constraint maps have a nontrivial joint kernel")

    def radius2(self) -> float:
        """Upper bound on ||b||_2 over the body."""
        self.check_bounded()
        total = 0.0
        for B, p in zip(self.maps, self.ps):
            # ||v||_2 <= m^{max(0, 1/2 - 1/p)} ||v||_p in R^m
            expo = max(0.0, 0.5 - (0.0 if math.isinf(p) else 1.0 / p))
            total += float(B.shape[0]) ** (2 * expo)
        return math.sqrt(total) / self._stack_sigma_min()


class SupportFunctionSolver:
    """Evaluates ``sup {<a, b> : b in C}`` for a fixed body ``C``.

    The dual program ``min sum_k ||y_k||_{q_k}`` subject to
    ``sum_k B_k^T y_k = a`` is solved once per call (the parametrised
    problem is compiled once and reused).  Both ends of the returned
    enclosure are certified independently of solver accuracy:

    * lower: the primal maximiser read off the equality multipliers is
      rescaled onto the boundary of ``C``;
    * upper: the dual point is repaired to satisfy the equality exactly
      (minimum-norm correction), and the remaining float residual is
      charged against the radius of ``C``.

    Instances are not thread-safe; build one solver per thread.
    """

    def __init__(self, body: LinearConstraintSet):
        body.check_bounded()
        self.body = body
        self._problem = None

    def _build(self):
        import cvxpy as cp

        body = self.body
        self._a = cp.Parameter(body.dim)
        self._ys = [cp.Variable(B.shape[0]) for B in body.maps]
        q = [_dual_exponent(p) for p in body.ps]
        obj = 0
        lhs = 0
        for y, B, qk in zip(self._ys, body.maps, q):
            obj = obj + cp.norm(y, "inf" if math.isinf(qk) else qk)
            lhs = lhs + B.T @ y
        self._eq = lhs == self._a
        self._problem = cp.Problem(cp.Minimize(obj), [self._eq])

    def _solve(self, a: np.ndarray):
        import cvxpy as cp

        if self._problem is None:
            self._build()
        self._a.value = a
        try:
            with warnings.catch_warnings():
                # accuracy is certified in solve(); solver warnings add nothing
                warnings.simplefilter("ignore")
                if self.body.polyhedral:
                    self._problem.solve(solver=cp.SCIPY, scipy_options={"method": "highs"})
                else:
                    self._problem.solve(
                        solver=cp.CLARABEL,
                        tol_gap_abs=1e-11,
                        tol_gap_rel=1e-11,
                        tol_feas=1e-11,
                        max_iter=400,
                    )
        except cp.error.SolverError:
            return None, None
        if self._problem.status not in ("optimal", "optimal_inaccurate"):
            return None, None
        ys = [None if y.value is None else np.asarray(y.value, dtype=float) for y in self._ys]
        if any(y is None for y in ys):
            ys = None
        b = self._eq.dual_value
        b = None if b is None else np.asarray(b, dtype=float).reshape(-1)
        return ys, b

    def solve(self, a, tol: float = 1e-6) -> Bounds:
        body = self.body
        a = np.asarray(a, dtype=float)
        if a.shape != (body.dim,):
            raise DimensionError(f"expected {body.dim} coefficients, got shape {a.shape}")
        method = Method.LP if body.polyhedral else Method.CONIC
        if not np.any(a):
            return Bounds(0.0, 0.0, tol, method)

        R = body.radius2()
        ys, b = self._solve(a)

        lower = 0.0
        witness = None
        for cand in (b, a):
            if cand is None or not np.all(np.isfinite(cand)):
                continue
            g = body.gauge(cand)
            if g > 0:
                val = abs(float(a @ cand)) / g
                if val > lower:
                    lower = val
                    witness = tuple(np.sign(a @ cand) * cand / g)

        upper = float(np.linalg.norm(a)) * R
        if ys is not None:
            y = np.concatenate(ys)
            stackT = body._stack.T
            r = a - stackT @ y
            delta, *_ = np.linalg.lstsq(stackT, r, rcond=None)
            y = y + delta
            r = a - stackT @ y
            pieces = np.split(y, np.cumsum([B.shape[0] for B in body.maps])[:-1])
            cert = sum(float(lp_norm(yk, _dual_exponent(p))) for yk, p in zip(pieces, body.ps))
            cert += float(np.linalg.norm(r)) * R
            cert *= 1.0 + 16 * EPS * len(y)
            upper = min(upper, cert)
        upper = max(upper, lower)
        return Bounds(lower, upper, tol, method, witness)


def linear_max_over_convex(a, body: LinearConstraintSet, tol: float = 1e-6) -> Bounds:
    """``sup {<a, b> : b in body}`` as a certified enclosure."""
    return SupportFunctionSolver(body).solve(a, tol)


class RestrictedNormSolver:
    """Evaluates ``||f|_{span(V)}||`` for many functionals ``f`` against a fixed span."""

    def __init__(self, space: PNormSpace, V, tol: float = 1e-9):
        self.space = space
        self.tol = tol
        V = np.asarray(V, dtype=float)
        if V.size == 0:
            self.Q = np.zeros((space.dim, 0))
        else:
            V = np.atleast_2d(V)
            if V.shape[1] != space.dim:
                raise DimensionError(f"spanning vectors must have length {space.dim}")
            self.Q = orthonormal_basis(V)
        self._solver = None
        if self.Q.shape[1] > 1 and space.p != 2.0:
            self._solver = SupportFunctionSolver(LinearConstraintSet([(self.Q, space.p)]))

    def __call__(self, f) -> Bounds:
        f = self.space.check(f)
        Q = self.Q
        if Q.shape[1] == 0 or not np.any(f):
            return Bounds.exact(0.0)
        a = Q.T @ f
        if self.space.p == 2.0:
            return Bounds.exact(np.linalg.norm(a))
        if Q.shape[1] == 1:
            # one-dimensional span: |<f, q>| / ||q||
            return Bounds.exact(abs(float(a[0])) / float(lp_norm(Q[:, 0], self.space.p)))
        return self._solver.solve(a, self.tol)


def restricted_functional_norm(space: PNormSpace, f, V, tol: float = 1e-9) -> Bounds:
    """Norm of ``f`` restricted to ``span(V)``: sup |<f, x>| over the unit ball of the span."""
    return RestrictedNormSolver(space, V, tol)(f)

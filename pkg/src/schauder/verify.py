"""The inequality suite run by ``schauder verify``.

Every check draws its instances from one seeded generator, so a report is a
function of the frame and the seed.  A violated inequality is recorded with
the exact inputs that break it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .associated import (
    MaxNormOracle,
    MinNormOracle,
    Side,
    analysis_apply,
    block_sandwich_report,
    restrict,
    sandwich_constants_report,
    synthesis_apply,
)
from .extraction import random_blocks
from .frames import (
    FrameInstance,
    dual_inequality_report,
    projection_constant,
    reconstruction_residual,
)
from .norms import lp_norm

__all__ = ["CheckResult", "VerifyReport", "verify_frame"]


@dataclass
class CheckResult:
    name: str
    instances: int = 0
    violations: int = 0
    inconclusive: int = 0
    skipped: int = 0
    worst_margin: float = float("inf")
    findings: list = field(default_factory=list)

    def record(self, margin: float, reproducer: dict, certain: bool = True) -> None:
        self.instances += 1
        self.worst_margin = min(self.worst_margin, float(margin))
        if margin < 0:
            if certain:
                self.violations += 1
                if len(self.findings) < 5:
                    self.findings.append(reproducer)
            else:
                self.inconclusive += 1

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "instances": self.instances,
            "violations": self.violations,
            "inconclusive": self.inconclusive,
            "skipped": self.skipped,
            "worst_margin": self.worst_margin,
            "findings": self.findings,
        }


@dataclass
class VerifyReport:
    frame: str
    K: float
    checks: list[CheckResult]

    @property
    def violated(self) -> bool:
        return any(c.violations for c in self.checks)

    @property
    def inconclusive(self) -> bool:
        return any(c.inconclusive for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "K": self.K,
            "violated": self.violated,
            "inconclusive": self.inconclusive,
            "checks": [c.to_dict() for c in self.checks],
        }


def verify_frame(
    frame: FrameInstance,
    seed: int = 0,
    draws: int = 100,
    coefficient_draws: int = 50,
    max_draws: int = 20,
    tol: float = 1e-8,
) -> VerifyReport:
    rng = np.random.default_rng(seed)
    N, d = frame.N, frame.dim
    K = projection_constant(frame).upper
    checks = []

    rec = CheckResult("reconstruction")
    for x in frame.span_sample():
        r = reconstruction_residual(frame, x)
        rec.record(1e-9 - r, {"x": x.tolist(), "residual": r})
    checks.append(rec)

    dual = CheckResult("dual_inequalities")
    for _ in range(draws):
        f = rng.standard_normal(d)
        m = int(rng.integers(1, N + 1))
        n = int(rng.integers(m, N + 1))
        rep = dual_inequality_report(frame, f, m, n, K=K, tol=tol)
        margin = min(rep.rhs1, rep.rhs2) + rep.tol - rep.lhs
        dual.record(margin, {"f": f.tolist(), "m": m, "n": n, **rep.to_dict()})
    checks.append(dual)

    mn = MinNormOracle(frame, Side.VECTORS)
    synth = CheckResult("synthesis_contraction")
    anal = CheckResult("analysis_bound")
    mono = CheckResult("min_bimonotone")
    for _ in range(coefficient_draws):
        a = rng.standard_normal(N)
        va = mn(a)
        s = float(lp_norm(synthesis_apply(frame, a), frame.p))
        synth.record(va + 1e-12 * max(1.0, va) - s, {"a": a.tolist(), "min": va, "synthesis": s})
        x = rng.standard_normal(d)
        t = mn(analysis_apply(frame, x))
        bound = K * float(lp_norm(x, frame.p))
        anal.record(bound + tol * max(1.0, bound) - t, {"x": x.tolist(), "min": t, "bound": bound})
        i, j = sorted(rng.integers(1, N + 1, size=2))
        lo, hi = int(rng.integers(1, i + 1)), int(rng.integers(j, N + 1))
        inner, outer = mn(restrict(a, int(i), int(j))), mn(restrict(a, lo, hi))
        mono.record(
            outer + 1e-12 * max(1.0, outer) - inner,
            {"a": a.tolist(), "inner": [int(i), int(j)], "outer": [lo, hi]},
        )
    checks += [synth, anal, mono]

    mx = MaxNormOracle(frame, tol=1e-7)
    fmin = MinNormOracle(frame, Side.FUNCTIONALS)
    sand = CheckResult("min_le_K_max")
    pair = CheckResult("duality_pairing")
    for _ in range(max_draws):
        a = rng.standard_normal(N)
        rep = sandwich_constants_report(frame, a, K=K, max_oracle=mx, tol=tol)
        margin = K * rep.max_value.lower + rep.tol - rep.min_value
        sand.record(margin, {"a": a.tolist(), **rep.to_dict()}, certain=rep.certainly_violated or margin >= 0)
        b = rng.standard_normal(N)
        lhs = abs(float(a @ b))
        rhs = rep.max_value.upper * fmin(b)
        pair.record(rhs + tol * max(1.0, rhs) - lhs, {"a": a.tolist(), "b": b.tolist()})
    checks += [sand, pair]

    lem = CheckResult("block_sandwich")
    block_draws = max(1, coefficient_draws // 5)
    valid = 0
    for _ in range(10 * block_draws):
        if valid == block_draws:
            break
        k = int(rng.integers(1, min(N, d, 4) + 1))
        Y = random_blocks(frame, k, seed=int(rng.integers(2**31)))
        Y = Y / np.array([mn(y) for y in Y])[:, None]
        coeffs = rng.standard_normal((5, k))
        try:
            reps = [block_sandwich_report(frame, Y, coeffs[0], tol=tol)]
        except ValueError:
            # dependent or degenerate block images are outside the lemma's hypotheses
            lem.skipped += 1
            continue
        constants = (reps[0].K, reps[0].K_basis)
        reps += [block_sandwich_report(frame, Y, a, tol=tol, constants=constants) for a in coeffs[1:]]
        valid += 1
        for a, rep in zip(coeffs, reps):
            margin = min(rep.mid - rep.lhs, rep.bound - rep.mid) + rep.tol
            lem.record(margin, {"blocks": Y.tolist(), "a": a.tolist(), **rep.to_dict()})
    checks.append(lem)
    return VerifyReport(frame.name, K, checks)

import numpy as np
import pytest

import oracles
from schauder.diagnostics import (
    CSV_COLUMNS,
    DecayProfile,
    Tag,
    Target,
    boundedly_complete_profile,
    default_grid,
    norming_profile,
    shrinking_profile,
    verdict,
)
from schauder.exemplars import bundled, canonical, l1_pathological, l2_tight, random_parseval
from schauder.frames import FrameInstance, projection_constant
from schauder.norms import Bounds, PNormSpace, lp_norm

EXEMPLARS = bundled()
IDS = [f.name for f in EXEMPLARS]


def profile_of(values):
    vals = tuple(Bounds.exact(v) for v in values)
    return DecayProfile("test", Target.FUNCTIONAL, 1, tuple(range(1, len(vals) + 1)), vals)


class TestShrinking:
    def test_canonical(self):
        p = shrinking_profile(canonical(2, 5), 1, range(2, 6))
        assert np.all(p.uppers() == 0)
        assert verdict(p).tag is Tag.DECAYING

    def test_l1_example(self):
        p = shrinking_profile(l1_pathological(6, 4), 1, range(1, 7))
        assert np.allclose(p.lowers(), 1, atol=1e-9) and np.allclose(p.uppers(), 1, atol=1e-9)
        assert verdict(p).tag is Tag.STALLED

    def test_tight_frame(self):
        f = l2_tight((0.6, 0.48))
        p = shrinking_profile(f, 1, range(1, 5))
        assert np.allclose(p.uppers(), 0.64, atol=1e-9)
        # oracle: e_1 = (x_4 - x_5)/(sqrt 2 c_2) lies in the tail, and |f_1(e_1)| = c
        e1 = (f.vectors[3] - f.vectors[4]) / (np.sqrt(2) * 0.48)
        assert np.allclose(e1, [1, 0, 0])
        assert abs(f.functionals[0] @ e1) == pytest.approx(0.64)

    def test_disjoint_supports_vanish(self):
        rng = np.random.default_rng(0)
        X = np.diag(rng.uniform(0.5, 2.0, 5))
        F = np.diag(1 / np.diag(X))
        for p in (1, 2, "inf"):
            f = FrameInstance(PNormSpace(5, p), X, F)
            assert np.all(shrinking_profile(f, 2, range(3, 6)).uppers() == 0)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            shrinking_profile(canonical(2, 3), 3, [1, 2, 3])
        with pytest.raises(IndexError):
            shrinking_profile(canonical(2, 3), 1, [2, 9])


class TestBoundedlyComplete:
    def test_canonical(self):
        assert np.all(boundedly_complete_profile(canonical(2, 4), 1, range(2, 5)).uppers() == 0)

    def test_l1_example(self):
        p = boundedly_complete_profile(l1_pathological(6, 4), 1, range(1, 6))
        assert np.allclose(p.lowers(), 1, atol=1e-9) and np.allclose(p.uppers(), 1, atol=1e-9)
        assert verdict(p).tag is Tag.STALLED

    def test_random_parseval(self):
        f = random_parseval(4, 7, seed=0)
        p = boundedly_complete_profile(f, 1, range(1, 8))
        v = p.uppers()
        assert np.all(v > 0)
        assert np.all(np.diff(v) <= 1e-12)
        # oracle: projection of x_1 onto span of the tail functionals, via least squares
        for n, val in zip(p.grid, v):
            T = f.functionals[n - 1 :].T
            coef, *_ = np.linalg.lstsq(T, f.vectors[0], rcond=None)
            assert val == pytest.approx(np.linalg.norm(T @ coef), abs=1e-12)


class TestNorming:
    def test_canonical(self):
        x = np.array([0.0, 2.0, -1.0])
        p = norming_profile(canonical(2, 3), x, [1, 2, 3])
        assert p.uppers()[0] == 0 and p.uppers()[-1] == pytest.approx(np.linalg.norm(x))

    def test_l1_example_first_functional(self):
        p = norming_profile(l1_pathological(6, 4), [1, 0, 0, 0], [1])
        assert p.uppers()[0] == pytest.approx(1)

    def test_tight_frame_rises(self):
        f = l2_tight()
        p = norming_profile(f, [0, 1, 0], [1, 2, 3, 4, 5])
        v = p.uppers()
        assert v[0] < 1 and v[-1] == pytest.approx(1)
        assert np.all(np.diff(v) >= -1e-12)

    @pytest.mark.parametrize("frame", EXEMPLARS, ids=IDS)
    def test_final_value_range(self, frame):
        K = projection_constant(frame).upper
        for x in frame.span_sample():
            c = norming_profile(frame, x, [frame.N]).values[-1]
            nx = lp_norm(x, frame.p)
            assert nx / K - 1e-9 <= c.upper and c.lower <= nx + 1e-9


@pytest.mark.parametrize("frame", EXEMPLARS, ids=IDS)
def test_profiles_are_monotone(frame):
    grid = range(1, frame.N + 1)
    for prof in (
        shrinking_profile(frame, 1, grid),
        boundedly_complete_profile(frame, 1, grid),
        norming_profile(frame, frame.span_sample()[0], grid),
    ):
        assert prof.monotone_violations() == []
        assert np.all(prof.lowers() >= 0)


@pytest.mark.parametrize("p", [1.0, float("inf")])
def test_tail_values_match_mesh(p):
    rng = np.random.default_rng(1)
    f = FrameInstance(PNormSpace(4, p), rng.standard_normal((5, 4)), rng.standard_normal((5, 4)))
    prof = shrinking_profile(f, 1, [4])
    est = oracles.restricted_norm_mesh(f.functionals[0], f.vectors[3:], p, ticks=20001)
    assert prof.values[0].lower == pytest.approx(est, rel=1e-4)


class TestVerdict:
    def test_zero(self):
        assert verdict(profile_of([0, 0, 0, 0])).tag is Tag.DECAYING

    def test_constant(self):
        assert verdict(profile_of([1, 1, 1, 1])).tag is Tag.STALLED

    def test_halving_above_threshold(self):
        tau = 1e-3
        vals = [2 * tau * 2**k for k in range(6, -1, -1)]
        assert vals[-1] == 2 * tau
        assert verdict(profile_of(vals), tau).tag is Tag.INCONCLUSIVE

    def test_halving_below_threshold(self):
        vals = [2.0**-k for k in range(15)]
        assert verdict(profile_of(vals)).tag is Tag.DECAYING

    def test_slow_decay_is_not_a_stall(self):
        assert verdict(profile_of([1.0, 0.9, 0.8, 0.7])).tag is Tag.INCONCLUSIVE

    def test_short_profile(self):
        assert verdict(profile_of([0.5])).tag is Tag.STALLED
        with pytest.raises(ValueError):
            verdict(profile_of([]))


def test_default_grid():
    assert default_grid(16) == tuple(range(2, 17, 2))
    assert default_grid(5) == (1, 2, 3, 4, 5)


def test_csv_layout():
    text = shrinking_profile(canonical(2, 3), 1, [2, 3]).to_csv()
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3 and lines[1].endswith(",EXACT")

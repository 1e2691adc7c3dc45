import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from henonlab.acceptance import random_single_maps
from henonlab.henon import HenonType, apply_complex
from henonlab.periodic import (check_jacobian, classify_multipliers, fixed_points_exact,
                               period_two_exact, periodic_points, saddle_measure, write_csv)


def test_saddle_of_z2_a2():
    f = HenonType.quadratic(0, 2)
    pts = fixed_points_exact(f)
    by_point = {(round(p.point[0].real, 9), round(p.point[1].real, 9)): p for p in pts}
    s = by_point[(-1.0, -1.0)]
    assert s.kind == "saddle"
    assert np.allclose(sorted(abs(m) for m in s.multipliers), [math.sqrt(3) - 1, math.sqrt(3) + 1])
    assert by_point[(0.0, 0.0)].kind == "repelling"


@pytest.mark.parametrize("k", range(10))
def test_random_maps_count_and_jacobian(k):
    f = random_single_maps()[k]
    assert len(fixed_points_exact(f)) == f.degree
    pts = periodic_points(f, 2)
    assert pts.complete or pts.degenerate
    for p in pts:
        assert p.residual <= 1e-10 * (1 + math.hypot(*map(abs, p.point)))
        assert check_jacobian(f, p) <= 1e-8


def test_period_one_points_nest_in_period_two(quad):
    two = periodic_points(quad, 2)
    for p in periodic_points(quad, 1):
        assert min(math.dist((p.point[0].real, p.point[0].imag), (q.point[0].real, q.point[0].imag))
                   + abs(p.point[1] - q.point[1]) for q in two) < 1e-8


def test_orbit_invariance(quad):
    pts = periodic_points(quad, 3)
    assert pts.complete
    keys = {(round(p.point[0].real, 7), round(p.point[0].imag, 7)) for p in pts}
    for p in pts:
        w = apply_complex(quad, *p.point)
        assert (round(w[0].real, 7), round(w[0].imag, 7)) in keys


def test_newton_agrees_with_elimination(quad):
    a = np.array([p.point for p in periodic_points(quad, 2)])
    b = np.array([p.point for p in period_two_exact(quad)])
    assert a.shape == b.shape
    assert np.max(np.min(np.linalg.norm(a[:, None] - b[None], axis=2), axis=1)) < 1e-9


def test_degenerate_double_root_flagged():
    f = HenonType.quadratic(0, 1)
    pts = periodic_points(f, 1)
    assert not pts.complete and pts.degenerate
    assert len(fixed_points_exact(f)) == 2


@given(st.complex_numbers(max_magnitude=3, allow_nan=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False))
def test_classify_multipliers(m1, m2):
    kind = classify_multipliers(m1, m2)
    inside = sum(abs(m) < 1 - 1e-9 for m in (m1, m2))
    outside = sum(abs(m) > 1 + 1e-9 for m in (m1, m2))
    expect = {(2, 0): "attracting", (0, 2): "repelling", (1, 1): "saddle"}.get((inside, outside), "neutral")
    assert kind == expect


def test_saddle_measure_is_normalized(quad):
    pts = periodic_points(quad, 2)
    total = saddle_measure(quad, 2, lambda a, b: 1.0, points=pts)
    assert total == pytest.approx(sum(p.kind == "saddle" for p in pts) / len(pts))


def test_csv_round_trip_precision(quad, tmp_path):
    pts = periodic_points(quad, 1)
    path = tmp_path / "p.csv"
    with open(path, "w", newline="") as fh:
        write_csv(pts, fh)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("re1,im1")
    assert float(lines[1].split(",")[0]) == pts[0].point[0].real


def test_period_guard(quad):
    with pytest.raises(ValueError):
        periodic_points(quad, 0)
    with pytest.raises(ValueError):
        periodic_points(quad, 13)

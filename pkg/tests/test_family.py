import numpy as np
import pytest

from henonlab.family import (Family, boundary_mask, dilation_probe, family_green, param_scan,
                             quadratic_family)
from henonlab.green import Window, green_plus
from henonlab.henon import HenonType


def test_fiber_consistency_bit_exact(rng):
    fam = quadratic_family(0.3)
    for _ in range(20):
        c = complex(*rng.uniform(-1.5, 0.5, 2))
        z = tuple(complex(*rng.uniform(-2, 2, 2)) for _ in range(2))
        assert family_green(fam, c, z) == green_plus(HenonType.quadratic(c, 0.3), z, 1e-10)


def test_family_trivial_zero():
    assert family_green(quadratic_family(0.1), 0, (0, 0)).value == 0.0


def test_two_parameter_family():
    fam = quadratic_family()
    assert fam((-1.1, 0.4)) == HenonType.quadratic(-1.1, 0.4)


def test_degree_guard():
    fam = Family(lambda c: HenonType.single([0, 0, 0, 1] if c else [0, 0, 1], 1.0), 2)
    with pytest.raises(ValueError):
        fam(1)


def test_scan_matches_pointwise():
    fam = quadratic_family(0.1)
    sc = param_scan(fam, (0, 0), Window(-2, 0.6, -1.3, 1.3), (12, 10))
    for (i, j) in [(0, 0), (5, 7), (9, 11)]:
        c = sc.params[i, j]
        assert sc.values[i, j] == pytest.approx(green_plus(fam(c), (0, 0), 1e-8).value, abs=1e-9)


def test_scan_has_bounded_region_and_escape():
    sc = param_scan(quadratic_family(0.05), (0, 0), Window(-2, 0.6, -1.3, 1.3), (64, 64))
    zero = sc.values == 0
    assert 0.1 < zero.mean() < 0.9
    # bounded orbits give exactly 0; late escapes may round to 0 within tol
    assert np.all(zero[sc.escape < 0])
    late = zero & (sc.escape >= 0)
    assert np.all(sc.error_bounds[late] <= 1e-8) and np.all(sc.escape[late] > 20)


def test_scan_far_point_positive():
    sc = param_scan(quadratic_family(0.1), (50, 0), Window(-1, 1, -1, 1), (8, 8))
    assert np.all(sc.values > 0)


def test_boundary_mask():
    b = np.zeros((5, 5), bool)
    b[2, 2] = True
    m = boundary_mask(b)
    assert m.sum() == 5 and m[2, 2]


def test_dilation_probe_lower_semicontinuity():
    fam = quadratic_family(0.2)
    res = dilation_probe(fam, -1.0, 4 / 128 * 0.5, Window(-2, 2, -2, 2), 128)
    assert res.boundary_pixels > 0
    assert res.covered > 0.9

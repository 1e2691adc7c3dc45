import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from henonlab.green import (BoundedWithinBudget, Escaping, Window, classify, green_minus,
                            green_plus, green_plus_grid, holder_exponent, level_set_potential,
                            render_green)
from henonlab.henon import HenonType, apply_complex

coord = st.floats(-3, 3)


@given(coord, coord, coord, coord)
def test_invariance_pointwise(quad, a, b, c, d):
    z = (complex(a, b), complex(c, d))
    g0 = green_plus(quad, z, 1e-10).value
    g1 = green_plus(quad, apply_complex(quad, *z), 1e-10).value
    assert abs(g1 - 2 * g0) <= 5e-10


def test_minus_invariance(quad):
    z = (0.4 + 1.3j, -2.0 + 0.2j)
    w = apply_complex(quad, *z)
    assert green_minus(quad, z).value == pytest.approx(2 * green_minus(quad, w).value, abs=1e-9)


def test_fixed_point_has_zero_green(quad):
    # z2 = z1 = x with x^2 - 0.6 x - 1.1 = 0
    x = (0.6 - math.sqrt(0.36 + 4.4)) / 2
    v = green_plus(quad, (x, x))
    assert v.value == 0.0 and v.error_bound <= 1e-6
    assert isinstance(classify(quad, (x, x)).forward, BoundedWithinBudget)


def test_far_point_escapes_with_log_growth(quad):
    z = (1e6, 0)
    v = green_plus(quad, z, 1e-12)
    assert isinstance(classify(quad, z).forward, Escaping)
    # G+ = log|z1| + O(1/|z1|) far out in the escape region for monic p
    assert v.value == pytest.approx(math.log(1e6), abs=1e-5)


def test_grid_matches_pointwise(quad, rng):
    z1 = rng.uniform(-2, 2, 50) + 1j * rng.uniform(-2, 2, 50)
    z2 = rng.uniform(-2, 2, 50) + 1j * rng.uniform(-2, 2, 50)
    vals, _ = green_plus_grid(quad, z1, z2, 1e-10)
    ref = [green_plus(quad, (a, b), 1e-10).value for a, b in zip(z1, z2)]
    assert np.allclose(vals, ref, rtol=0, atol=1e-9)


def test_render_refinement_consistency(quad):
    w = Window(-2, 2, -2, 2)
    coarse = render_green(quad, w, (9, 9))
    fine = render_green(quad, w, (17, 17))
    assert np.allclose(fine.values[::2, ::2], coarse.values, atol=1e-8)


def test_level_set_potential(quad):
    z = (2.0, 0.0)
    g = green_plus(quad, z).value
    assert level_set_potential(quad, 0.5 * g, z) == pytest.approx(0.5 * g)
    assert level_set_potential(quad, 2 * g, z) == 0.0
    with pytest.raises(ValueError):
        level_set_potential(quad, -1.0, z)


def test_holder_estimate_bounds(quad):
    est = holder_exponent(quad, depths=(4, 8), per_axis=5)
    assert [e.n for e in est] == [4, 8]
    assert all(0 < e.beta_hat <= 1 for e in est)


def test_holder_stabilizes(quad):
    b8, b16 = (e.beta_hat for e in holder_exponent(quad, depths=(8, 16)))
    assert abs(b16 - b8) / b8 <= 0.10


def test_holder_rejects_bad_input(quad):
    with pytest.raises(ValueError):
        holder_exponent(quad, depths=(0,))
    with pytest.raises(ValueError):
        holder_exponent(quad, metric="sup")


def test_empirical_modulus_respects_estimate(quad, rng):
    """|G(z) - G(z')| / |z - z'|^beta stays bounded on random close pairs."""
    beta = holder_exponent(quad, depths=(8,))[0].beta_hat
    z = rng.uniform(-2, 2, (4, 2000))
    dz = rng.normal(size=(4, 2000)) * 10.0 ** rng.uniform(-6, -2, 2000)
    a1, a2 = z[0] + 1j * z[1], z[2] + 1j * z[3]
    b1, b2 = a1 + dz[0] + 1j * dz[1], a2 + dz[2] + 1j * dz[3]
    ga = green_plus_grid(quad, a1, a2, 1e-12)[0]
    gb = green_plus_grid(quad, b1, b2, 1e-12)[0]
    ratio = np.abs(ga - gb) / np.linalg.norm(dz, axis=0) ** beta
    assert np.max(ratio) < 50

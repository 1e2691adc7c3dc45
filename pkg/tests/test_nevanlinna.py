import math

import numpy as np
import pytest

from henonlab.green import green_plus_grid
from henonlab.henon import HenonType, apply_complex
from henonlab.nevanlinna import (ManifoldError, Saddle, area_function, auto_depth,
                                 characteristic, conjugacy_residual, polynomial_curve,
                                 saddle_from_point, stable_manifold, tau_pairing)


@pytest.fixture(scope="module")
def saddle_z2():
    f = HenonType.quadratic(0, 2)
    return f, saddle_from_point(f, (-1, -1))


@pytest.fixture(scope="module")
def manifold(saddle_z2):
    f, s = saddle_z2
    return stable_manifold(f, s, radius=4.0)


def test_line_area_and_characteristic():
    c = polynomial_curve([0, 1], [0])
    assert area_function(c, 2.0) == pytest.approx(4 * math.pi, rel=1e-9)
    assert characteristic(c, 2.0) == pytest.approx(2 * math.pi, rel=1e-6)
    assert characteristic(c, 2.0, metric="fubini_study") == pytest.approx(0.5 * math.log(5), rel=1e-9)


@pytest.mark.parametrize("r", [0.5, 1.0, 3.0])
def test_monomial_characteristic(r):
    c = polynomial_curve([0, 0, 1], [0])
    assert area_function(c, r) == pytest.approx(2 * math.pi * r ** 4, rel=1e-9)
    assert characteristic(c, r) == pytest.approx(math.pi * r ** 4 / 2, rel=1e-6)


def test_mass_pairing_is_one_on_line():
    c = polynomial_curve([0, 1], [0.5, 0, 0.3])
    for metric in ("euclidean", "fubini_study"):
        assert tau_pairing(c, 2.0, metric=metric).tau_psi == pytest.approx(1.0, abs=1e-4)


def test_saddle_multipliers(saddle_z2):
    _, s = saddle_z2
    assert s.lambda_s == pytest.approx(-1 + math.sqrt(3))
    assert s.lambda_u == pytest.approx(-1 - math.sqrt(3))
    with pytest.raises(ValueError):
        Saddle((0, 0), 1, 1.5, (1, 0))


def test_not_a_saddle():
    f = HenonType.quadratic(0, 2)
    with pytest.raises(ValueError):
        saddle_from_point(f, (0, 0))


def test_conjugacy(manifold):
    assert conjugacy_residual(manifold, 4.0)[1] < 1e-10
    (p1, p2), _ = manifold(np.array([0.7 + 0.2j]))
    s = manifold.saddle
    (q1, q2), _ = manifold(np.array([s.lambda_s * (0.7 + 0.2j)]))
    w = apply_complex(HenonType.quadratic(0, 2), p1[0], p2[0])
    assert abs(w[0] - q1[0]) + abs(w[1] - q2[0]) < 1e-9 * (1 + abs(p1[0]) + abs(p2[0]))


def test_manifold_in_k_plus(manifold):
    xi = 3.0 * np.exp(2j * np.pi * np.arange(32) / 32)
    p1, p2, *_ = manifold.evaluate(xi)
    assert np.max(green_plus_grid(HenonType.quadratic(0, 2), p1, p2, 1e-10)[0]) < 1e-8


def test_manifold_normalization(manifold):
    T = [characteristic(manifold, r) for r in (1.0, 2.0, 4.0)]
    assert T[0] < T[1] < T[2] and T[1] / T[0] > 1.5
    for r, t in zip((1.0, 2.0, 4.0), T):
        p = tau_pairing(manifold, r, None, t)
        assert p.tau_psi == pytest.approx(1.0, abs=0.02)
        assert p.ddc_mass_proxy == 1.0 / t


def test_radius_guard(manifold):
    with pytest.raises(ValueError):
        characteristic(manifold, 8.0)
    with pytest.raises(ValueError):
        tau_pairing(manifold, 1.0, metric="hyperbolic")


def test_shallow_depth_rejected(saddle_z2):
    f, s = saddle_z2
    with pytest.raises(ValueError):
        stable_manifold(f, s, depth=1, radius=4.0)


def test_auto_depth_monotone(saddle_z2):
    _, s = saddle_z2
    assert auto_depth(s, 8.0, 0.01) >= auto_depth(s, 4.0, 0.01)


def test_residual_check_raises(saddle_z2):
    f, s = saddle_z2
    # at radius 8 the far part of the manifold is too large for the residual check
    with pytest.raises(ManifoldError):
        stable_manifold(f, s, radius=8.0)

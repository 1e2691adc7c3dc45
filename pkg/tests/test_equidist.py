import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from henonlab.currents import TestForm, log_abs_z1, pair_form
from henonlab.equidist import (Curve, equidist_experiment, fit_rate, pullback_logs,
                               pullback_potential, straddling_centers)
from henonlab.green import green_plus, green_plus_grid
from henonlab.henon import apply_complex


def test_curve_rejects_i_minus():
    with pytest.raises(ValueError):
        Curve([[0, 1]])          # {z2 = 0} passes through [0:1:0]
    with pytest.raises(ValueError):
        Curve([[0]])
    assert Curve.z1_axis_zero().degree == 1


def test_pullback_zero_is_the_curve(quad):
    """n = 0 is log|P| itself, so the pairing is the line integral exactly."""
    psi = TestForm((0.1 + 0.2j, -0.3), 0.9)
    u = pullback_potential(quad, Curve.z1_axis_zero(), 0)
    assert pair_form(u, psi, 64) == pytest.approx(pair_form(log_abs_z1(), psi, 64), rel=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2), st.integers(0, 6))
def test_pullback_logs_match_direct_iteration(quad, x, y, n):
    V = Curve([[0.3, 1], [1, 0], [0.5, 0]])
    z = (complex(x, 0.1), complex(y, -0.2))
    w = z
    for _ in range(n):
        w = apply_complex(quad, *w)
    direct = math.log(abs(V(*w))) if abs(w[0]) < 1e100 else None
    got = pullback_logs(quad, V, [z[0]], [z[1]], n)[0, n]
    if direct is not None and math.isfinite(direct):
        assert got == pytest.approx(direct, rel=1e-9, abs=1e-9)


def test_pullback_tends_to_green(quad, rng):
    z1 = rng.uniform(-2, 2, 200) + 1j * rng.uniform(-2, 2, 200)
    z2 = rng.uniform(-2, 2, 200) + 1j * rng.uniform(-2, 2, 200)
    g = green_plus_grid(quad, z1, z2, 1e-12)[0]
    V = Curve.z1_axis_zero()
    err = [np.mean(np.abs(pullback_potential(quad, V, n)(z1, z2) - g)) for n in (4, 8, 12)]
    assert err[2] < err[1] < err[0]


def test_fit_rate_recovers_synthetic():
    ns = np.arange(1, 11)
    rate, c = fit_rate(ns, 3.0 * np.exp(-0.7 * ns))
    assert rate == pytest.approx(0.7) and c == pytest.approx(3.0)
    rate, c = fit_rate(ns, 2.0 * ns * np.exp(-0.5 * ns), log_n_term=True)
    assert rate == pytest.approx(0.5) and c == pytest.approx(2.0)


def test_centers_are_saddles_of_distinct_location(quad):
    cs = straddling_centers(quad)
    assert len({(round(a.real, 6), round(b.real, 6)) for a, b in cs}) == 3
    for c in cs:
        assert green_plus(quad, c).value == 0.0


def test_experiment_small(quad):
    psis = [TestForm(c, 0.8) for c in straddling_centers(quad, 2)]
    rep = equidist_experiment(quad, Curve.z1_axis_zero(), psis, range(1, 7), quadrature=12)
    assert rep.errors.shape == (6,)
    assert rep.errors[-1] < rep.errors[0]
    assert rep.fitted_rate > 0.5 * math.log(2)
    assert np.allclose(rep.bound_model([1]), rep.fitted_constant * math.exp(-rep.fitted_rate))


def test_experiment_guards(quad):
    psi = [TestForm((0, 0), 1.0)]
    with pytest.raises(ValueError):
        equidist_experiment(quad, Curve.z1_axis_zero(), psi, [])
    with pytest.raises(ValueError):
        equidist_experiment(quad, Curve.z1_axis_zero(), psi, range(30))

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from henonlab.acceptance import line_integral_oracle
from henonlab.currents import (ComplexLine, PotentialField, TestForm, green_potential,
                               log_abs_z1, log_norm_potential, pair_form, pair_slice,
                               slice_measure)
from henonlab.green import Window

W3 = Window(-3, 3, -3, 3)


@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8), st.floats(0.3, 1.5))
def test_pair_form_log_z1_matches_line_integral(x, y, rho):
    psi = TestForm((complex(x, y), 0.5j), rho)
    ref = line_integral_oracle(psi)
    got = pair_form(log_abs_z1(), psi, 128)
    assert got == pytest.approx(ref, rel=2e-3, abs=1e-3 * rho ** 2)


def test_pair_form_vanishes_on_pluriharmonic():
    u = PotentialField(lambda z1, z2: np.real(z1 * z2 + 3 * z1 ** 2), "pluriharmonic")
    psi = TestForm((0.2, -0.1), 0.7)
    errs = [abs(pair_form(u, psi, q)) for q in (32, 64, 128)]
    # boundary cells of the disc mask limit the rate; the error stays tiny
    assert errs[0] < 1e-3 and max(errs[1:]) < 1e-5


def test_pair_form_quadrature_guard():
    with pytest.raises(ValueError):
        pair_form(log_abs_z1(), TestForm((0, 0), 1.0), 4)


def test_slice_of_log_z1_is_unit_atom():
    m = slice_measure(log_abs_z1(), ComplexLine.horizontal(0j), Window(-1, 1, -1, 1), 64)
    assert m.total_mass == pytest.approx(1.0, abs=1e-3)
    assert m.flagged.any()


def test_slice_of_log_norm_on_a_line():
    # dd^c log||z|| on {z2 = 1} has mass 1 on P^1; most of it sits in |t| < 10
    m = slice_measure(log_norm_potential(), ComplexLine.horizontal(1 + 0j),
                      Window(-10, 10, -10, 10), 400)
    assert m.total_mass == pytest.approx(1 - 1 / 101, abs=0.01)


def test_green_slice_mass_and_block_positivity(quad):
    m = slice_measure(green_potential(quad, 1e-12), ComplexLine.horizontal(0j), W3, 512)
    assert m.total_mass == pytest.approx(1.0, abs=0.03)
    coarse = m.block_negative_mass(512 // 96)
    assert -0.01 < coarse <= 0
    assert pair_slice(m, lambda t: np.ones(t.shape)) == pytest.approx(m.total_mass)


def test_block_masses_sum(quad):
    m = slice_measure(green_potential(quad), ComplexLine.horizontal(0j), W3, 96)
    assert m.block_masses(8).sum() == pytest.approx(m.cell_mass.sum())
    with pytest.raises(ValueError):
        m.block_masses(0)


def test_slice_rejects_bad_window():
    with pytest.raises(ValueError):
        slice_measure(log_abs_z1(), ComplexLine.horizontal(0j), Window(-1, 1, -2, 2), 32)


def test_test_form_c2_norm_dominates_finite_differences():
    psi = TestForm((0, 0), 0.6)
    x = np.linspace(-0.6, 0.6, 2001)
    g = psi.chi(x, np.zeros_like(x))
    h = x[1] - x[0]
    d1 = np.max(np.abs(np.diff(g))) / h
    d2 = np.max(np.abs(np.diff(g, 2))) / h ** 2
    assert max(d1, d2) <= psi.c2_norm() * (1 + 1e-3)


def test_test_form_radius_positive():
    with pytest.raises(ValueError):
        TestForm((0, 0), 0.0)

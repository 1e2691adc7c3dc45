import numpy as np
import pytest
from hypothesis import given, strategies as st

from henonlab.henon import (HenonFactor, HenonType, apply_complex, apply_inverse_complex,
                            escape_certificate, format_map, jacobian, parse_map)
from henonlab.numerics import Poly

coef = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)
jac = st.complex_numbers(min_magnitude=0.2, max_magnitude=2, allow_nan=False, allow_infinity=False)
pt = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


@st.composite
def maps(draw, max_factors=2):
    fs = []
    for _ in range(draw(st.integers(1, max_factors))):
        d = draw(st.integers(2, 3))
        c = [draw(coef) for _ in range(d)] + [draw(jac)]
        fs.append(HenonFactor(Poly(c), draw(jac)))
    return HenonType(fs)


@given(maps(), pt, pt)
def test_inverse_roundtrip(f, z1, z2):
    w = apply_inverse_complex(f, *apply_complex(f, z1, z2))
    assert abs(w[0] - z1) + abs(w[1] - z2) < 1e-8 * (1 + abs(z1) + abs(z2)) * 1e3


@given(maps())
def test_degree_and_jacobian_determinant(f):
    assert f.degree == np.prod([h.degree for h in f.factors])
    J = jacobian(f, (0.3 + 0.1j, -0.2j))
    assert np.linalg.det(J) == pytest.approx(f.jacobian_det, rel=1e-9)


def test_factor_order_right_to_left():
    g = HenonType.quadratic(0.5, 1.0)
    h = HenonType.quadratic(-1.0, 2.0)
    gh = g.compose(h)
    z = (0.1 + 0.2j, -0.3j)
    assert np.allclose(apply_complex(gh, *z), apply_complex(g, *apply_complex(h, *z)))


def test_swapped_inverse_is_inverse(quad):
    s = lambda z: (z[1], z[0])
    z = (0.7 - 0.2j, 1.1 + 0.5j)
    w = apply_complex(quad, *z)
    back = s(apply_complex(quad.swapped_inverse(), *s(w)))
    assert np.allclose(back, z)


@given(maps(max_factors=1))
def test_parse_format_roundtrip(f):
    assert parse_map(format_map(f)) == f


@pytest.mark.parametrize("text", ["", "factor a=0,0 p=0,0,0,0,1,0", "factor a=1,0 p=0,0,1,0",
                                  "fctor a=1,0 p=0,0,0,0,1,0", "factor a=1,0"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_map(text)


def test_escape_certificate_grows(quad):
    R = escape_certificate(quad).radius
    rng = np.random.default_rng(1)
    for _ in range(200):
        z1 = R * (1 + rng.random()) * np.exp(2j * np.pi * rng.random())
        z2 = abs(z1) * rng.random() * np.exp(2j * np.pi * rng.random())
        w1, _ = apply_complex(quad, z1, z2)
        assert abs(w1) >= 2 * abs(z1)

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from henonlab.numerics import (ExtComplex, Poly, ext_log_abs, poly_add, poly_compose,
                               poly_from_roots, poly_mul, poly_roots, poly_scale)

small = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)
nonzero = small.filter(lambda z: abs(z) > 1e-3)


@given(small, small)
def test_ext_matches_complex_arithmetic(a, b):
    A, B = ExtComplex.from_complex(a), ExtComplex.from_complex(b)
    assert abs(complex(A * B) - a * b) <= 1e-12 * (abs(a * b) + 1e-300)
    assert abs(complex(A + B) - (a + b)) <= 1e-12 * (abs(a) + abs(b) + 1e-300)


@given(nonzero, st.integers(1, 400))
def test_ext_power_far_outside_double_range(z, k):
    w = ExtComplex.from_complex(z) ** (k * 10)
    assert ext_log_abs(w) == pytest.approx(k * 10 * math.log(abs(z)), rel=1e-9, abs=1e-9)


def test_ext_zero():
    z = ExtComplex.from_complex(0)
    assert z.is_zero()
    assert ext_log_abs(z) == -math.inf


def test_poly_strips_trailing_zeros():
    p = Poly([1, 2, 0, 0])
    assert p.degree == 1 and p.leading == 2


@given(st.lists(small, min_size=1, max_size=6))
def test_roots_of_expanded_product(roots):
    p = poly_from_roots(roots)
    got = poly_roots(p)
    assert len(got) == len(roots)
    for r in roots:
        # multiple roots are only recovered to about sqrt(eps)
        assert np.min(np.abs(got - r)) <= 1e-5 * (1 + abs(r)) ** 2


def test_roots_known_quadratic():
    r = poly_roots(Poly([-1.1, 0, 1]))
    assert np.allclose(sorted(r.real), [-math.sqrt(1.1), math.sqrt(1.1)])


@given(st.lists(small, min_size=2, max_size=4), st.lists(small, min_size=2, max_size=4), small)
def test_compose_mul_add_pointwise(c, d, x):
    p, q = Poly(c), Poly(d)
    x = x / (1 + abs(x))
    scale = 1 + sum(map(abs, c)) * (1 + sum(map(abs, d))) ** len(c)
    assert abs(poly_compose(p, q)(x) - p(q(x))) <= 1e-10 * scale
    assert abs(poly_mul(p, q)(x) - p(x) * q(x)) <= 1e-10 * scale
    assert abs(poly_add(p, q)(x) - (p(x) + q(x))) <= 1e-10 * scale
    assert abs(poly_scale(p, 2j)(x) - 2j * p(x)) <= 1e-10 * scale


def test_roots_rejects_constants():
    with pytest.raises(ValueError):
        poly_roots(Poly([0]))
    with pytest.raises(ValueError):
        poly_roots(Poly([3]))

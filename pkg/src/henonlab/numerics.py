"""Extended-range complex numbers, one-variable polynomials and root finding.

Deep iterates of a Henon map grow like C**(d**n), far past the double
range, but every consumer here only needs logarithms of moduli.  An
``ExtComplex`` keeps a double mantissa together with an unbounded
base-2 exponent.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

LOG2 = math.log(2.0)


def _split(z: complex) -> tuple[complex, int]:
    """Return (m, e) with z = m * 2**e and 1 <= |m| < 2, or (0, 0)."""
    if z == 0:
        return 0j, 0
    if not cmath.isfinite(z):
        raise OverflowError(f"cannot normalise non-finite value {z!r}")
    big = max(abs(z.real), abs(z.imag))
    _, e = math.frexp(big)
    e -= 1
    m = complex(math.ldexp(z.real, -e), math.ldexp(z.imag, -e))
    # |m| lies in [1, 2*sqrt(2)) after scaling the largest component
    if abs(m) >= 2.0:
        m *= 0.5
        e += 1
    return m, e


@dataclass(frozen=True)
class ExtComplex:
    """Complex value ``mantissa * 2**exponent`` with |mantissa| in [1, 2) or 0."""

    mantissa: complex = 0j
    exponent: int = 0

    @classmethod
    def from_complex(cls, z) -> "ExtComplex":
        m, e = _split(complex(z))
        return cls(m, e)

    @classmethod
    def make(cls, mantissa, exponent: int) -> "ExtComplex":
        """Normalise an arbitrary (mantissa, exponent) pair."""
        m, e = _split(complex(mantissa))
        if m == 0:
            return cls(0j, 0)
        return cls(m, e + int(exponent))

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def to_complex(self) -> complex:
        """Plain complex value; overflows to inf / underflows to 0 outside the double range."""
        m, e = self.mantissa, self.exponent
        try:
            return complex(math.ldexp(m.real, e), math.ldexp(m.imag, e))
        except OverflowError:
            return complex(math.copysign(math.inf, m.real) if m.real else 0.0,
                           math.copysign(math.inf, m.imag) if m.imag else 0.0)

    def __complex__(self) -> complex:
        return self.to_complex()

    def __neg__(self) -> "ExtComplex":
        return ExtComplex(-self.mantissa, self.exponent)

    def __mul__(self, other) -> "ExtComplex":
        other = _coerce(other)
        if self.is_zero() or other.is_zero():
            return ExtComplex()
        return ExtComplex.make(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExtComplex":
        other = _coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("ExtComplex division by zero")
        if self.is_zero():
            return ExtComplex()
        return ExtComplex.make(self.mantissa / other.mantissa, self.exponent - other.exponent)

    def __rtruediv__(self, other) -> "ExtComplex":
        return _coerce(other) / self

    def __add__(self, other) -> "ExtComplex":
        other = _coerce(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.exponent < other.exponent:
            hi, lo = other, self
        else:
            hi, lo = self, other
        shift = lo.exponent - hi.exponent
        if shift < -1100:
            return hi
        low = complex(math.ldexp(lo.mantissa.real, shift), math.ldexp(lo.mantissa.imag, shift))
        return ExtComplex.make(hi.mantissa + low, hi.exponent)

    __radd__ = __add__

    def __sub__(self, other) -> "ExtComplex":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "ExtComplex":
        return _coerce(other) + (-self)

    def __pow__(self, k: int) -> "ExtComplex":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = ExtComplex(1 + 0j, 0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __abs__(self) -> float:
        return abs(self.to_complex())

    def __eq__(self, other) -> bool:
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self.mantissa == other.mantissa and self.exponent == other.exponent

    def __hash__(self) -> int:
        return hash((self.mantissa, self.exponent))

    def __repr__(self) -> str:
        return f"ExtComplex({self.mantissa!r}, {self.exponent})"


def _coerce(x) -> ExtComplex:
    if isinstance(x, ExtComplex):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return ExtComplex.from_complex(complex(x))
    raise TypeError(f"cannot convert {type(x).__name__} to ExtComplex")


def ext(x) -> ExtComplex:
    return _coerce(x)


def ext_log_abs(x: ExtComplex) -> float:
    """Natural log of |x|; -inf for zero."""
    x = _coerce(x)
    if x.is_zero():
        return -math.inf
    return math.log(abs(x.mantissa)) + x.exponent * LOG2


class Poly:
    """Polynomial in one complex variable, coefficients lowest degree first.

    Trailing zero coefficients are stripped so that the leading coefficient
    is nonzero unless the polynomial is identically zero.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[complex]):
        c = [complex(x) for x in coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c:
            c = [0j]
        self.coeffs = tuple(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, x):
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly([0])
        return Poly([k * c for k, c in enumerate(self.coeffs) if k > 0])

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)!r})"


def poly_eval(p: Poly, x) -> ExtComplex:
    """Horner evaluation of p at an extended-range argument."""
    x = _coerce(x)
    acc = ExtComplex()
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


def poly_roots(p: Poly) -> np.ndarray:
    """All roots of p with multiplicity.

    Companion-matrix eigenvalues, then one Newton step per root.  The
    Newton step is kept only when it does not increase the residual, which
    protects multiple roots where p' vanishes.
    """
    if p.is_zero():
        raise ValueError("poly_roots: zero polynomial has no well-defined roots")
    if p.degree < 1:
        raise ValueError("poly_roots: degree must be >= 1")
    c = np.asarray(p.coeffs, dtype=complex)
    d = p.degree
    monic = c[:-1] / c[-1]
    comp = np.zeros((d, d), dtype=complex)
    comp[1:, :-1] = np.eye(d - 1)
    comp[:, -1] = -monic
    roots = np.linalg.eigvals(comp)
    dp = p.derivative()
    polished = np.empty_like(roots)
    for k, r in enumerate(roots):
        val = p(r)
        slope = dp(r)
        if slope != 0:
            cand = r - val / slope
            polished[k] = cand if abs(p(cand)) <= abs(val) else r
        else:
            polished[k] = r
    # deterministic ordering: by real part, then imaginary part
    order = np.lexsort((polished.imag, polished.real))
    return polished[order]


def poly_from_roots(roots, leading: complex = 1.0) -> Poly:
    """Expand leading * prod(x - r)."""
    coeffs = np.array([1.0 + 0j])
    for r in roots:
        coeffs = np.convolve(coeffs, np.array([-r, 1.0]))
    return Poly(leading * coeffs)


def poly_mul(p: Poly, q: Poly) -> Poly:
    return Poly(np.convolve(np.asarray(p.coeffs), np.asarray(q.coeffs)))


def poly_add(p: Poly, q: Poly) -> Poly:
    n = max(len(p.coeffs), len(q.coeffs))
    out = np.zeros(n, dtype=complex)
    out[: len(p.coeffs)] += p.coeffs
    out[: len(q.coeffs)] += q.coeffs
    return Poly(out)


def poly_scale(p: Poly, s: complex) -> Poly:
    return Poly([s * c for c in p.coeffs])


def poly_compose(p: Poly, q: Poly) -> Poly:
    """p(q(x)) by Horner on polynomials."""
    acc = Poly([0])
    for c in reversed(p.coeffs):
        acc = poly_add(poly_mul(acc, q), Poly([c]))
    return acc

"""Henon factors h(z1, z2) = (p(z1) + a*z2, z1) and their compositions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .numerics import ExtComplex, Poly, ext, poly_eval

# Points of indeterminacy at infinity, homogeneous coordinates [w0:w1:w2].
I_PLUS = (0, 0, 1)
I_MINUS = (0, 1, 0)


@dataclass(frozen=True)
class ProjectiveBehavior:
    i_plus: tuple = I_PLUS
    i_minus: tuple = I_MINUS


PROJECTIVE = ProjectiveBehavior()


@dataclass(frozen=True)
class HenonFactor:
    p: Poly
    a: complex

    def __post_init__(self):
        if not isinstance(self.p, Poly):
            object.__setattr__(self, "p", Poly(self.p))
        object.__setattr__(self, "a", complex(self.a))
        if self.p.degree < 2:
            raise ValueError(f"Henon factor needs deg p >= 2, got {self.p.degree}")
        if self.a == 0:
            raise ValueError("Henon factor needs a != 0")

    @property
    def degree(self) -> int:
        return self.p.degree

    def __call__(self, z1, z2):
        return self.p(z1) + self.a * z2, z1

    def inverse(self, z1, z2):
        return z2, (z1 - self.p(z2)) / self.a

    def swapped_inverse(self) -> "HenonFactor":
        """Factor g with h^-1 = s o g o s, s the coordinate swap."""
        return HenonFactor(Poly([-c / self.a for c in self.p.coeffs]), 1.0 / self.a)

    def escape_radius(self) -> float:
        c = self.p.coeffs
        low = sum(abs(x) for x in c[:-1])
        return max(1.0, (abs(self.a) + 2.0 + low) / abs(c[-1]))


@dataclass(frozen=True)
class EscapeCert:
    """On {|z1| >= max(|z2|, radius)} one map application multiplies |z1| by >= growth."""

    radius: float
    growth: float = 2.0


class HenonType:
    """Composition h_1 o ... o h_m of Henon factors.

    Factors are listed left to right and applied right to left, so
    ``factors[-1]`` acts first.  Instances are immutable.
    """

    __slots__ = ("factors", "degree", "jacobian_det", "_arrays")

    def __init__(self, factors: Iterable[HenonFactor]):
        fs = tuple(factors)
        if not fs:
            raise ValueError("HenonType needs at least one factor")
        for f in fs:
            if not isinstance(f, HenonFactor):
                raise TypeError("factors must be HenonFactor instances")
        object.__setattr__(self, "factors", fs)
        object.__setattr__(self, "degree", math.prod(f.degree for f in fs))
        det = 1 + 0j
        for f in fs:
            det *= -f.a
        object.__setattr__(self, "jacobian_det", det)
        object.__setattr__(self, "_arrays", None)

    def __setattr__(self, name, value):
        raise AttributeError("HenonType is immutable")

    @classmethod
    def single(cls, p, a) -> "HenonType":
        return cls([HenonFactor(p if isinstance(p, Poly) else Poly(p), a)])

    @classmethod
    def quadratic(cls, c: complex, a: complex) -> "HenonType":
        """The classical family p(z) = z**2 + c."""
        return cls.single(Poly([c, 0, 1]), a)

    def __eq__(self, other) -> bool:
        return isinstance(other, HenonType) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    def __repr__(self) -> str:
        return f"HenonType({list(self.factors)!r})"

    def compose(self, other: "HenonType") -> "HenonType":
        """self o other."""
        return HenonType(self.factors + other.factors)

    def iterate(self, n: int) -> "HenonType":
        if n < 1:
            raise ValueError("iterate needs n >= 1")
        return HenonType(self.factors * n)

    def swapped_inverse(self) -> "HenonType":
        """Henon-type g with f^-1 = s o g o s where s(z1, z2) = (z2, z1).

        f^-1 = h_m^-1 o ... o h_1^-1 = s o g_m o ... o g_1 o s.
        """
        return HenonType([f.swapped_inverse() for f in reversed(self.factors)])

    def arrays(self):
        """Factor data in application order for the compiled kernels.

        Returns (coeffs[m, dmax+1], degrees[m], a[m]).
        """
        if self._arrays is None:
            order = list(reversed(self.factors))
            dmax = max(f.degree for f in order)
            coeffs = np.zeros((len(order), dmax + 1), dtype=np.complex128)
            for i, f in enumerate(order):
                coeffs[i, : f.degree + 1] = f.p.coeffs
            degrees = np.array([f.degree for f in order], dtype=np.int64)
            avals = np.array([f.a for f in order], dtype=np.complex128)
            object.__setattr__(self, "_arrays", (coeffs, degrees, avals))
        return self._arrays

    def tail_constants(self):
        """(kappa, defect) data for the escaping-orbit Green tail.

        With D_i the product of the degrees applied after factor i, one
        application sends log|w1| to d*log|w1| + K + E, K = sum D_i log|c_i|.
        kappa = K / (d - 1) absorbs the constant; ``defect_weights`` gives
        (D_i, S_i / |c_i|) so that |E| <= sum D_i * -log(1 - S_i/(|c_i| |w1|)).
        """
        coeffs, degrees, avals = self.arrays()
        m = len(degrees)
        K = 0.0
        weights = np.zeros((m, 2))
        for i in range(m):
            after = int(np.prod(degrees[i + 1:])) if i + 1 < m else 1
            di = degrees[i]
            lead = abs(coeffs[i, di])
            K += after * math.log(lead)
            low = float(np.sum(np.abs(coeffs[i, :di]))) + abs(avals[i])
            weights[i] = (after, low / lead)
        return K / (self.degree - 1), weights


def apply(f: HenonType, z) -> tuple[ExtComplex, ExtComplex]:
    """f(z) in extended arithmetic; factors applied right to left."""
    z1, z2 = ext(z[0]), ext(z[1])
    for h in reversed(f.factors):
        z1, z2 = poly_eval(h.p, z1) + z2 * h.a, z1
    return z1, z2


def apply_inverse(f: HenonType, z) -> tuple[ExtComplex, ExtComplex]:
    """f^-1(z); inverse factors applied left to right."""
    z1, z2 = ext(z[0]), ext(z[1])
    for h in f.factors:
        z1, z2 = z2, (z1 - poly_eval(h.p, z2)) / h.a
    return z1, z2


def apply_complex(f: HenonType, z1: complex, z2: complex):
    for h in reversed(f.factors):
        z1, z2 = h.p(z1) + h.a * z2, z1
    return z1, z2


def apply_inverse_complex(f: HenonType, z1: complex, z2: complex):
    for h in f.factors:
        z1, z2 = z2, (z1 - h.p(z2)) / h.a
    return z1, z2


def jacobian(f: HenonType, z) -> np.ndarray:
    """Chain-rule product of the factor Jacobians [[p'(z1), a], [1, 0]]."""
    z1, z2 = complex(z[0]), complex(z[1])
    J = np.eye(2, dtype=complex)
    for h in reversed(f.factors):
        Jh = np.array([[h.p.derivative()(z1), h.a], [1, 0]], dtype=complex)
        J = Jh @ J
        z1, z2 = h.p(z1) + h.a * z2, z1
    return J


def jacobian_inverse(f: HenonType, z) -> np.ndarray:
    """Jacobian of f^-1 at z."""
    z1, z2 = complex(z[0]), complex(z[1])
    J = np.eye(2, dtype=complex)
    for h in f.factors:
        Jh = np.array([[0, 1], [1 / h.a, -h.p.derivative()(z2) / h.a]], dtype=complex)
        J = Jh @ J
        z1, z2 = z2, (z1 - h.p(z2)) / h.a
    return J


def escape_certificate(f: HenonType) -> EscapeCert:
    return EscapeCert(radius=max(h.escape_radius() for h in f.factors), growth=2.0)


# -- text format -----------------------------------------------------------

def _parse_complex_list(text: str, key: str) -> list[complex]:
    parts = [s.strip() for s in text.split(",")]
    if len(parts) % 2 or not parts or any(not s for s in parts):
        raise ValueError(f"{key}: expected comma-separated re,im pairs, got {text!r}")
    try:
        nums = [float(s) for s in parts]
    except ValueError:
        raise ValueError(f"{key}: non-numeric entry in {text!r}") from None
    return [complex(nums[i], nums[i + 1]) for i in range(0, len(nums), 2)]


def parse_map(text: str) -> HenonType:
    """Parse lines ``factor a=<re>,<im> p=<c0re>,<c0im>,...`` (one per factor).

    Blank lines and ``#`` comments are ignored; factor order is the
    composition order (the last line acts first).
    """
    factors = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] != "factor":
            raise ValueError(f"line {lineno}: expected 'factor', got {tokens[0]!r}")
        fields = {}
        for tok in tokens[1:]:
            if "=" not in tok:
                raise ValueError(f"line {lineno}: malformed token {tok!r}")
            k, v = tok.split("=", 1)
            if k not in ("a", "p"):
                raise ValueError(f"line {lineno}: unknown key {k!r}")
            if k in fields:
                raise ValueError(f"line {lineno}: duplicate key {k!r}")
            fields[k] = v
        for k in ("a", "p"):
            if k not in fields:
                raise ValueError(f"line {lineno}: missing key {k!r}")
        a = _parse_complex_list(fields["a"], "a")
        if len(a) != 1:
            raise ValueError(f"line {lineno}: a must be a single re,im pair")
        p = _parse_complex_list(fields["p"], "p")
        factors.append(HenonFactor(Poly(p), a[0]))
    if not factors:
        raise ValueError("map description contains no factors")
    return HenonType(factors)


def _fmt(z: complex) -> str:
    return f"{z.real:.17g},{z.imag:.17g}"


def format_map(f: HenonType) -> str:
    lines = []
    for h in f.factors:
        coeffs = ",".join(_fmt(c) for c in h.p.coeffs)
        lines.append(f"factor a={_fmt(h.a)} p={coeffs}")
    return "\n".join(lines) + "\n"

"""Green functions G+/G-, orbit classification, level sets, Holder estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .henon import HenonType, escape_certificate

DEFAULT_BUDGET = 2048


@dataclass(frozen=True)
class GreenValue:
    value: float
    iterations: int
    error_bound: float
    escaped_at: Optional[int] = None


@dataclass(frozen=True)
class Escaping:
    n: int


@dataclass(frozen=True)
class BoundedWithinBudget:
    budget: int


@dataclass(frozen=True)
class PointClass:
    forward: object
    backward: object

    @property
    def in_K(self) -> bool:
        return isinstance(self.forward, BoundedWithinBudget) and isinstance(
            self.backward, BoundedWithinBudget)


@dataclass(frozen=True)
class HolderEstimate:
    n: int
    beta_hat: float
    region: tuple
    max_log_norm: float = field(default=math.nan, compare=False)


class GreenParams:
    """Per-map constants fed to the compiled evaluator."""

    def __init__(self, f: HenonType):
        self.f = f
        self.coeffs, self.degrees, self.avals = f.arrays()
        self.radius = escape_certificate(f).radius
        self.d = float(f.degree)
        self.kappa, self.weights = f.tail_constants()
        logA = 0.0
        for i in range(len(self.degrees)):
            after = int(np.prod(self.degrees[i + 1:])) if i + 1 < len(self.degrees) else 1
            di = self.degrees[i]
            A = max(1.0, float(np.sum(np.abs(self.coeffs[i, : di + 1]))) + abs(self.avals[i]))
            logA += after * math.log(A)
        # G+(w) <= log+ ||w|| + lam everywhere
        self.lam = logA / (self.d - 1.0)

    def args(self):
        return (self.coeffs, self.degrees, self.avals, self.radius, self.d,
                self.kappa, self.weights, self.lam)


_PARAM_CACHE: dict = {}


def params_for(f: HenonType) -> GreenParams:
    p = _PARAM_CACHE.get(f)
    if p is None:
        if len(_PARAM_CACHE) > 256:
            _PARAM_CACHE.clear()
        p = _PARAM_CACHE[f] = GreenParams(f)
    return p


def _check_tol(tol):
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol!r}")


def green_plus(f: HenonType, z, tol: float = 1e-10, budget: int = DEFAULT_BUDGET) -> GreenValue:
    """G+(z) with a certified error bound.

    Non-escaping orbits stop as soon as d**-n (log+ ||f^n z|| + lam) <= tol,
    since G+(z) = d**-n G+(f^n z) <= that quantity.
    """
    _check_tol(tol)
    pr = params_for(f)
    v, b, it, es = K.green_point(complex(z[0]), complex(z[1]), *pr.args(), float(tol), int(budget))
    return GreenValue(float(v), int(it), float(b), None if es < 0 else int(es))


def green_minus(f: HenonType, z, tol: float = 1e-10, budget: int = DEFAULT_BUDGET) -> GreenValue:
    """G-(z) = G+ of the swapped inverse at the swapped point."""
    return green_plus(f.swapped_inverse(), (z[1], z[0]), tol, budget)


def green_plus_grid(f: HenonType, z1, z2, tol: float = 1e-10, budget: int = DEFAULT_BUDGET):
    """Vectorised G+; returns (values, error_bounds) shaped like z1."""
    _check_tol(tol)
    z1 = np.asarray(z1, dtype=np.complex128)
    z2 = np.broadcast_to(np.asarray(z2, dtype=np.complex128), z1.shape)
    shape = z1.shape
    pr = params_for(f)
    val, bnd, _, _ = K.green_many(np.ascontiguousarray(z1.ravel()),
                                  np.ascontiguousarray(z2.ravel()),
                                  *pr.args(), float(tol), int(budget))
    return val.reshape(shape), bnd.reshape(shape)


def green_minus_grid(f: HenonType, z1, z2, tol: float = 1e-10, budget: int = DEFAULT_BUDGET):
    z1 = np.asarray(z1, dtype=np.complex128)
    z2 = np.broadcast_to(np.asarray(z2, dtype=np.complex128), z1.shape)
    return green_plus_grid(f.swapped_inverse(), z2, z1, tol, budget)


def _tag(n: int, budget: int):
    return Escaping(n) if n >= 0 else BoundedWithinBudget(budget)


def classify(f: HenonType, z, budget: int = DEFAULT_BUDGET) -> PointClass:
    """Forward and backward escape tags; sound on Escaping, semi-decision on Bounded."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    pr = params_for(f)
    fwd = K.escape_index(complex(z[0]), complex(z[1]), pr.coeffs, pr.degrees, pr.avals,
                         pr.radius, int(budget))
    pi = params_for(f.swapped_inverse())
    bwd = K.escape_index(complex(z[1]), complex(z[0]), pi.coeffs, pi.degrees, pi.avals,
                         pi.radius, int(budget))
    return PointClass(_tag(fwd, budget), _tag(bwd, budget))


def escape_indices(f: HenonType, z1, z2, budget: int = DEFAULT_BUDGET, backward: bool = False):
    """Vectorised forward (or backward) certificate index; -1 means bounded within budget."""
    z1 = np.asarray(z1, dtype=np.complex128)
    z2 = np.broadcast_to(np.asarray(z2, dtype=np.complex128), z1.shape)
    if backward:
        f, z1, z2 = f.swapped_inverse(), z2, z1
    pr = params_for(f)
    out = K.escape_many(np.ascontiguousarray(z1.ravel()), np.ascontiguousarray(z2.ravel()),
                        pr.coeffs, pr.degrees, pr.avals, pr.radius, int(budget))
    return out.reshape(z1.shape)


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle [re0, re1] x [im0, im1] in a parameter plane."""

    re0: float
    re1: float
    im0: float
    im1: float

    def __post_init__(self):
        if not (self.re1 > self.re0 and self.im1 > self.im0):
            raise ValueError(f"degenerate window {self}")

    @classmethod
    def centered(cls, center: complex, half_width: float) -> "Window":
        c = complex(center)
        return cls(c.real - half_width, c.real + half_width, c.imag - half_width, c.imag + half_width)

    def nodes(self, w: int, h: int) -> np.ndarray:
        """Pixel sample points, row 0 at the top (largest imaginary part)."""
        if w < 1 or h < 1:
            raise ValueError(f"resolution must be positive, got {w}x{h}")
        xs = np.linspace(self.re0, self.re1, w) if w > 1 else np.array([(self.re0 + self.re1) / 2])
        ys = np.linspace(self.im1, self.im0, h) if h > 1 else np.array([(self.im0 + self.im1) / 2])
        return xs[None, :] + 1j * ys[:, None]


@dataclass
class GreenGrid:
    values: np.ndarray
    error_bounds: np.ndarray
    points: np.ndarray

    def grid(self):
        """Per-pixel GreenValue objects (slow; for small grids)."""
        return [[GreenValue(float(v), -1, float(b)) for v, b in zip(rv, rb)]
                for rv, rb in zip(self.values, self.error_bounds)]


def render_green(f: HenonType, window: Window, resolution, tol: float = 1e-8,
                 base=(0j, 0j), direction=(1 + 0j, 0j), budget: int = DEFAULT_BUDGET,
                 minus: bool = False) -> GreenGrid:
    """G+ (or G-) sampled on the line base + t*direction, t over the window.

    The default is the complex line {z2 = base[1]}.
    """
    w, h = resolution
    if w < 1 or h < 1:
        raise ValueError(f"resolution must be positive, got {w}x{h}")
    t = window.nodes(w, h)
    z1 = base[0] + t * direction[0]
    z2 = base[1] + t * direction[1]
    fn = green_minus_grid if minus else green_plus_grid
    vals, bnds = fn(f, z1, z2, tol, budget)
    return GreenGrid(vals, bnds, t)


def level_set_potential(f: HenonType, c: float, z, tol: float = 1e-10) -> float:
    """G_c+(z) = max(G+(z) - c, 0)."""
    if c < 0:
        raise ValueError("level c must be >= 0")
    return max(green_plus(f, z, tol).value - c, 0.0)


DEFAULT_HOLDER_REGION = ((-3.0, 3.0), (-3.0, 3.0), (-3.0, 3.0), (-3.0, 3.0))


def _cycle_log_norms(f: HenonType, points, depths, fs: bool) -> np.ndarray:
    """log ||D f^n|| at periodic points, chaining Jacobians along the stored cycle.

    Re-using the cycle instead of iterating keeps the orbit on K; plain
    iteration would drift off a saddle cycle after a few dozen steps.
    """
    from .henon import apply_complex, jacobian

    out = np.empty((len(points), len(depths)))
    for k, (p, period) in enumerate(points):
        cyc = [p]
        for _ in range(period - 1):
            cyc.append(apply_complex(f, *cyc[-1]))
        jacs = [jacobian(f, z) for z in cyc]
        A = np.eye(2, dtype=complex)
        g = 0
        idx = 0
        for n in range(1, depths[-1] + 1):
            A = jacs[(n - 1) % period] @ A
            big = np.max(np.abs(A))
            _, e = math.frexp(big)
            A = A * math.ldexp(1.0, -e)
            g += e
            if n == depths[idx]:
                w = cyc[n % period]
                m1, m2, ew = K.renorm(complex(w[0]), complex(w[1]), 0)
                if fs:
                    out[k, idx] = K.log_norm_fs(complex(p[0]), complex(p[1]), m1, m2, ew,
                                                A[0, 0], A[0, 1], A[1, 0], A[1, 1], g)
                else:
                    out[k, idx] = K.log_norm_euclid(A[0, 0], A[0, 1], A[1, 0], A[1, 1], g)
                idx += 1
    return out


def holder_exponent(f: HenonType, region=DEFAULT_HOLDER_REGION, depths: Sequence[int] = (1,),
                    per_axis: int = 9, metric: str = "fubini_study",
                    periodic: int = 2) -> list:
    """Depth-indexed estimates beta_hat = min(1, log d / max (1/n) log ||D f^n||).

    ``region`` gives (lo, hi) for Re z1, Im z1, Re z2, Im z2.  The max runs over
    a tensor grid with ``per_axis`` nodes per real axis plus the periodic points
    of period <= ``periodic`` inside the region.  Grid orbits almost all escape,
    so without points of K the estimate would drift to 1 as n grows.  With the
    Fubini-Study metric the norm is measured between tangent spaces of P^2, so
    escaping orbits (attracted to I-) no longer dominate the maximum.
    """
    if metric not in ("fubini_study", "euclidean"):
        raise ValueError(f"unknown metric {metric!r}")
    depths = sorted(set(int(n) for n in depths))
    if not depths or depths[0] < 1:
        raise ValueError("depths must be positive integers")
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in region]
    X1, Y1, X2, Y2 = np.meshgrid(*axes, indexing="ij")
    z1 = (X1 + 1j * Y1).ravel()
    z2 = (X2 + 1j * Y2).ravel()
    coeffs, degrees, avals = f.arrays()
    fs = metric == "fubini_study"
    logs = K.log_jac_norms(z1, z2, coeffs, degrees, avals, np.array(depths, dtype=np.int64), fs)
    if periodic >= 1:
        from .periodic import periodic_points

        (a0, a1), (b0, b1), (c0, c1), (e0, e1) = region
        pts = []
        for k in range(1, periodic + 1):
            for p in periodic_points(f, k):
                w1, w2 = p.point
                if a0 <= w1.real <= a1 and b0 <= w1.imag <= b1 and c0 <= w2.real <= c1 \
                        and e0 <= w2.imag <= e1:
                    pts.append((p.point, k))
        if pts:
            logs = np.vstack([logs, _cycle_log_norms(f, pts, depths, fs)])
    logd = math.log(f.degree)
    out = []
    for i, n in enumerate(depths):
        col = logs[:, i]
        col = col[~np.isnan(col)]
        # -inf is a genuine underflow (orbits pulled into I-)
        mx = float(np.max(col)) / n if col.size else -math.inf
        beta = 1.0 if mx <= logd else logd / mx
        out.append(HolderEstimate(n, min(1.0, beta), tuple(region), mx))
    return out

"""Periodic points of Henon-type maps: exact elimination and damped Newton."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .henon import HenonType, escape_certificate, jacobian
from .numerics import Poly, poly_add, poly_compose, poly_mul, poly_roots, poly_scale

KIND_TOL = 1e-9
DEDUP_RADIUS = 1e-7
# near a multiple root Newton is only linear: residual eps leaves an error ~ sqrt(eps)
MULTIPLE_RADIUS = 1e-5
SINGULAR_TOL = 1e-3
MAX_SOLUTIONS = 4096
MAX_HALVINGS = 40


@dataclass(frozen=True)
class PeriodicPoint:
    point: tuple
    period: int
    multipliers: tuple
    residual: float
    kind: str


def classify_multipliers(m1: complex, m2: complex, tol: float = KIND_TOL) -> str:
    inside = [abs(m) < 1.0 - tol for m in (m1, m2)]
    outside = [abs(m) > 1.0 + tol for m in (m1, m2)]
    if all(inside):
        return "attracting"
    if all(outside):
        return "repelling"
    if any(inside) and any(outside):
        return "saddle"
    return "neutral"


def _orbit(f: HenonType, n: int, z1, z2):
    """f^n and D f^n at arrays of points; J has shape z.shape + (2, 2)."""
    z1 = np.asarray(z1, dtype=np.complex128)
    z2 = np.asarray(z2, dtype=np.complex128)
    J = np.zeros(z1.shape + (2, 2), dtype=np.complex128)
    J[..., 0, 0] = 1.0
    J[..., 1, 1] = 1.0
    order = list(reversed(f.factors))
    for _ in range(n):
        for h in order:
            dp = h.p.derivative()(z1)
            # [[p', a], [1, 0]] @ J
            r0 = dp[..., None] * J[..., 0, :] + h.a * J[..., 1, :]
            J = np.stack([r0, J[..., 0, :]], axis=-2)
            z1, z2 = h.p(z1) + h.a * z2, z1
    return z1, z2, J


def _make_point(f: HenonType, n: int, z1: complex, z2: complex) -> PeriodicPoint:
    w1, w2, J = _orbit(f, n, np.array([z1]), np.array([z2]))
    res = math.hypot(abs(w1[0] - z1), abs(w2[0] - z2))
    ev = np.linalg.eigvals(J[0])
    ev = sorted(ev, key=lambda m: (abs(m), m.real, m.imag))
    return PeriodicPoint((complex(z1), complex(z2)), n, (complex(ev[0]), complex(ev[1])),
                         float(res), classify_multipliers(ev[0], ev[1]))


def _lex(points):
    return sorted(points, key=lambda p: (p.point[0].real, p.point[1].real,
                                         p.point[0].imag, p.point[1].imag))


def fixed_points_exact(f: HenonType) -> list:
    """Fixed points of a single factor: z2 = z1 and p(z1) + (a - 1) z1 = 0.

    Roots are returned with multiplicity, so the count is always d.
    """
    if len(f.factors) != 1:
        raise ValueError("exact fixed points need a single Henon factor")
    h = f.factors[0]
    q = poly_add(h.p, Poly([0, h.a - 1]))
    return _lex([_make_point(f, 1, x, x) for x in poly_roots(q)])


def period_two_exact(f: HenonType) -> list:
    """Solutions of f^2(z) = z for a single factor, with multiplicity (d^2 of them).

    With y = p(x) + a y the equations read p(x) = (1 - a) y and p(y) = (1 - a) x.
    """
    if len(f.factors) != 1:
        raise ValueError("exact period-2 points need a single Henon factor")
    h = f.factors[0]
    b = 1.0 - h.a
    if abs(b) < 1e-14:
        xs = poly_roots(h.p)
        pts = [(x, y) for x in xs for y in xs]
    else:
        # p(p(x) / b) - b x = 0, degree d^2
        inner = poly_scale(h.p, 1.0 / b)
        q = poly_add(poly_compose(h.p, inner), Poly([0, -b]))
        pts = [(x, h.p(x) / b) for x in poly_roots(q)]
    return _lex([_make_point(f, 2, complex(x), complex(y)) for x, y in pts])


def elimination_polynomial(f: HenonType, n: int) -> Poly:
    """One-variable polynomial whose roots are the x-coordinates (n <= 2, one factor)."""
    h = f.factors[0]
    if n == 1:
        return poly_add(h.p, Poly([0, h.a - 1]))
    b = 1.0 - h.a
    if abs(b) < 1e-14:
        # x ranges over the roots of p, each paired with every root y
        return poly_pow(h.p, h.p.degree)
    return poly_add(poly_compose(h.p, poly_scale(h.p, 1.0 / b)), Poly([0, -b]))


def poly_pow(p: Poly, k: int) -> Poly:
    out = Poly([1])
    for _ in range(k):
        out = poly_mul(out, p)
    return out


class PeriodicSet(list):
    """Verified solutions of f^n(z) = z plus the completeness report."""

    def __init__(self, points, period: int, expected: int, degenerate: bool = False):
        super().__init__(points)
        self.period = period
        self.expected = expected
        self.degenerate = degenerate

    @property
    def complete(self) -> bool:
        return len(self) == self.expected


def default_seed_box(f: HenonType):
    R = escape_certificate(f).radius
    return ((-R, R),) * 4


def _newton(f: HenonType, n: int, z1, z2, iters: int = 80):
    z1 = z1.copy()
    z2 = z2.copy()
    with np.errstate(all="ignore"):
        w1, w2, J = _orbit(f, n, z1, z2)
        F1, F2 = w1 - z1, w2 - z2
        res = np.hypot(np.abs(F1), np.abs(F2))
        alive = np.isfinite(res)
        for _ in range(iters):
            active = alive & (res > 1e-14 * (1.0 + np.hypot(np.abs(z1), np.abs(z2))))
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            A = J[idx].copy()
            A[:, 0, 0] -= 1.0
            A[:, 1, 1] -= 1.0
            det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
            ok = np.abs(det) > 0
            det = np.where(ok, det, 1.0)
            d1 = (A[:, 1, 1] * F1[idx] - A[:, 0, 1] * F2[idx]) / det
            d2 = (-A[:, 1, 0] * F1[idx] + A[:, 0, 0] * F2[idx]) / det
            t = np.ones(len(idx))
            pending = ok.copy()
            alive[idx[~ok]] = False
            for _ in range(MAX_HALVINGS):
                if not pending.any():
                    break
                k = idx[pending]
                n1 = z1[k] - t[pending] * d1[pending]
                n2 = z2[k] - t[pending] * d2[pending]
                m1, m2, Jn = _orbit(f, n, n1, n2)
                G1, G2 = m1 - n1, m2 - n2
                r = np.hypot(np.abs(G1), np.abs(G2))
                better = np.isfinite(r) & (r < res[k])
                acc = k[better]
                z1[acc], z2[acc] = n1[better], n2[better]
                F1[acc], F2[acc] = G1[better], G2[better]
                J[acc], res[acc] = Jn[better], r[better]
                sub = np.nonzero(pending)[0]
                pending[sub[better]] = False
                t[sub[~better]] *= 0.5
            # seeds that could not decrease the residual are finished
            alive[idx[pending]] = False
    return z1, z2, res, alive | (res <= 1e-10 * (1.0 + np.hypot(np.abs(z1), np.abs(z2))))


def periodic_points(f: HenonType, n: int, seed_box=None, seeds_per_axis: int = 7,
                    extra_seeds=None) -> PeriodicSet:
    """Solutions of f^n(z) = z by damped Newton from a tensor seed grid.

    Converged points are kept when the residual is <= 1e-10 (1 + ||z||) and
    deduplicated at distance 1e-7, or 1e-5 where D f^n - I is nearly singular
    (a multiple root).  ``extra_seeds`` appends given points.
    """
    if n < 1:
        raise ValueError("period n must be >= 1")
    expected = f.degree ** n
    if expected > MAX_SOLUTIONS:
        raise ValueError(f"d^n = {expected} exceeds the search budget {MAX_SOLUTIONS}")
    if seeds_per_axis < 1:
        raise ValueError("seeds_per_axis must be >= 1")
    box = seed_box if seed_box is not None else default_seed_box(f)
    axes = [np.linspace(lo, hi, seeds_per_axis) if seeds_per_axis > 1
            else np.array([(lo + hi) / 2]) for lo, hi in box]
    X1, Y1, X2, Y2 = np.meshgrid(*axes, indexing="ij")
    s1 = (X1 + 1j * Y1).ravel()
    s2 = (X2 + 1j * Y2).ravel()
    if extra_seeds is not None and len(extra_seeds):
        e = np.asarray(extra_seeds, dtype=np.complex128).reshape(-1, 2)
        s1 = np.concatenate([s1, e[:, 0]])
        s2 = np.concatenate([s2, e[:, 1]])
    z1, z2, res, _ = _newton(f, n, s1, s2)
    good = np.isfinite(res) & (res <= 1e-10 * (1.0 + np.hypot(np.abs(z1), np.abs(z2))))
    z1, z2, res = z1[good], z2[good], res[good]
    sing = _near_singular(f, n, z1, z2)
    # best residual first, so a cluster is represented by its most accurate member
    order = sorted(range(len(z1)), key=lambda k: (res[k], z1[k].real, z2[k].real,
                                                  z1[k].imag, z2[k].imag))
    kept: list = []
    for k in order:
        a, b = z1[k], z2[k]
        if all(math.hypot(abs(a - c), abs(b - d)) > (MULTIPLE_RADIUS if sing[k] and s else DEDUP_RADIUS)
               for c, d, s in kept):
            kept.append((a, b, sing[k]))
    pts = [_make_point(f, n, a, b) for a, b, _ in kept]
    pts = [p for p in pts if p.residual <= 1e-10 * (1.0 + math.hypot(*map(abs, p.point)))]
    degenerate = False
    if len(pts) < expected and len(f.factors) == 1 and n <= 2:
        degenerate = _near_multiple(elimination_polynomial(f, n))
    return PeriodicSet(_lex(pts), n, expected, degenerate)


def _near_singular(f: HenonType, n: int, z1, z2) -> np.ndarray:
    """Smallest singular value of D f^n - I below SINGULAR_TOL."""
    if len(z1) == 0:
        return np.zeros(0, dtype=bool)
    _, _, J = _orbit(f, n, z1, z2)
    A = J - np.eye(2)
    return np.linalg.svd(A, compute_uv=False)[:, -1] < SINGULAR_TOL


def _near_multiple(q: Poly, sep: float = 1e-5) -> bool:
    r = np.asarray(poly_roots(q))
    if len(r) < 2:
        return False
    gaps = np.abs(r[:, None] - r[None, :])
    np.fill_diagonal(gaps, np.inf)
    return bool(gaps.min() < sep)


def saddle_measure(f: HenonType, n: int, test: Callable, points: Optional[list] = None, **kw) -> float:
    """Sum of test(point) over saddle period-n points, each weighted 1 / #solutions."""
    pts = points if points is not None else periodic_points(f, n, **kw)
    if not pts:
        return 0.0
    total = 0.0
    for p in pts:
        if p.kind == "saddle":
            total += float(np.asarray(test(p.point[0], p.point[1])))
    return total / len(pts)


CSV_HEADER = ["re1", "im1", "re2", "im2", "period", "mult1_re", "mult1_im",
              "mult2_re", "mult2_im", "kind", "residual"]


def write_csv(points, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    g = "{:.17g}".format
    for p in points:
        (a, b), (m1, m2) = p.point, p.multipliers
        w.writerow([g(a.real), g(a.imag), g(b.real), g(b.imag), p.period,
                    g(m1.real), g(m1.imag), g(m2.real), g(m2.imag), p.kind, g(p.residual)])


def check_jacobian(f: HenonType, p: PeriodicPoint) -> float:
    """Relative mismatch between the multiplier product and det(Df)^n."""
    target = f.jacobian_det ** p.period
    prod = p.multipliers[0] * p.multipliers[1]
    return abs(prod - target) / max(abs(target), 1e-300)


__all__ = ["PeriodicPoint", "PeriodicSet", "fixed_points_exact", "period_two_exact",
           "periodic_points", "saddle_measure", "classify_multipliers", "write_csv",
           "check_jacobian", "jacobian"]

"""Parametrized curves, Nevanlinna characteristic and currents tau_r.

Areas use the Euclidean form: A(t) = int_{|xi|<t} |phi'|^2 dA.  The test-form
pairing uses the same beta as module currents (beta restricted to a complex
line is 2 dA) and divides by the characteristic taken with that beta, so the
pairing against chi = 1 is exactly 1 in the continuum limit.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .currents import TestForm, green_potential, pair_form
from .green import green_plus_grid
from .henon import HenonType, jacobian

N_ANGLES = 512
RESIDUAL_TOL = 1e-8


class ManifoldError(RuntimeError):
    """Functional-equation check failed; ``xi`` is the worst sample."""

    def __init__(self, msg: str, xi: complex, residual: float):
        super().__init__(f"{msg} (worst xi = {xi!r}, residual {residual:.3g})")
        self.xi = xi
        self.residual = residual


class ParametrizedCurve:
    """xi -> phi(xi) in C^2 with derivative, sigma(xi) = |xi|.

    ``evaluate(xi)`` returns (phi1, phi2, u1, u2, log|phi'|) with u the unit
    tangent, so large derivatives never overflow; ``__call__`` returns
    ((phi1, phi2), (phi1', phi2')).
    """

    def __init__(self, func: Callable, radius: float = math.inf, label: str = "",
                 log_func: Optional[Callable] = None):
        self.func = func
        self.radius = float(radius)
        self.label = label
        self._log_func = log_func

    def __call__(self, xi):
        return self.func(np.asarray(xi, dtype=np.complex128))

    def evaluate(self, xi):
        xi = np.asarray(xi, dtype=np.complex128)
        if self._log_func is not None:
            return self._log_func(xi)
        (p1, p2), (d1, d2) = self.func(xi)
        nrm = np.sqrt(np.abs(d1) ** 2 + np.abs(d2) ** 2)
        safe = np.where(nrm > 0, nrm, 1.0)
        with np.errstate(divide="ignore"):
            logd = np.log(nrm)
        return p1, p2, d1 / safe, d2 / safe, logd

    def _check(self, r):
        if not r > 0:
            raise ValueError("radius must be > 0")
        if r > self.radius * (1 + 1e-12):
            raise ValueError(f"radius {r} exceeds the curve domain {self.radius}")

    def __repr__(self):
        return f"ParametrizedCurve({self.label or 'anonymous'}, radius={self.radius})"


def polynomial_curve(c1, c2, label: str = "") -> ParametrizedCurve:
    """phi(xi) = (sum c1[k] xi^k, sum c2[k] xi^k)."""
    P1 = np.polynomial.Polynomial(np.asarray(c1, dtype=complex))
    P2 = np.polynomial.Polynomial(np.asarray(c2, dtype=complex))
    D1, D2 = P1.deriv(), P2.deriv()

    def func(xi):
        return (P1(xi), P2(xi)), (D1(xi), D2(xi))
    return ParametrizedCurve(func, math.inf, label or f"poly{len(P1.coef)}")


# -- stable manifolds ------------------------------------------------------

@dataclass(frozen=True)
class Saddle:
    point: tuple
    period: int
    lambda_s: complex
    v_s: tuple
    lambda_u: complex = 0j

    def __post_init__(self):
        if not abs(self.lambda_s) < 1 - 1e-9:
            raise ValueError(f"stable multiplier {self.lambda_s} is not inside the unit disc")


def saddle_from_point(f: HenonType, point, period: int = 1) -> Saddle:
    """Eigen-data of D(f^period) at a periodic point."""
    F = f.iterate(period)
    J = jacobian(F, point)
    ev, V = np.linalg.eig(J)
    order = np.argsort(np.abs(ev))
    ls, lu = complex(ev[order[0]]), complex(ev[order[1]])
    if not (abs(ls) < 1 - 1e-9 and abs(lu) > 1 + 1e-9):
        raise ValueError(f"point {point} is not a saddle (multipliers {ls}, {lu})")
    v = V[:, order[0]]
    v = v / np.linalg.norm(v)
    return Saddle((complex(point[0]), complex(point[1])), int(period), ls,
                  (complex(v[0]), complex(v[1])), lu)


def _taylor(coeffs: np.ndarray, b: complex) -> np.ndarray:
    """q with p(b + w) - p(b) = sum_{k>=1} q[k] w^k."""
    P = np.polynomial.Polynomial(coeffs)
    d = len(coeffs) - 1
    q = np.zeros(d + 1, dtype=complex)
    fact = 1.0
    for k in range(1, d + 1):
        P = P.deriv()
        fact *= k
        q[k] = P(b) / fact
    return q


def _horner(q, w):
    acc = np.zeros_like(w) + q[-1]
    for c in q[-2:0:-1]:
        acc = acc * w + c
    return acc * w


class _Deviation:
    """Dynamics of w = z - z0 along the periodic cycle of a saddle.

    Both directions fix w = 0 exactly, so rounding in z0 does not drift.
    """

    def __init__(self, f: HenonType, s: Saddle):
        F = f.iterate(s.period)
        self.z0 = s.point
        # forward: factors applied right to left
        self.fwd = []
        b = s.point
        for h in reversed(F.factors):
            self.fwd.append((h, _taylor(h.p.coeffs, b[0])))
            b = (h.p(b[0]) + h.a * b[1], b[0])
        # inverse: factors applied left to right, Taylor data at the base z2
        self.inv = []
        b = s.point
        for h in F.factors:
            self.inv.append((h, _taylor(h.p.coeffs, b[1]), b[1]))
            b = (b[1], (b[0] - h.p(b[1])) / h.a)

    def forward(self, w1, w2):
        for h, q in self.fwd:
            w1, w2 = _horner(q, w1) + h.a * w2, w1
        return w1, w2

    def inverse(self, w1, w2, t1, t2, logt, n: int):
        for _ in range(n):
            for h, q, b2 in self.inv:
                dp = h.p.derivative()(b2 + w2)
                t1, t2 = t2, (t1 - dp * t2) / h.a
                w1, w2 = w2, (w1 - _horner(q, w2)) / h.a
            nrm = np.sqrt(np.abs(t1) ** 2 + np.abs(t2) ** 2)
            t1, t2, logt = t1 / nrm, t2 / nrm, logt + np.log(nrm)
        return w1, w2, t1, t2, logt


def linearization_radius(f: HenonType, s: Saddle, directions: int = 16) -> float:
    """Largest rho with ||F(z0+w) - z0 - DF w|| <= 0.1 |lambda_s| ||w|| for ||w|| <= rho."""
    dev = _Deviation(f, s)
    J = jacobian(f.iterate(s.period), s.point)
    th = 2 * np.pi * np.arange(directions) / directions
    U = np.stack([np.cos(th), np.sin(th) * np.exp(1j * 3 * th)])
    U = U / np.linalg.norm(U, axis=0)

    def ok(rho):
        for k in (0.25, 0.5, 0.75, 1.0):
            w = k * rho * U
            g1, g2 = dev.forward(w[0], w[1])
            lin = J @ w
            err = np.sqrt(np.abs(g1 - lin[0]) ** 2 + np.abs(g2 - lin[1]) ** 2)
            if np.any(err > 0.1 * abs(s.lambda_s) * k * rho):
                return False
        return True
    lo, hi = 0.0, 1.0
    while ok(hi) and hi < 1e6:
        lo, hi = hi, 2 * hi
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    if lo <= 0:
        raise RuntimeError("linearization radius bisection found no admissible radius")
    return lo


def auto_depth(s: Saddle, radius: float, rho_lin: float, rel: float = 1e-11) -> int:
    """Smallest n with |lambda_s|^n * radius <= rel * rho_lin."""
    return max(1, math.ceil(math.log(radius / (rel * rho_lin)) / -math.log(abs(s.lambda_s))))


def stable_manifold(f: HenonType, s: Saddle, depth: Optional[int] = None,
                    radius: float = 4.0, check: bool = True) -> ParametrizedCurve:
    """psi(xi) = F^-n(z0 + lambda_s^n xi v_s) with F = f^period, for |xi| <= radius.

    Iteration runs on deviations from the cycle of z0.  The conjugacy
    f^period(psi(xi)) = psi(lambda_s xi) is checked on 64 angles at several
    radii, relative to 1 + ||psi||.
    """
    rho = linearization_radius(f, s)
    n = auto_depth(s, radius, rho) if depth is None else int(depth)
    if abs(s.lambda_s) ** n * radius > rho:
        raise ValueError(f"depth {n} leaves the seed outside the linearization radius {rho:.3g}")
    dev = _Deviation(f, s)
    lam = s.lambda_s
    v1, v2 = s.v_s
    z01, z02 = s.point

    def core(xi, m=n):
        xi = np.asarray(xi, dtype=np.complex128)
        sc = lam ** m
        w1, w2 = sc * xi * v1, sc * xi * v2
        t1 = np.full(xi.shape, (sc / abs(sc)) * v1)
        t2 = np.full(xi.shape, (sc / abs(sc)) * v2)
        logt = np.full(xi.shape, m * math.log(abs(lam)))
        return dev.inverse(w1, w2, t1, t2, logt, m)

    def log_func(xi):
        w1, w2, t1, t2, logt = core(xi)
        return z01 + w1, z02 + w2, t1, t2, logt

    def func(xi):
        w1, w2, t1, t2, logt = core(xi)
        g = np.exp(logt)
        return (z01 + w1, z02 + w2), (t1 * g, t2 * g)

    curve = ParametrizedCurve(func, radius, f"W^s({z01:.6g}, {z02:.6g}) n={n}", log_func)
    curve.depth = n
    curve.saddle = s
    curve.deviation = lambda xi, m=n: core(xi, m)[:2]
    curve.deviation_forward = dev.forward
    if check:
        worst = conjugacy_residual(curve, radius)
        if worst[1] > RESIDUAL_TOL:
            raise ManifoldError("stable manifold conjugacy check failed", worst[0], worst[1])
    return curve


def conjugacy_residual(curve: ParametrizedCurve, radius: float, angles: int = 64,
                       depth: Optional[int] = None):
    """(worst xi, max relative residual) of F(psi(xi)) - psi(lambda_s xi)."""
    s = curve.saddle
    m = curve.depth if depth is None else depth
    th = 2 * np.pi * np.arange(angles) / angles
    xi = np.concatenate([r * np.exp(1j * th) for r in radius * np.array([0.25, 0.5, 0.75, 1.0])])
    # beyond its valid radius the curve overflows; non-finite residuals count as inf
    with np.errstate(all="ignore"):
        w1, w2 = curve.deviation(xi, m)
        lhs1, lhs2 = curve.deviation_forward(w1, w2)
        r1, r2 = curve.deviation(s.lambda_s * xi, m)
        norm = 1.0 + np.sqrt(np.abs(s.point[0] + r1) ** 2 + np.abs(s.point[1] + r2) ** 2)
        res = np.sqrt(np.abs(lhs1 - r1) ** 2 + np.abs(lhs2 - r2) ** 2) / norm
    res = np.where(np.isfinite(res), res, np.inf)
    k = int(np.argmax(res))
    return complex(xi[k]), float(res[k])


# -- area, characteristic, pairings ----------------------------------------

METRICS = ("euclidean", "fubini_study")


def _check_metric(metric):
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def _density(c: ParametrizedCurve, xi, metric: str):
    """Area density of phi^* omega w.r.t. Lebesgue measure on xi.

    Euclidean: |phi'|^2.  Fubini-Study (lines have area 1):
    |phi'|^2 ((1 + |phi|^2) - |<phi', phi>|^2 / |phi'|^2) / (pi (1 + |phi|^2)^2).
    """
    p1, p2, u1, u2, L = c.evaluate(xi)
    if metric == "euclidean":
        return np.exp(2 * L), p1, p2
    n2 = np.abs(p1) ** 2 + np.abs(p2) ** 2
    proj = np.abs(u1 * np.conj(p1) + u2 * np.conj(p2)) ** 2
    q = 1.0 + n2
    with np.errstate(over="ignore", invalid="ignore"):
        dens = np.exp(2 * L - 2 * np.log(q)) * (q - proj) / np.pi
    return np.where(np.isfinite(dens), dens, 0.0), p1, p2


def _theta_integral(c: ParametrizedCurve, rho: float, angles: int = N_ANGLES,
                    metric: str = "euclidean") -> float:
    """Angular integral of the area density on |xi| = rho (periodic trapezoid)."""
    th = 2 * np.pi * (np.arange(angles) + 0.5) / angles
    dens, _, _ = _density(c, rho * np.exp(1j * th), metric)
    return float(np.sum(dens) * 2 * np.pi / angles)


def area_function(c: ParametrizedCurve, t: float, angles: int = N_ANGLES,
                  metric: str = "euclidean") -> float:
    """A(t) = area of phi(|xi| < t) with multiplicity, adaptive in the radius."""
    _check_metric(metric)
    if t == 0:
        return 0.0
    c._check(t)
    val, _ = integrate.quad(lambda r: r * _theta_integral(c, r, angles, metric), 0.0, t,
                            limit=200, epsabs=0.0, epsrel=1e-10)
    return val


def _half_log1p(p1, p2):
    # 0.5 log(1 + |phi|^2) without overflow
    with np.errstate(divide="ignore"):
        lg = np.log(np.sqrt(np.abs(p1) ** 2 + np.abs(p2) ** 2))
    return 0.5 * np.logaddexp(0.0, 2.0 * lg)


def characteristic(c: ParametrizedCurve, r: float, angles: int = N_ANGLES,
                   metric: str = "euclidean") -> float:
    """T(r) = int_0^r A(t)/t dt.

    Euclidean: by Fubini this is int_0^r rho Theta(rho) log(r/rho) d rho,
    Theta the angular integral of |phi'|^2, integrated adaptively.
    Fubini-Study: omega = dd^c (1/2) log(1 + |z|^2), so Jensen's formula gives
    the circle mean of (1/2) log(1 + |phi|^2) minus its value at 0.
    """
    _check_metric(metric)
    c._check(r)
    if metric == "fubini_study":
        th = 2 * np.pi * (np.arange(4 * angles) + 0.5) / (4 * angles)
        p1, p2, *_ = c.evaluate(r * np.exp(1j * th))
        q1, q2, *_ = c.evaluate(np.zeros(1, dtype=complex))
        return float(np.mean(_half_log1p(p1, p2)) - _half_log1p(q1, q2)[0])
    val, _ = integrate.quad(
        lambda p: p * _theta_integral(c, p, angles) * math.log(r / p) if p > 0 else 0.0,
        0.0, r, limit=200, epsabs=0.0, epsrel=1e-10)
    return val


def _polar_nodes(r: float, angles: int, per_panel: int, panels: int = 24, q: float = 0.7):
    """Midpoint nodes on geometric radial panels [r q^{k+1}, r q^k] plus [0, r q^panels]."""
    edges = np.concatenate([[0.0], r * q ** np.arange(panels, -1, -1)])
    rs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        h = (b - a) / per_panel
        rs.append(a + h * (np.arange(per_panel) + 0.5))
        ws.append(np.full(per_panel, h))
    rs = np.concatenate(rs)
    ws = np.concatenate(ws)
    th = 2 * np.pi * (np.arange(angles) + 0.5) / angles
    R, TH = np.meshgrid(rs, th, indexing="ij")
    W = (ws * rs)[:, None] * (2 * np.pi / angles) * np.ones_like(TH)
    return (R * np.exp(1j * TH)).ravel(), R.ravel(), W.ravel()


@dataclass(frozen=True)
class NevanlinnaPairing:
    r: float
    T_r: float
    tau_psi: float
    ddc_mass_proxy: float


def _weighted_sum(c, r, chi, angles, per_panel, metric):
    xi, R, W = _polar_nodes(r, angles, per_panel)
    if chi is None:
        dens, _, _ = _density(c, xi, metric)
    else:
        dens, p1, p2 = _density(c, xi, "euclidean")
        dens = 2.0 * dens * chi(p1, p2)
    return float(np.sum(dens * np.log(r / R) * W))


def tau_integral(c: ParametrizedCurve, r: float, chi=None, angles: int = N_ANGLES,
                 per_panel: int = 8, metric: str = "euclidean") -> float:
    """int_{|xi|<r} log(r/|xi|) phi^*(chi beta), or phi^* omega when chi is None.

    phi^* beta = 2 |phi'|^2 dA.  Richardson-extrapolated once over a doubling
    of both angular and radial nodes.
    """
    coarse = _weighted_sum(c, r, chi, angles, per_panel, metric)
    fine = _weighted_sum(c, r, chi, 2 * angles, 2 * per_panel, metric)
    return (4.0 * fine - coarse) / 3.0


def tau_pairing(c: ParametrizedCurve, r: float, psi=None, T_r: Optional[float] = None,
                angles: int = N_ANGLES, per_panel: int = 8,
                metric: str = "euclidean") -> NevanlinnaPairing:
    """<tau_r, psi> = (1/T_omega(r)) int log(r/|xi|) phi^*(psi).

    ``psi`` is a TestForm (chi beta), or None for the mass form omega itself,
    whose pairing is 1 by definition; it checks the polar quadrature against
    T(r).  With the Euclidean metric omega = beta / 2 matches the area A(t),
    so tau_psi for chi beta is divided by 2 T(r).
    """
    _check_metric(metric)
    c._check(r)
    T = characteristic(c, r, metric=metric) if T_r is None else T_r
    if not T > 0:
        raise ValueError(f"characteristic T({r}) = {T} is not positive")
    chi = None if psi is None else psi.chi
    val = tau_integral(c, r, chi, angles, per_panel, metric)
    if chi is not None and metric == "euclidean":
        val /= 2.0
    return NevanlinnaPairing(float(r), float(T), float(val / T), 1.0 / T)


def ahlfors_ratio(c: ParametrizedCurve, r: float, angles: int = N_ANGLES) -> float:
    """Length of phi(|xi| = r) over A(r)."""
    c._check(r)
    th = 2 * np.pi * (np.arange(angles) + 0.5) / angles
    *_, L = c.evaluate(r * np.exp(1j * th))
    length = float(np.sum(np.exp(L)) * r * 2 * np.pi / angles)
    return length / area_function(c, r, angles)


def max_green_on_curve(f: HenonType, c: ParametrizedCurve, r: float, tol: float = 1e-10,
                       rings: int = 8, angles: int = 64) -> float:
    th = 2 * np.pi * np.arange(angles) / angles
    xi = np.concatenate([t * np.exp(1j * th) for t in r * np.arange(1, rings + 1) / rings])
    p1, p2, *_ = c.evaluate(xi)
    return float(np.max(green_plus_grid(f, p1, p2, tol)[0]))


@dataclass
class RigidityRow:
    r: float
    psi_id: int
    tau_psi: float
    tplus_psi: float
    abs_diff: float
    T_r: float
    ddc_mass_proxy: float


def rigidity_experiment(f: HenonType, s: Saddle, r_list: Sequence[float],
                        psi_list: Sequence[TestForm], quadrature: int = 32,
                        tol: float = 1e-10, angles: int = N_ANGLES, per_panel: int = 8,
                        curve: Optional[ParametrizedCurve] = None,
                        membership_tol: float = 1e-6, metric: str = "fubini_study") -> list:
    """|<tau_r - T+, psi>| over radii and test forms.

    T+ has mass 1 on P^2 for the Fubini-Study form, so tau_r is normalized with
    the Fubini-Study characteristic by default; with Euclidean areas the mass of
    tau_r drifts to infinity in C^2 and local pairings tend to 0.

    The curve must stay in K+: G+ on samples is compared with
    ``membership_tol``, which absorbs the rounding of far-out curve points.
    """
    r_list = sorted(float(r) for r in r_list)
    c = curve if curve is not None else stable_manifold(f, s, radius=r_list[-1])
    g = max_green_on_curve(f, c, r_list[-1], tol)
    if g > membership_tol:
        raise ManifoldError("curve leaves K+ (G+ above membership_tol on samples)", 0j, g)
    G = green_potential(f, tol)
    tplus = [pair_form(G, psi, quadrature) for psi in psi_list]
    rows = []
    for r in r_list:
        T = characteristic(c, r, metric=metric)
        for k, psi in enumerate(psi_list):
            p = tau_pairing(c, r, psi, T, angles, per_panel, metric)
            rows.append(RigidityRow(r, k, p.tau_psi, tplus[k], abs(p.tau_psi - tplus[k]), T,
                                    p.ddc_mass_proxy))
    return rows


RIGIDITY_HEADER = ["r", "psi_id", "tau_psi", "tplus_psi", "abs_diff", "T_r", "ddc_mass_proxy"]


def write_rigidity_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(RIGIDITY_HEADER)
    g = "{:.17g}".format
    for row in rows:
        w.writerow([g(row.r), row.psi_id, g(row.tau_psi), g(row.tplus_psi), g(row.abs_diff),
                    g(row.T_r), g(row.ddc_mass_proxy)])

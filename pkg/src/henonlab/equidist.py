"""Pullbacks d^-n (f^n)^* [V] / deg V of a curve and their convergence to T+."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .currents import PotentialField, TestForm, bidisc_nodes
from .green import BoundedWithinBudget, classify, green_plus_grid
from .henon import HenonType

DEFAULT_NMAX = 24
NOISE_FLOOR = 1e-6


class Curve:
    """Affine curve {P = 0}; ``coeffs[i][j]`` multiplies z1**i * z2**j."""

    def __init__(self, coeffs):
        P = np.atleast_2d(np.asarray(coeffs, dtype=np.complex128))
        if not np.any(P):
            raise ValueError("curve polynomial is identically zero")
        idx = np.argwhere(P != 0)
        self.degree = int(np.max(idx.sum(axis=1)))
        if self.degree < 1:
            raise ValueError("curve polynomial must have degree >= 1")
        D = self.degree
        padded = np.zeros((D + 1, D + 1), dtype=np.complex128)
        padded[: P.shape[0], : P.shape[1]] = P[: D + 1, : D + 1]
        self.P = padded
        # closure of {P = 0} contains I- = [0:1:0] iff the top part vanishes at (1, 0)
        if self.P[D, 0] == 0:
            raise ValueError("curve closure contains I- (top-degree part vanishes on (1, 0))")

    @classmethod
    def z1_axis_zero(cls) -> "Curve":
        """V = {z1 = 0}."""
        return cls([[0, 0], [1, 0]])

    def __call__(self, z1, z2):
        z1 = np.asarray(z1, dtype=np.complex128)
        z2 = np.asarray(z2, dtype=np.complex128)
        out = np.zeros(np.broadcast(z1, z2).shape, dtype=np.complex128)
        for i in range(self.P.shape[0]):
            for j in range(self.P.shape[1]):
                if self.P[i, j] != 0:
                    out = out + self.P[i, j] * z1 ** i * z2 ** j
        return out

    def __repr__(self) -> str:
        return f"Curve(degree={self.degree})"


def pullback_logs(f: HenonType, V: Curve, z1, z2, nmax: int) -> np.ndarray:
    """log|P(f^n(z))| for n = 0..nmax, shape (len(z), nmax + 1)."""
    coeffs, degrees, avals = f.arrays()
    z1 = np.ascontiguousarray(np.asarray(z1, dtype=np.complex128).ravel())
    z2 = np.ascontiguousarray(np.asarray(z2, dtype=np.complex128).ravel())
    return K.pullback_logs(z1, z2, coeffs, degrees, avals, V.P, V.degree, int(nmax))


def pullback_potential(f: HenonType, V: Curve, n: int, nmax: int = DEFAULT_NMAX) -> PotentialField:
    """Potential z -> d^-n (deg V)^-1 log|P(f^n z)| of d^-n (f^n)^*([V] / deg V)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > nmax:
        raise ValueError(f"n = {n} exceeds the iteration budget {nmax}")
    scale = float(f.degree) ** (-n) / V.degree

    def ev(z1, z2):
        shape = np.shape(z1)
        logs = pullback_logs(f, V, z1, z2, n)[:, n]
        return (scale * logs).reshape(shape)
    return PotentialField(ev, f"pullback n={n}")


@dataclass
class EquidistReport:
    n_values: np.ndarray
    errors: np.ndarray
    fitted_rate: float
    fitted_constant: float
    fit_range: tuple
    saturated: bool = False
    per_form: np.ndarray = field(default=None, repr=False)
    tplus_pairings: np.ndarray = field(default=None, repr=False)
    log_n_term: bool = False
    noise_floor: float = 0.0

    def bound_model(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        out = self.fitted_constant * np.exp(-self.fitted_rate * n)
        if self.log_n_term:
            out = out * np.maximum(n, 1.0)
        return out

    def monotone_from(self) -> Optional[int]:
        """Smallest n after which e_n strictly decreases on the usable range."""
        lo, hi = self.fit_range
        mask = (self.n_values >= lo) & (self.n_values <= hi)
        ns, es = self.n_values[mask], self.errors[mask]
        start = None
        for k in range(len(es) - 1, 0, -1):
            if es[k] < es[k - 1]:
                start = int(ns[k - 1])
            else:
                break
        return start


def fit_rate(ns, es, log_n_term: bool = False):
    """Least squares for log e_n = -rate * n [+ log n] + b; returns (rate, exp(b))."""
    ns = np.asarray(ns, dtype=float)
    y = np.log(np.asarray(es, dtype=float))
    if log_n_term:
        y = y - np.log(np.maximum(ns, 1.0))
    A = np.vstack([-ns, np.ones_like(ns)]).T
    (rate, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(rate), float(math.exp(b))


def equidist_experiment(f: HenonType, V: Curve, psi_list: Sequence[TestForm], n_range,
                        quadrature: int = 24, tol: float = 1e-12, burn_in: int = 1,
                        log_n_term: bool = False, noise_floor: float = NOISE_FLOOR) -> EquidistReport:
    """e_n = max over psi of |<pullback_n - T+, psi>| and an exponential-rate fit.

    Pullbacks and T+ are paired on the same midpoint nodes.  Points with
    e_n below noise_floor * max|<T+, psi>| are dropped from the fit.
    """
    n_values = np.array(sorted(set(int(n) for n in n_range)), dtype=np.int64)
    if len(n_values) == 0 or n_values[0] < 0:
        raise ValueError("n_range must contain non-negative integers")
    nmax = int(n_values[-1])
    if nmax > DEFAULT_NMAX:
        raise ValueError(f"n up to {nmax} exceeds the budget {DEFAULT_NMAX}")
    d = float(f.degree)
    per_form = np.empty((len(psi_list), len(n_values)))
    tplus = np.empty(len(psi_list))
    for k, psi in enumerate(psi_list):
        Z1, Z2, w = bidisc_nodes(psi, quadrature)
        g = green_plus_grid(f, Z1, Z2, tol)[0]
        tplus[k] = float(np.sum(g * w))
        logs = pullback_logs(f, V, Z1, Z2, nmax)
        for i, n in enumerate(n_values):
            u = logs[:, n] * (d ** (-float(n)) / V.degree)
            finite = np.isfinite(u)
            per_form[k, i] = abs(float(np.sum(u[finite] * w[finite])) - tplus[k])
    errors = per_form.max(axis=0)
    floor = noise_floor * max(1.0, float(np.max(np.abs(tplus))))
    usable = (errors > floor) & (n_values >= burn_in)
    if usable.sum() < 2:
        return EquidistReport(n_values, errors, math.nan, math.nan, (None, None), True,
                              per_form, tplus, log_n_term, floor)
    # truncate at the first value that falls under the floor
    idx = np.nonzero(usable)[0]
    stop = idx[0]
    while stop + 1 < len(n_values) and usable[stop + 1]:
        stop += 1
    sel = slice(idx[0], stop + 1)
    rate, const = fit_rate(n_values[sel], errors[sel], log_n_term)
    return EquidistReport(n_values, errors, rate, const,
                          (int(n_values[idx[0]]), int(n_values[stop])), False,
                          per_form, tplus, log_n_term, floor)


def _bisect_ray(f, start, u, s_max, budget, steps):
    def bounded(s):
        z = (start[0] + s * u[0], start[1] + s * u[1])
        return isinstance(classify(f, z, budget).forward, BoundedWithinBudget)
    lo, hi = 0.0, s_max
    if bounded(hi):
        raise RuntimeError("ray endpoint did not escape; enlarge s_max")
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if bounded(mid):
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    return (complex(start[0] + s * u[0]), complex(start[1] + s * u[1]))


def straddling_centers(f: HenonType, count: int = 3, s_max: float = 6.0,
                       budget: int = 512, steps: int = 40):
    """Deterministic points of J+.

    Saddle points of period 1 and 2 lie in J+ and are used first (smallest
    norm first).  Remaining slots come from bisection on classify along fixed
    rays from the first bounded periodic point.
    """
    from .periodic import periodic_points

    pts = list(periodic_points(f, 1)) + list(periodic_points(f, 2))
    pts.sort(key=lambda p: (round(abs(p.point[0]) ** 2 + abs(p.point[1]) ** 2, 9),
                            p.point[0].real, p.point[0].imag))
    centers = []
    for p in pts:
        if p.kind == "saddle" and all(abs(p.point[0] - c[0]) + abs(p.point[1] - c[1]) > 1e-6
                                      for c in centers):
            centers.append(p.point)
        if len(centers) == count:
            return centers
    if not pts:
        raise RuntimeError("no periodic point found to start the rays")
    start = pts[0].point
    k = 0
    while len(centers) < count:
        th = 2.0 * math.pi * k / count + 0.3
        u = np.array([np.exp(1j * th), 0.5 * np.exp(-1j * th)])
        centers.append(_bisect_ray(f, start, u / np.linalg.norm(u), s_max, budget, steps))
        k += 1
    return centers


def default_test_forms(f: HenonType, count: int = 3, rho: float = 0.8):
    return [TestForm(c, rho) for c in straddling_centers(f, count)]

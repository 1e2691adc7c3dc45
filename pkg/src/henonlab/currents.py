"""Positive closed (1,1)-currents represented by local potentials.

Normalisation: dd^c = (i/pi) d dbar, so on a complex line the slice
measure of dd^c u is (Laplacian u) / (2 pi) dA and log|t| has unit mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .green import Window, green_plus_grid, green_minus_grid
from .henon import HenonType

# Constant in front of the integration-by-parts pairing; pinned by the
# log|z1| calibration test, not by derivation alone.
PAIR_FORM_CONSTANT = 1.0 / math.pi

ATOM_THRESHOLD = 0.05
# cells within this many stencil steps of an atom are flagged
ATOM_HALO = 3


@dataclass
class PotentialField:
    """Local potential u with S = dd^c u.

    ``evaluator(z1, z2)`` takes complex arrays of equal shape and returns a
    real array.  ``depends`` may be "z1" or "z2" when u ignores the other
    coordinate; quadratures use this to factor tensor-product sums.
    """

    evaluator: Callable
    label: str = ""
    depends: Optional[str] = None

    def __call__(self, z1, z2):
        z1 = np.asarray(z1, dtype=np.complex128)
        z2 = np.broadcast_to(np.asarray(z2, dtype=np.complex128), z1.shape)
        return np.asarray(self.evaluator(z1, z2), dtype=float)

    def __add__(self, other: "PotentialField") -> "PotentialField":
        dep = self.depends if self.depends == other.depends else None
        return PotentialField(lambda a, b: self(a, b) + other(a, b),
                              f"({self.label})+({other.label})", dep)


def log_abs_z1() -> PotentialField:
    """Potential of the current of integration on {z1 = 0}."""
    def ev(z1, z2):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(z1))
    return PotentialField(ev, "log|z1|", depends="z1")


def log_norm_potential() -> PotentialField:
    def ev(z1, z2):
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(np.abs(z1), np.abs(z2)))
    return PotentialField(ev, "log||z||")


def green_potential(f: HenonType, tol: float = 1e-10, minus: bool = False) -> PotentialField:
    fn = green_minus_grid if minus else green_plus_grid

    def ev(z1, z2):
        return fn(f, z1, z2, tol)[0]
    return PotentialField(ev, "G-" if minus else "G+")


def level_potential(f: HenonType, c: float, tol: float = 1e-10) -> PotentialField:
    if c < 0:
        raise ValueError("level c must be >= 0")

    def ev(z1, z2):
        return np.maximum(green_plus_grid(f, z1, z2, tol)[0] - c, 0.0)
    return PotentialField(ev, f"G+_{c:g}")


@dataclass(frozen=True)
class ComplexLine:
    base: tuple
    direction: tuple

    def __post_init__(self):
        b = (complex(self.base[0]), complex(self.base[1]))
        v = (complex(self.direction[0]), complex(self.direction[1]))
        if v == (0j, 0j):
            raise ValueError("line direction must be nonzero")
        object.__setattr__(self, "base", b)
        object.__setattr__(self, "direction", v)

    @classmethod
    def horizontal(cls, z2: complex) -> "ComplexLine":
        """{z2 = const}, a line through I-."""
        return cls((0j, complex(z2)), (1 + 0j, 0j))

    @property
    def through_i_plus(self) -> bool:
        return self.direction[0] == 0

    def __call__(self, t):
        t = np.asarray(t, dtype=np.complex128)
        return self.base[0] + t * self.direction[0], self.base[1] + t * self.direction[1]


@dataclass
class SliceMeasure:
    window: Window
    centers: np.ndarray           # complex cell centres, shape (n, n)
    cell_mass: np.ndarray
    flagged: np.ndarray           # bool: pole cells and their stencil neighbours
    total_mass: float
    h: float
    error_estimate: float = math.nan
    meta: dict = field(default_factory=dict)

    @property
    def negative_mass(self) -> float:
        """Sum of negative masses over unflagged cells."""
        m = self.cell_mass[~self.flagged]
        return float(np.sum(m[m < 0]))

    def block_masses(self, block: int) -> np.ndarray:
        """Masses of block x block tiles (a trailing partial tile is dropped)."""
        if block < 1:
            raise ValueError("block must be >= 1")
        n = self.cell_mass.shape[0] // block * block
        m = self.cell_mass[:n, :n]
        return m.reshape(n // block, block, n // block, block).sum(axis=(1, 3))

    def block_negative_mass(self, block: int) -> float:
        """Sum of negative tile masses.

        For a Holder potential the cell-level negative part does not vanish
        under refinement, but tiles of fixed physical size converge, since a
        tile sum is the discrete flux through its boundary.
        """
        b = self.block_masses(block)
        return float(np.sum(b[b < 0]))


def _cell_centres(window: Window, n: int, ghost: int = 0):
    hx = (window.re1 - window.re0) / n
    hy = (window.im1 - window.im0) / n
    if not math.isclose(hx, hy, rel_tol=1e-12):
        raise ValueError("slice window must be square")
    k = np.arange(-ghost, n + ghost) + 0.5
    xs = window.re0 + k * hx
    ys = window.im0 + k * hx
    return xs[None, :] + 1j * ys[:, None], hx


def _patch_poles(u: np.ndarray):
    """Replace non-finite (pole) values by matched discrete Green values.

    For an isolated log atom of mass m the five-point fundamental solution
    has centre value u1 - pi m / 2 with u1 the mean over the four neighbours;
    m is read off from the neighbour and second-ring means.
    """
    bad = ~np.isfinite(u)
    if not bad.any():
        return u, bad
    u = u.copy()
    ny, nx = u.shape
    for i, j in zip(*np.nonzero(bad)):
        if np.isposinf(u[i, j]):
            raise ValueError(f"potential is +inf at grid cell {(i, j)}")

        def ring(r):
            vals = [u[i + di, j + dj] for di, dj in ((r, 0), (-r, 0), (0, r), (0, -r))
                    if 0 <= i + di < ny and 0 <= j + dj < nx]
            vals = [v for v in vals if np.isfinite(v)]
            return np.mean(vals) if vals else np.nan
        u1, u2 = ring(1), ring(2)
        if not (np.isfinite(u1) and np.isfinite(u2)):
            raise ValueError(f"cannot patch pole at grid cell {(i, j)}: neighbours not finite")
        m = max((u2 - u1) / math.log(2.0), 0.0)
        u[i, j] = u1 - 0.5 * math.pi * m
    return u, bad


def slice_measure(S: PotentialField, L: ComplexLine, window: Window, resolution: int,
                  estimate_error: bool = False) -> SliceMeasure:
    """Discrete dd^c(u o L) on a square window: five-point Laplacian / (2 pi) * cell area."""
    n = int(resolution)
    if n < 2:
        raise ValueError("slice resolution must be >= 2")
    t, h = _cell_centres(window, n, ghost=1)
    z1, z2 = L(t)
    with np.errstate(invalid="ignore", divide="ignore"):
        u = S(z1, z2)
    u, poles = _patch_poles(u)
    lap = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1])
    mass = lap / (2.0 * math.pi)
    # flag pole cells, their stencil neighbours, and atom-like cells
    flag = poles.copy()
    flag[1:, :] |= poles[:-1, :]
    flag[:-1, :] |= poles[1:, :]
    flag[:, 1:] |= poles[:, :-1]
    flag[:, :-1] |= poles[:, 1:]
    flag = flag[1:-1, 1:-1]
    atoms = mass > ATOM_THRESHOLD
    if atoms.any():
        grow = atoms.copy()
        for _ in range(ATOM_HALO):
            g = grow.copy()
            g[1:, :] |= grow[:-1, :]
            g[:-1, :] |= grow[1:, :]
            g[:, 1:] |= grow[:, :-1]
            g[:, :-1] |= grow[:, 1:]
            grow = g
        flag |= grow
    total = float(np.sum(mass))
    err = math.nan
    if estimate_error:
        coarse = slice_measure(S, L, window, max(2, n // 2), estimate_error=False)
        err = abs(total - coarse.total_mass)
    return SliceMeasure(window, t[1:-1, 1:-1], mass, flag, total, h, err,
                        {"label": S.label, "resolution": n})


# `slice` is the public name; keep the builtin reachable inside this module
slice_ = slice_measure


def pair_slice(m: SliceMeasure, chi: Callable) -> float:
    """sum of cell_mass * chi(cell centre)."""
    w = np.asarray(chi(m.centers), dtype=float)
    return float(np.sum(m.cell_mass * w))


@dataclass(frozen=True)
class TestForm:
    """psi = chi * beta, chi a product of C^2 bumps B(|z_j - c_j|^2 / rho^2), B(s) = (1 - s)^3."""

    center: tuple
    rho: float

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("bump radius must be > 0")
        object.__setattr__(self, "center", (complex(self.center[0]), complex(self.center[1])))

    @staticmethod
    def bump(s):
        s = np.asarray(s, dtype=float)
        return np.where(s < 1.0, (1.0 - np.minimum(s, 1.0)) ** 3, 0.0)

    def bump_laplacian(self, s):
        """Real Laplacian in one z_j-plane of B(|z_j - c_j|^2 / rho^2)."""
        s = np.asarray(s, dtype=float)
        sc = np.minimum(s, 1.0)
        return np.where(s < 1.0, 12.0 / self.rho ** 2 * (1.0 - sc) * (3.0 * sc - 1.0), 0.0)

    def chi(self, z1, z2):
        s1 = np.abs(np.asarray(z1) - self.center[0]) ** 2 / self.rho ** 2
        s2 = np.abs(np.asarray(z2) - self.center[1]) ** 2 / self.rho ** 2
        return self.bump(s1) * self.bump(s2)

    def laplacian(self, z1, z2):
        s1 = np.abs(np.asarray(z1) - self.center[0]) ** 2 / self.rho ** 2
        s2 = np.abs(np.asarray(z2) - self.center[1]) ** 2 / self.rho ** 2
        return self.bump_laplacian(s1) * self.bump(s2) + self.bump(s1) * self.bump_laplacian(s2)

    def c2_norm(self) -> float:
        """max over z of |chi|, |first derivatives|, |second derivatives|.

        Per-plane profile g(r) = (1 - r^2/rho^2)^3: max|g'| = 6/sqrt(5) * (4/5)^2 / rho
        at r = rho/sqrt(5); max|g''| = 6 / rho^2 at r = 0.
        """
        g1 = 3.0 * 2.0 / math.sqrt(5.0) * (4.0 / 5.0) ** 2 / self.rho
        g2 = 6.0 / self.rho ** 2
        return max(1.0, g1, g2)


def _disc_nodes(center: complex, rho: float, n: int):
    """Midpoint nodes of the square [-rho, rho]^2 around center, inside the disc."""
    h = 2.0 * rho / n
    k = (np.arange(n) + 0.5) * h - rho
    x, y = np.meshgrid(k, k, indexing="xy")
    inside = x * x + y * y < rho * rho
    z = center + (x + 1j * y)[inside]
    return z, h * h


def pair_form(S: PotentialField, psi: TestForm, quadrature: int = 32,
              chunk: int = 1 << 20) -> float:
    """<dd^c u, chi beta> = (1/pi) int u (Lap_1 chi + Lap_2 chi) dV.

    Tensor-product midpoint rule with ``quadrature`` nodes per real axis.
    """
    n = int(quadrature)
    if n < 8:
        raise ValueError(f"pair_form quadrature must be >= 8 per axis, got {n}")
    c1, c2 = psi.center
    w1, a1 = _disc_nodes(c1, psi.rho, n)
    w2, a2 = _disc_nodes(c2, psi.rho, n)
    s1 = np.abs(w1 - c1) ** 2 / psi.rho ** 2
    s2 = np.abs(w2 - c2) ** 2 / psi.rho ** 2
    B1, L1 = psi.bump(s1), psi.bump_laplacian(s1)
    B2, L2 = psi.bump(s2), psi.bump_laplacian(s2)
    dV = a1 * a2
    if S.depends == "z1":
        u = S(w1, np.full_like(w1, c2))
        total = np.sum(u * L1) * np.sum(B2) + np.sum(u * B1) * np.sum(L2)
        return float(PAIR_FORM_CONSTANT * total * dV)
    if S.depends == "z2":
        u = S(np.full_like(w2, c1), w2)
        total = np.sum(B1) * np.sum(u * L2) + np.sum(L1) * np.sum(u * B2)
        return float(PAIR_FORM_CONSTANT * total * dV)
    total = 0.0
    rows = max(1, chunk // len(w2))
    for start in range(0, len(w1), rows):
        sl = slice(start, start + rows)
        Z1 = np.repeat(w1[sl], len(w2))
        Z2 = np.tile(w2, len(w1[sl]))
        u = S(Z1, Z2).reshape(-1, len(w2))
        weight = L1[sl, None] * B2[None, :] + B1[sl, None] * L2[None, :]
        total += float(np.sum(u * weight))
    return float(PAIR_FORM_CONSTANT * total * dV)


def bidisc_nodes(psi: TestForm, quadrature: int):
    """Flattened quadrature nodes (z1, z2), weights Lap chi * dV / pi, and chi * dV."""
    n = int(quadrature)
    c1, c2 = psi.center
    w1, a1 = _disc_nodes(c1, psi.rho, n)
    w2, a2 = _disc_nodes(c2, psi.rho, n)
    s1 = np.abs(w1 - c1) ** 2 / psi.rho ** 2
    s2 = np.abs(w2 - c2) ** 2 / psi.rho ** 2
    Z1 = np.repeat(w1, len(w2))
    Z2 = np.tile(w2, len(w1))
    S1 = np.repeat(s1, len(w2))
    S2 = np.tile(s2, len(w1))
    lap = psi.bump_laplacian(S1) * psi.bump(S2) + psi.bump(S1) * psi.bump_laplacian(S2)
    return Z1, Z2, lap * (a1 * a2) * PAIR_FORM_CONSTANT

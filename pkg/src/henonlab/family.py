"""Parameter families c -> f_c and the fibered Green function G+(c, z)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from . import _kernels as K
from .green import DEFAULT_BUDGET, GreenValue, Window, green_plus, params_for
from .henon import HenonType


class Family:
    """c -> builder(c), a Henon-type map of fixed degree."""

    def __init__(self, builder: Callable[[complex], HenonType], degree: int, label: str = ""):
        self.builder = builder
        self.degree = int(degree)
        self.label = label

    def __call__(self, c) -> HenonType:
        f = self.builder(c)
        if f.degree != self.degree:
            raise ValueError(f"family degree changed at c={c!r}: {f.degree} != {self.degree}")
        return f

    def __repr__(self):
        return f"Family({self.label or 'custom'}, d={self.degree})"


def quadratic_family(a=None) -> Family:
    """p(z) = z^2 + c with Jacobian parameter a.

    With ``a`` given, parameters are complex c.  Otherwise a parameter is a
    pair (c, a).
    """
    if a is None:
        return Family(lambda c: HenonType.quadratic(c[0], c[1]), 2, "z^2+c1, a=c2")
    a = complex(a)
    return Family(lambda c: HenonType.quadratic(c, a), 2, f"z^2+c, a={a:.6g}")


def family_green(fam: Family, c, z, tol: float = 1e-10, budget: int = DEFAULT_BUDGET) -> GreenValue:
    return green_plus(fam(c), z, tol, budget)


@dataclass
class ParamScan:
    values: np.ndarray
    error_bounds: np.ndarray
    escape: np.ndarray  # forward escape index of z0, -1 when bounded
    params: np.ndarray


def _stack(maps):
    prs = [params_for(f) for f in maps]
    m = max(p.coeffs.shape[0] for p in prs)
    w = max(p.coeffs.shape[1] for p in prs)
    if any(p.coeffs.shape != (m, w) for p in prs) or any(
            not np.array_equal(p.degrees, prs[0].degrees) for p in prs):
        raise ValueError("param_scan needs maps with identical factor structure")
    coeffs = np.stack([p.coeffs for p in prs])
    avals = np.stack([p.avals for p in prs])
    radius = np.array([p.radius for p in prs])
    kappa = np.array([p.kappa for p in prs])
    weights = np.stack([p.weights for p in prs])
    lam = np.array([p.lam for p in prs])
    return coeffs, prs[0].degrees, avals, radius, prs[0].d, kappa, weights, lam


def param_scan(fam: Family, z0, c_window: Window, resolution, tol: float = 1e-8,
               budget: int = DEFAULT_BUDGET) -> ParamScan:
    """G+(c, z0) over a window of complex parameters, row 0 at the top."""
    w, h = resolution
    cs = c_window.nodes(w, h)
    maps = [fam(c) for c in cs.ravel()]
    coeffs, degrees, avals, radius, d, kappa, weights, lam = _stack(maps)
    n = cs.size
    z1 = np.full(n, complex(z0[0]))
    z2 = np.full(n, complex(z0[1]))
    val, bnd, _, _ = K.green_many_maps(z1, z2, coeffs, degrees, avals, radius, d, kappa,
                                       weights, lam, float(tol), int(budget))
    esc = K.escape_many_maps(z1, z2, coeffs, degrees, avals, radius, int(budget))
    return ParamScan(val.reshape(h, w), bnd.reshape(h, w), esc.reshape(h, w), cs)


def boundary_mask(bounded: np.ndarray) -> np.ndarray:
    """Pixels whose bounded/escaping tag differs from a 4-neighbour."""
    b = np.asarray(bounded, dtype=bool)
    out = np.zeros_like(b)
    out[1:, :] |= b[1:, :] != b[:-1, :]
    out[:-1, :] |= b[1:, :] != b[:-1, :]
    out[:, 1:] |= b[:, 1:] != b[:, :-1]
    out[:, :-1] |= b[:, 1:] != b[:, :-1]
    return out


@dataclass(frozen=True)
class DilationProbe:
    covered: float
    boundary_pixels: int


def dilation_probe(fam: Family, c0, dc, z_window: Window, resolution: int, z2: complex = 0j,
                   budget: int = 512, dilation: int = 2) -> DilationProbe:
    """Fraction of J+(c0) boundary pixels with a J+(c0 + dc) boundary pixel within ``dilation``.

    Grids are taken on the line {z2 = const}; pixels are tagged bounded or
    escaping by the forward certificate.
    """
    from .green import escape_indices

    t = z_window.nodes(resolution, resolution)
    masks = []
    for c in (c0, c0 + dc):
        esc = escape_indices(fam(c), t, np.full(t.shape, complex(z2)), budget)
        masks.append(boundary_mask(esc < 0))
    grown = ndimage.binary_dilation(masks[1], iterations=dilation)
    nb = int(masks[0].sum())
    covered = float((masks[0] & grown).sum() / nb) if nb else 1.0
    return DilationProbe(covered, nb)

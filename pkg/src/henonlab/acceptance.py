"""Acceptance criteria as plain functions returning ``CriterionResult``.

Each check prints nothing; ``run_all`` collects results and ``format_line``
renders the one-line summary used by the test suite and by ``selftest``.
Timings are kept apart from the measured values so that a result summary is
reproducible byte for byte.
"""
from __future__ import annotations

import filecmp
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .henon import HenonType

DEFAULT_SEED = 20240611


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    summary: str
    values: dict = field(default_factory=dict)
    seconds: float = math.nan

    def line(self, timing: bool = True) -> str:
        status = "PASS" if self.passed else "FAIL"
        t = f" [{self.seconds:.1f} s]" if timing and math.isfinite(self.seconds) else ""
        return f"criterion {self.number:2d} {status}  {self.name}: {self.summary}{t}"


def _timed(fn):
    def run(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.seconds = time.perf_counter() - t0
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


def default_map() -> HenonType:
    return HenonType.quadratic(-1.1, 0.4)


def _forward(f: HenonType, z1, z2):
    for h in reversed(f.factors):
        z1, z2 = h.p(z1) + h.a * z2, z1
    return z1, z2


# -- 1 ----------------------------------------------------------------------

@_timed
def green_invariance(samples: int = 10_000, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                     time_limit: float = 10.0) -> CriterionResult:
    """max |G+(f z) - 2 G+(z)| over uniform samples of [-3, 3]^4."""
    from .green import green_plus_grid

    f = default_map()
    rng = np.random.default_rng(seed)
    x = rng.uniform(-3.0, 3.0, size=(4, samples))
    t0 = time.perf_counter()
    z1, z2 = x[0] + 1j * x[1], x[2] + 1j * x[3]
    g0 = green_plus_grid(f, z1, z2, tol)[0]
    w1, w2 = _forward(f, z1, z2)
    g1 = green_plus_grid(f, w1, w2, tol)[0]
    dt = time.perf_counter() - t0
    err = float(np.max(np.abs(g1 - f.degree * g0)))
    ok = err <= 5 * tol and dt <= time_limit
    return CriterionResult(1, "Green invariance", ok,
                           f"max |G+(f z) - 2 G+(z)| = {err:.3g} (limit {5 * tol:.0e})",
                           {"max_error": err, "limit": 5 * tol})


# -- 2 ----------------------------------------------------------------------

@_timed
def vanishing_on_k(per_axis: int = 160, budget: int = 2048, bound_limit: float = 1e-6) -> CriterionResult:
    """Points classified bounded must have G+ exactly 0 with a small error bound."""
    from .green import escape_indices, green_plus_grid
    from .periodic import periodic_points

    f = default_map()
    xs = np.linspace(-2.0, 2.0, per_axis)
    X1, X2 = np.meshgrid(xs, xs, indexing="ij")
    z1 = (X1 + 0j).ravel()
    z2 = (X2 + 0j).ravel()
    # periodic points are bounded and sit on K
    per = [p.point for n in (1, 2) for p in periodic_points(f, n)]
    z1 = np.concatenate([z1, [p[0] for p in per]])
    z2 = np.concatenate([z2, [p[1] for p in per]])
    esc = escape_indices(f, z1, z2, budget)
    bounded = esc < 0
    vals, bnds = green_plus_grid(f, z1[bounded], z2[bounded], 1e-10, budget)
    nonzero = int(np.count_nonzero(vals))
    worst = float(np.max(bnds)) if bnds.size else 0.0
    ok = bool(bounded.sum() > 0 and nonzero == 0 and worst <= bound_limit)
    return CriterionResult(2, "vanishing on K+", ok,
                           f"{int(bounded.sum())} bounded points, {nonzero} nonzero values, "
                           f"max error bound {worst:.3g}",
                           {"bounded": int(bounded.sum()), "nonzero": nonzero, "max_bound": worst})


# -- 3 ----------------------------------------------------------------------

@_timed
def slice_mass(resolution: int = 2048, half_width: float = 3.0,
               time_limit: float = 60.0) -> CriterionResult:
    """Total mass of T+ sliced by {z2 = 0} on |Re t|, |Im t| <= 3."""
    from .currents import ComplexLine, green_potential, slice_measure
    from .green import Window

    f = default_map()
    t0 = time.perf_counter()
    m = slice_measure(green_potential(f, 1e-12), ComplexLine.horizontal(0j),
                      Window(-half_width, half_width, -half_width, half_width), resolution)
    dt = time.perf_counter() - t0
    ok = 0.97 <= m.total_mass <= 1.03 and dt <= time_limit
    return CriterionResult(3, "slice mass", ok,
                           f"total mass {m.total_mass:.6f} at {resolution}^2 "
                           f"(tile negative mass {m.block_negative_mass(max(1, resolution // 96)):.2g})",
                           {"total_mass": m.total_mass})


# -- 4 ----------------------------------------------------------------------

def line_integral_oracle(psi) -> float:
    """<[z1 = 0], chi beta> = 2 int chi(0, z2) dA(z2) in closed form.

    int B(|w|^2 / rho^2) dA = pi rho^2 int_0^1 (1 - s)^3 ds = pi rho^2 / 4.
    """
    c1 = psi.center[0]
    return 2.0 * float(psi.bump(abs(c1) ** 2 / psi.rho ** 2)) * math.pi * psi.rho ** 2 / 4.0


@_timed
def poincare_lelong(quadrature: int = 256) -> CriterionResult:
    from .currents import TestForm, log_abs_z1, pair_form

    forms = [TestForm((0.3 + 0.1j, -0.2j), 1.0), TestForm((0.05j, 1 + 1j), 0.5),
             TestForm((-0.4, 0.7), 0.9)]
    rel = []
    for psi in forms:
        got = pair_form(log_abs_z1(), psi, quadrature)
        ref = line_integral_oracle(psi)
        rel.append(abs(got - ref) / abs(ref))
    worst = max(rel)
    return CriterionResult(4, "Poincare-Lelong calibration", worst <= 0.01,
                           f"max relative deviation {worst:.3g} over {len(forms)} forms",
                           {"max_rel": worst})


# -- 5 ----------------------------------------------------------------------

def random_single_maps(count: int = 10, seed: int = DEFAULT_SEED) -> list:
    """Alternating quadratic and cubic factors with random complex coefficients."""
    from .henon import HenonFactor
    from .numerics import Poly

    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        d = 2 + k % 2
        c = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        c[-1] = 1.0 + 0.5 * (rng.normal() + 1j * rng.normal())
        a = complex(rng.uniform(0.2, 1.5) * np.exp(2j * np.pi * rng.uniform()))
        out.append(HenonType([HenonFactor(Poly(c), a)]))
    return out


def _match(points, ref, tol=1e-6) -> bool:
    a = np.array([p.point for p in points])
    b = np.array([p.point for p in ref])
    if len(a) == 0:
        return len(b) == 0
    dist = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return bool(np.all(dist.min(axis=1) < tol))


@_timed
def periodic_counts(count: int = 10, seed: int = DEFAULT_SEED) -> CriterionResult:
    from .periodic import check_jacobian, fixed_points_exact, period_two_exact, periodic_points

    bad = []
    worst_res = 0.0
    worst_jac = 0.0
    flagged = 0
    for k, f in enumerate(random_single_maps(count, seed)):
        d = f.degree
        fixed = fixed_points_exact(f)
        if len(fixed) != d:
            bad.append(f"map {k}: {len(fixed)} fixed points")
        pts = periodic_points(f, 2)
        if not pts.complete:
            if pts.degenerate:
                flagged += 1
            else:
                bad.append(f"map {k}: {len(pts)} of {pts.expected} period-2 solutions")
        if not _match(pts, period_two_exact(f)):
            bad.append(f"map {k}: Newton solution not among elimination roots")
        for p in list(fixed) + list(pts):
            worst_res = max(worst_res, p.residual / (1.0 + math.hypot(*map(abs, p.point))))
            worst_jac = max(worst_jac, check_jacobian(f, p))
    ok = not bad and worst_res <= 1e-10 and worst_jac <= 1e-8
    summary = (f"{count} maps, {flagged} flagged degenerate, max relative residual "
               f"{worst_res:.2g}, max multiplier mismatch {worst_jac:.2g}")
    if bad:
        summary += "; " + "; ".join(bad)
    return CriterionResult(5, "periodic point count", ok, summary,
                           {"max_residual": worst_res, "max_jacobian": worst_jac, "flagged": flagged})


# -- 6 ----------------------------------------------------------------------

@_timed
def equidistribution_rate(quadrature: int = 24, time_limit: float = 300.0) -> CriterionResult:
    from .equidist import Curve, default_test_forms, equidist_experiment

    f = default_map()
    t0 = time.perf_counter()
    rep = equidist_experiment(f, Curve.z1_axis_zero(), default_test_forms(f), range(1, 11),
                              quadrature=quadrature)
    dt = time.perf_counter() - t0
    ratio = rep.fitted_rate / math.log(2.0)
    mono = rep.monotone_from()
    lo = rep.fit_range[0]
    monotone = mono is not None and lo is not None and mono <= lo
    ok = (not rep.saturated and abs(ratio - 1.0) <= 0.15 and monotone and dt <= time_limit)
    return CriterionResult(6, "equidistribution rate", ok,
                           f"fitted rate = {ratio:.3f} log 2 on n in {rep.fit_range}, "
                           f"monotone from n = {mono}",
                           {"rate_over_log2": ratio, "fit_range": rep.fit_range,
                            "errors": rep.errors.tolist()})


# -- 7 ----------------------------------------------------------------------

@_timed
def nevanlinna_normalization(radii=(0.5, 1.0, 2.0, 4.0)) -> CriterionResult:
    from .nevanlinna import characteristic, saddle_from_point, stable_manifold, tau_pairing

    f = HenonType.quadratic(0.0, 2.0)
    s = saddle_from_point(f, (-1 + 0j, -1 + 0j))
    expect = sorted([-1 + math.sqrt(3), -1 - math.sqrt(3)], key=abs)
    mult_err = max(abs(s.lambda_s - expect[0]), abs(s.lambda_u - expect[1]))
    W = stable_manifold(f, s, radius=max(radii))
    Ts, masses, proxy_ok = [], [], True
    for r in radii:
        T = characteristic(W, r)
        p = tau_pairing(W, r, None, T)
        Ts.append(T)
        masses.append(p.tau_psi)
        proxy_ok &= p.ddc_mass_proxy == 1.0 / T
    growth = [Ts[k + 1] / Ts[k] for k in range(len(Ts) - 1)]
    mass_dev = max(abs(m - 1.0) for m in masses)
    ok = (mult_err < 1e-10 and mass_dev <= 0.02 and proxy_ok
          and all(g > 1.5 for g in growth))
    return CriterionResult(7, "Nevanlinna normalization", ok,
                           f"max |mass - 1| = {mass_dev:.3g}, min T(2r)/T(r) = {min(growth):.3g}, "
                           f"proxy exact: {proxy_ok}",
                           {"masses": masses, "T": Ts, "multiplier_error": mult_err})


# -- 8 ----------------------------------------------------------------------

RIGIDITY_RADII = (1.0, 4.0, 16.0, 64.0, 256.0, 1024.0)


@_timed
def rigidity_convergence(radii=RIGIDITY_RADII, quadrature: int = 32) -> CriterionResult:
    from .equidist import default_test_forms
    from .nevanlinna import rigidity_experiment, saddle_from_point
    from .periodic import periodic_points

    f = HenonType.quadratic(-3.0, 0.2)
    sp = min((p for p in periodic_points(f, 1) if p.kind == "saddle"),
             key=lambda p: abs(p.point[0]))
    s = saddle_from_point(f, sp.point)
    psis = default_test_forms(f)
    rows = rigidity_experiment(f, s, radii, psis, quadrature=quadrature)
    r0, r1 = min(radii), max(radii)
    ratios = []
    for k in range(len(psis)):
        first = next(r.abs_diff for r in rows if r.r == r0 and r.psi_id == k)
        last = next(r.abs_diff for r in rows if r.r == r1 and r.psi_id == k)
        ratios.append(last / first)
    ok = all(q <= 1.0 / 3.0 for q in ratios)
    return CriterionResult(8, "rigidity convergence", ok,
                           "|<tau_r - T+, psi>| ratio largest/smallest r = "
                           + ", ".join(f"{q:.3g}" for q in ratios) + " (limit 0.333)",
                           {"ratios": ratios})


# -- 9 ----------------------------------------------------------------------

@_timed
def holder_stabilization() -> CriterionResult:
    from .green import holder_exponent

    est = holder_exponent(default_map(), depths=(8, 16))
    b8, b16 = est[0].beta_hat, est[1].beta_hat
    rel = abs(b16 - b8) / b8
    return CriterionResult(9, "Holder stabilization", rel <= 0.10,
                           f"beta_hat(8) = {b8:.4f}, beta_hat(16) = {b16:.4f}, relative change {rel:.3g}",
                           {"beta8": b8, "beta16": b16})


# -- 10 ---------------------------------------------------------------------

def _same_tree(a: Path, b: Path) -> bool:
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.funny_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    if mismatch or errors:
        return False
    return all(_same_tree(a / d, b / d) for d in cmp.common_dirs)


@_timed
def selftest_determinism() -> CriterionResult:
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        outs = [Path(tmp) / "a", Path(tmp) / "b"]
        codes = [main(["selftest", "--out", str(o)]) for o in outs]
        files = sum(1 for p in outs[0].rglob("*") if p.is_file())
        same = _same_tree(*outs)
    ok = same and codes == [0, 0] and files > 0
    return CriterionResult(10, "selftest determinism", ok,
                           f"exit codes {codes}, {files} files, byte-identical: {same}",
                           {"identical": same})


CRITERIA = {
    1: green_invariance,
    2: vanishing_on_k,
    3: slice_mass,
    4: poincare_lelong,
    5: periodic_counts,
    6: equidistribution_rate,
    7: nevanlinna_normalization,
    8: rigidity_convergence,
    9: holder_stabilization,
    10: selftest_determinism,
}


def run_all(numbers=None) -> list:
    return [CRITERIA[k]() for k in (numbers or sorted(CRITERIA))]

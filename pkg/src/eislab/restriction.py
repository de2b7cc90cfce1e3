"""Restrictions of F_lambda to geodesics: zero counts, equidistribution,
period integrals and Jensen bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from .eisenstein import (
    EisensteinContext,
    TraceSamples,
    eval_E1,
    eval_F,
    log_abs_holomorphic_F,
    trace_along,
)
from .errors import DomainError, JensenCenterError, UndersampledError
from .hyperbolic import GeodesicChart, chart_eval

SAMPLES_PER_HALF_WAVE = 8
ZERO_REL = 1e-12


def arclength_span(alpha: float, beta: float) -> float:
    return 2.0 * (math.atanh(beta) - math.atanh(alpha))


def sampling_floor(lam: float, alpha: float, beta: float,
                   q: int = SAMPLES_PER_HALF_WAVE) -> int:
    """``ceil(q lambda (s(beta) - s(alpha)) / pi)``: q samples per half-wave."""
    return math.ceil(q * lam * arclength_span(alpha, beta) / math.pi)


def default_samples(lam: float, alpha: float, beta: float,
                    q: int = SAMPLES_PER_HALF_WAVE) -> int:
    """Uniform-r sample count giving q samples per half-wave at the densest point.

    Arclength density ``2/(1-r^2)`` peaks at the end nearest the boundary,
    so this is at least :func:`sampling_floor`.
    """
    rmax = max(abs(alpha), abs(beta))
    dens = 2.0 / (1.0 - rmax * rmax)
    n = math.ceil(q * max(lam, 1.0) * dens * (beta - alpha) / math.pi) + 1
    return max(n, sampling_floor(lam, alpha, beta, q), 2)


def _check_floor(trace: TraceSamples, lam: float, q: int):
    need = sampling_floor(lam, trace.alpha, trace.beta, q)
    if trace.n < need:
        raise UndersampledError(
            f"{trace.n} samples below the floor {need} for lambda={lam} "
            f"({q} per half-wave over arclength {trace.arclength_span:.6g})")


# ---------------------------------------------------------------- sign changes


@dataclass(frozen=True)
class SignChanges:
    count: int
    roots: np.ndarray
    residuals: np.ndarray
    n_samples: int

    def __int__(self):
        return self.count


def _nonzero_signs(f):
    tiny = ZERO_REL * float(np.max(np.abs(f), initial=0.0))
    keep = np.flatnonzero(np.abs(f) > tiny)
    return keep, np.sign(f[keep])


def locate_sign_changes(trace: TraceSamples, ctx: EisensteinContext, lam: float,
                        refine_tol: float = 1e-10, q: int = SAMPLES_PER_HALF_WAVE,
                        nthreads: int = 1) -> SignChanges:
    """Sign changes of the trace, each bracket bisected down to ``refine_tol`` in r.

    Samples with ``|F| < 1e-12 max|F|`` are skipped, so a sign change is
    counted across them only when the signs on either side differ.
    """
    _check_floor(trace, lam, q)
    keep, sg = _nonzero_signs(trace.F)
    flips = np.flatnonzero(sg[1:] != sg[:-1])
    lo = trace.r[keep[flips]].copy()
    hi = trace.r[keep[flips + 1]].copy()
    flo = sg[flips]
    chart = trace.chart
    while lo.size and np.max(hi - lo) > refine_tol:
        mid = 0.5 * (lo + hi)
        fm = np.atleast_1d(eval_F(ctx, lam, chart_eval(chart, mid)[0], nthreads))
        left = np.sign(fm) == flo
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    roots = 0.5 * (lo + hi)
    res = (np.abs(np.atleast_1d(eval_F(ctx, lam, chart_eval(chart, roots)[0], nthreads)))
           if roots.size else np.zeros(0))
    return SignChanges(int(flips.size), roots, res, trace.n)


def count_sign_changes(trace: TraceSamples, ctx: EisensteinContext, lam: float,
                       refine_tol: float = 1e-10, q: int = SAMPLES_PER_HALF_WAVE,
                       nthreads: int = 1) -> int:
    """Number of sign changes of ``r -> F_lambda(g(r), xi)`` along the trace.

    Refuses undersampled traces (fewer than ``q`` samples per half-wave of
    arclength ``pi / lambda``).
    """
    return locate_sign_changes(trace, ctx, lam, refine_tol, q, nthreads).count


# ---------------------------------------------------------------- equidistribution


def weight_function(phi, r0: float) -> Callable:
    """``"one"``, ``"bump"`` (``cos(pi r / (2 r0))``), ``"zero"`` or a callable."""
    if callable(phi):
        return phi
    if phi == "one":
        return lambda r: np.ones_like(r)
    if phi == "bump":
        return lambda r: np.cos(np.pi * r / (2.0 * r0))
    if phi == "zero":
        return lambda r: np.zeros_like(r)
    raise ValueError(f"unknown test function {phi!r}")


@dataclass(frozen=True)
class EquidistResult:
    lhs: float
    rhs: float
    gap: float
    n: int


def equidist_check(ctx: EisensteinContext, lam: float, chart: GeodesicChart, r0: float,
                   phi="one", n: int | None = None, q: int = SAMPLES_PER_HALF_WAVE,
                   nthreads: int = 1) -> EquidistResult:
    """``lhs = int F^2 phi dr`` and ``rhs = 1/2 int E1 phi dr`` over ``[-r0, r0]``.

    Composite Simpson on a uniform odd-sized grid; ``gap = |lhs - rhs| / rhs``
    (0 when both vanish).
    """
    if not 0 < r0 < 1:
        raise DomainError("r0 must lie in (0, 1)")
    if n is None:
        n = default_samples(lam, -r0, r0, q)
    n += 1 - n % 2
    trace = trace_along(ctx, lam, chart, (-r0, r0), n, nthreads)
    _check_floor(trace, lam, q)
    w = weight_function(phi, r0)(trace.r)
    pts = chart_eval(chart, trace.r)[0]
    e1 = np.asarray(eval_E1(ctx, pts, nthreads))
    lhs = float(simpson(trace.F ** 2 * w, x=trace.r))
    rhs = float(0.5 * simpson(e1 * w, x=trace.r))
    if lhs == 0.0 and rhs == 0.0:
        gap = 0.0
    else:
        gap = abs(lhs - rhs) / abs(rhs) if rhs != 0 else math.inf
    return EquidistResult(lhs, rhs, gap, n)


# ---------------------------------------------------------------- period integrals


def sup_subinterval_integral(r, f) -> float:
    """``sup_{a<b} |int_a^b f|`` from the cumulative trapezoid: ``max - min``."""
    cum = cumulative_trapezoid(f, r, initial=0.0)
    return float(cum.max() - cum.min())


def period_sup(ctx: EisensteinContext, lam: float, chart: GeodesicChart, J, n: int | None = None,
               q: int = SAMPLES_PER_HALF_WAVE, nthreads: int = 1) -> float:
    """``sup over [a, b] in J of |int_a^b F_lambda(g(r), xi) dr|``."""
    alpha, beta = (J.alpha, J.beta) if hasattr(J, "alpha") else map(float, J)
    if n is None:
        n = default_samples(lam, alpha, beta, q)
    trace = trace_along(ctx, lam, chart, (alpha, beta), n, nthreads)
    _check_floor(trace, lam, q)
    return sup_subinterval_integral(trace.r, trace.F)


# ---------------------------------------------------------------- Jensen


def jensen_estimate(log_abs_f: Callable, center: complex, r_inner: float, r_outer: float,
                    n_theta: int) -> float:
    """Jensen upper bound on the zeros of ``f`` in ``D(center, r_inner)``.

    ``(mean_theta log|f(center + r_outer e^{i theta})| - log|f(center)|)
    / log(r_outer / r_inner)``, assuming ``f`` is holomorphic on the closed
    outer disc.
    """
    if not 0 < r_inner < r_outer:
        raise ValueError("need 0 < r_inner < r_outer")
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    ring = np.asarray(log_abs_f(center + r_outer * np.exp(1j * theta)), dtype=float)
    c0 = float(np.asarray(log_abs_f(np.array([center])), dtype=float).ravel()[0])
    if not np.isfinite(c0):
        raise JensenCenterError("f vanishes at the Jensen center")
    return float((math.fsum(ring) / n_theta - c0) / math.log(r_outer / r_inner))


@dataclass(frozen=True)
class JensenResult:
    bound: float
    center: float
    eps: float
    n_theta: int
    r1: float
    r2: float


def jensen_defaults(lam: float, r0: float):
    eps = min((1.0 - r0) / 4.0, 0.1)
    n_theta = max(256, 16 * math.ceil(lam))
    return eps, n_theta


def jensen_bound(ctx: EisensteinContext, lam: float, chart: GeodesicChart, r0: float,
                 eps: float | None = None, n_theta: int | None = None,
                 nthreads: int = 1, full: bool = False):
    """Jensen bound for the zeros of ``r -> F_lambda(g(r), xi)`` on ``[-r0, r0]``.

    The center ``x`` maximises ``|F|`` over a sampled ``[-eps, eps]``; the
    disc ``D(x, r0 + eps)`` contains the segment and the circle of radius
    ``r0 + 2 eps`` carries the circle average of ``log|F~|``.
    """
    d_eps, d_n = jensen_defaults(lam, r0)
    eps = d_eps if eps is None else eps
    n_theta = d_n if n_theta is None else n_theta
    if not (eps > 0 and r0 + 3 * eps < 1):
        raise DomainError("need eps > 0 and r0 + 3 eps < 1")
    m = max(65, sampling_floor(lam, -eps, eps) + 1)
    rs = np.linspace(-eps, eps, m)
    f = np.abs(np.atleast_1d(eval_F(ctx, lam, chart_eval(chart, rs)[0], nthreads)))
    k = int(np.argmax(f))
    x = float(rs[k])
    if f[k] <= 1e-10:
        raise JensenCenterError(f"|F| <= 1e-10 on [-{eps}, {eps}]")
    r1, r2 = r0 + eps, r0 + 2 * eps

    def log_abs(zc):
        zc = np.asarray(zc, dtype=complex)
        return log_abs_holomorphic_F(ctx, lam, chart, zc, r_max=r0 + 3 * eps, nthreads=nthreads)

    bound = jensen_estimate(log_abs, complex(x), r1, r2, n_theta)
    if full:
        return JensenResult(bound, x, eps, n_theta, r1, r2)
    return bound

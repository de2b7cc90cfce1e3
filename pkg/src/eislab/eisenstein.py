"""Truncated orbit sums for Eisenstein series on Schottky surfaces.

For a group element ``gamma`` with disc coefficients ``(a, b)`` the cocycle
identity gives

    B_xi(0, gamma z) = c_gamma + B_eta(0, z),   eta = gamma^-1 xi,

with ``c_gamma = B_xi(0, gamma 0) = -2 log|b - xi conj(a)|``.  Both
``c_gamma`` and ``eta`` are computed in forms that stay accurate for long
words, and every sum below runs over the elements in canonical order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import QuadratureError, TruncationBudgetError
from .hyperbolic import GeodesicChart, boundary_point, chart_eval, disc_point
from .schottky import (
    DEFAULT_WORD_CAP,
    SchottkyGroup,
    enumerate_elements,
    shell_tail,
    words_up_to,
    xi_admissible,
)

R_MAX = 0.995
QUAD_ORDERS = (16, 32, 64, 128, 256, 512, 1024, 2048)


def _orbit_data(a, b, xi):
    c = -2.0 * np.log(np.abs(b - xi * np.conj(a)))
    eta = (np.conj(a) * xi - b) / (a - np.conj(b) * xi)
    return c, eta / np.abs(eta)


@dataclass(frozen=True, eq=False)
class EisensteinContext:
    """λ-independent orbit data for a fixed group and direction ``xi``.

    ``c[j] = B_xi(0, gamma_j 0)`` and ``eta[j] = gamma_j^-1 xi`` for all
    words of length <= ``L`` in canonical order.
    """

    group: SchottkyGroup
    xi: complex
    L: int
    tol: float
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    word_length: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)
    shell_sums: tuple = ()
    tail_indicator: float = 0.0
    xi_margin: float = math.inf
    _charts: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for arr in (self.c, self.eta, self.a, self.b):
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return self.c.shape[0]

    @property
    def elements(self):
        return enumerate_elements(self.group, self.L)

    def truncated(self, L: int) -> "EisensteinContext":
        """Same data restricted to words of length <= L."""
        if L > self.L:
            raise ValueError(f"context only holds words up to length {self.L}")
        keep = self.word_length <= L
        sums = self.shell_sums[: L + 1]
        return EisensteinContext(self.group, self.xi, L, self.tol, self.a[keep].copy(),
                                 self.b[keep].copy(), self.word_length[keep].copy(),
                                 self.c[keep].copy(), self.eta[keep].copy(), sums,
                                 shell_tail(sums)[0], self.xi_margin)

    def shell_magnitude(self, n: int, z) -> np.ndarray:
        """``sum over |gamma| = n of exp(B_xi(0, gamma z)/2)`` at the points ``z``."""
        sel = self.word_length == n
        x, y = _split(z)
        return kernels.wave_sum(x, y, self.eta.real[sel].copy(), self.eta.imag[sel].copy(),
                                self.c[sel].copy(), 0.0, False, 1)[2]

    def chart_data(self, chart: GeodesicChart):
        """``(c', eta')`` with ``c' = B_xi(0, gamma g 0)``, ``eta' = g^-1 gamma^-1 xi``."""
        key = (chart.map.a, chart.map.b)
        if key not in self._charts:
            ga, gb = chart.map.a, chart.map.b
            a2 = self.a * ga + self.b * np.conj(gb)
            b2 = self.a * gb + self.b * np.conj(ga)
            cp, eta = _orbit_data(a2, b2, self.xi)
            cp.setflags(write=False)
            eta.setflags(write=False)
            self._charts[key] = (cp, eta)
        return self._charts[key]


def build_context(group: SchottkyGroup, xi, tol: float, *, cap: int = DEFAULT_WORD_CAP,
                  max_length: int | None = None, admissible_threshold: float = 1e-3,
                  admissible_depth: int | None = None) -> EisensteinContext:
    """Choose the truncation length and tabulate the orbit data.

    ``L`` is the smallest word length whose shell sum of
    ``exp(B_xi(0, gamma 0)/2)`` and whose geometric tail estimate are both
    below ``tol`` (the identity term is 1).  The required length is
    extrapolated from the observed shell ratio; if it would exceed the word
    cap a :class:`TruncationBudgetError` is raised before enumerating.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    xi = boundary_point(xi)
    margin = xi_admissible(group, xi, admissible_depth, admissible_threshold)
    k = group.rank
    sums = [1.0]
    L = 0
    while k > 0:
        n = L + 1
        if max_length is not None and n > max_length:
            raise TruncationBudgetError(
                f"tolerance {tol} not reached by length {L}",
                achieved_tail=shell_tail(sums)[0], length=L)
        if words_up_to(k, n) > cap:
            raise TruncationBudgetError(
                f"word cap {cap} reached at length {L} before tolerance {tol}",
                achieved_tail=shell_tail(sums)[0], length=L)
        sh = group.shell(n, cap)
        c, _ = _orbit_data(sh.a, sh.b, xi)
        sums.append(math.fsum(np.exp(0.5 * c)))
        L = n
        tail, rho, _ = shell_tail(sums)
        if sums[-1] < tol and tail < tol:
            break
        if n >= 3 and 0 < rho < 1:
            need = n + math.ceil(math.log(tol / sums[-1]) / math.log(rho))
            if words_up_to(k, need) > cap:
                raise TruncationBudgetError(
                    f"tolerance {tol} needs about {need} letters "
                    f"({words_up_to(k, need):.3g} words > cap {cap}); "
                    f"measured shell ratio {rho:.4f}",
                    achieved_tail=tail, length=L)
    a, b, lengths = group.orbit_arrays(L, cap)
    c, eta = _orbit_data(a, b, xi)
    c[0] = 0.0
    eta[0] = xi
    tail = shell_tail(sums)[0] if L > 0 else 0.0
    return EisensteinContext(group, xi, L, tol, a, b, lengths, c, eta, tuple(sums), tail, margin)


def _split(z):
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("evaluation points must lie in the open disc")
    return np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag)


def _shape_like(z, v):
    if np.ndim(z) == 0:
        return v[0].item()
    return v.reshape(np.shape(z))


def _wave(ctx, lam, z, want_imag, nthreads):
    x, y = _split(z)
    return kernels.wave_sum(x, y, ctx.eta.real.copy(), ctx.eta.imag.copy(), ctx.c, lam,
                            want_imag, nthreads)


def eval_F(ctx: EisensteinContext, lam: float, z, nthreads: int = 1):
    """``F_lambda(z, xi) = sum exp(B/2) cos(lambda B)``, ``B = B_xi(0, gamma z)``."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    return _shape_like(z, _wave(ctx, lam, z, False, nthreads)[0])


def eval_F_bound(ctx: EisensteinContext, lam: float, z, nthreads: int = 1):
    """``(F, sum exp(B/2))``; the second value bounds ``|F|`` for every lambda."""
    re, _, mag = _wave(ctx, lam, z, False, nthreads)
    return _shape_like(z, re), _shape_like(z, mag)


def eval_E_complex(ctx: EisensteinContext, lam: float, z, nthreads: int = 1):
    """``E_{1/2 + i lambda}(z, xi)``; its real part is bit-identical to :func:`eval_F`."""
    re, im, _ = _wave(ctx, lam, z, True, nthreads)
    return _shape_like(z, re + 1j * im)


def eval_E1(ctx: EisensteinContext, z, nthreads: int = 1):
    """``E_1(z, xi) = sum exp(B_xi(0, gamma z))``."""
    x, y = _split(z)
    out = kernels.e1_sum(x, y, ctx.eta.real.copy(), ctx.eta.imag.copy(), ctx.c, nthreads)
    return _shape_like(z, out)


def laplacian_residual(ctx: EisensteinContext, lam: float, z, h: float = 1e-3,
                       which: str = "F"):
    """Relative residual of the 5-point hyperbolic Laplacian.

    ``Delta = -((1 - |z|^2)^2 / 4)(d_xx + d_yy)``.  For ``which="F"`` the
    residual is ``|Delta_h F - (1/4 + lambda^2) F|`` over
    ``(1/4 + lambda^2) max(|F|, 0.1 sum exp(B/2))``; for ``which="E1"`` it is
    ``|Delta_h E1|`` over ``E1 / 4``.
    """
    z = np.asarray(z, dtype=complex)
    zz = z.ravel()
    stencil = np.concatenate([zz, zz + h, zz - h, zz + 1j * h, zz - 1j * h])
    n = zz.size
    if which == "F":
        f, mag = eval_F_bound(ctx, lam, stencil)
        f, mag = np.atleast_1d(f), np.atleast_1d(mag)
        ev = 0.25 + lam * lam
    elif which == "E1":
        f = np.atleast_1d(eval_E1(ctx, stencil))
        ev = 0.0
    else:
        raise ValueError("which must be 'F' or 'E1'")
    f0 = f[:n]
    lap = (f[n:2 * n] + f[2 * n:3 * n] + f[3 * n:4 * n] + f[4 * n:] - 4.0 * f0) / (h * h)
    delta = -0.25 * (1.0 - np.abs(zz) ** 2) ** 2 * lap
    if which == "F":
        scale = ev * np.maximum(np.abs(f0), 0.1 * mag[:n])
    else:
        scale = 0.25 * f0
    res = np.abs(delta - ev * f0) / scale
    return res[0].item() if z.ndim == 0 else res.reshape(z.shape)


# ---------------------------------------------------------------- traces


@dataclass(frozen=True)
class TraceSamples:
    chart: GeodesicChart
    alpha: float
    beta: float
    n: int
    lam: float
    r: np.ndarray = field(repr=False)
    F: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    bound: np.ndarray = field(repr=False, default=None)

    @property
    def arclength_span(self) -> float:
        return float(self.s[-1] - self.s[0])


def trace_along(ctx: EisensteinContext, lam: float, chart: GeodesicChart, interval,
                n: int, nthreads: int = 1) -> TraceSamples:
    """Samples of ``r -> F_lambda(g(r), xi)`` on a uniform ``r`` grid."""
    alpha, beta = map(float, interval)
    if not -1.0 < alpha < beta < 1.0:
        raise ValueError("need -1 < alpha < beta < 1")
    if n < 2:
        raise ValueError("need n >= 2")
    r = np.linspace(alpha, beta, n)
    pts, s = chart_eval(chart, r)
    f, mag = eval_F_bound(ctx, lam, pts, nthreads)
    return TraceSamples(chart, alpha, beta, n, float(lam), r, np.asarray(f), s, np.asarray(mag))


# ---------------------------------------------------------------- complex log


@lru_cache(maxsize=None)
def _gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def G_eta(eta, z):
    """``G_eta(z) = (1 - z^2) / ((z - eta)(z - conj(eta)))``."""
    eta = np.asarray(eta, dtype=complex)
    z = np.asarray(z, dtype=complex)
    return (1.0 - z * z) / ((z - eta) * (z - np.conj(eta)))


def _log_g_integrand(eta, zc, t):
    w = t * zc
    return zc * (-2.0 * w / (1.0 - w * w) - 1.0 / (w - eta) - 1.0 / (w - np.conj(eta)))


def complex_log_G(eta, zc, r_max: float = R_MAX, tol: float = 1e-11,
                  fail_tol: float = 1e-10):
    """``L(G_eta)(zc) = int_0^1 zc G'(t zc) / G(t zc) dt`` by Gauss-Legendre.

    ``eta`` and ``zc`` broadcast.  The order doubles from 16 until two
    successive results agree to ``tol``; if the last difference at the
    maximum order still exceeds ``fail_tol`` a :class:`QuadratureError`
    is raised.
    """
    eta = np.asarray(eta, dtype=complex)
    zc = np.asarray(zc, dtype=complex)
    if np.any(np.abs(zc) > r_max):
        raise ValueError(f"|zc| must not exceed r_max = {r_max}")
    if np.any(np.abs(np.abs(eta) - 1.0) > 1e-12):
        raise ValueError("eta must lie on the unit circle")
    eta_b, zc_b = np.broadcast_arrays(eta, zc)
    prev = None
    diff = math.inf
    for order in QUAD_ORDERS:
        t, w = _gauss_legendre(order)
        vals = _log_g_integrand(eta_b[..., None], zc_b[..., None], t) @ w
        if prev is not None:
            diff = float(np.max(np.abs(vals - prev), initial=0.0))
            if diff <= tol:
                break
        prev = vals
    if diff > fail_tol:
        raise QuadratureError(f"complex log quadrature did not converge (diff {diff:.3g})")
    return vals[()] if vals.ndim == 0 else vals


def complex_log_G_closed(eta, zc):
    """Closed form ``Log(1 - z^2) - Log(1 - z conj(eta)) - Log(1 - z eta)``.

    Each argument has positive real part on the disc, so the principal
    branches agree with the integral definition.
    """
    eta = np.asarray(eta, dtype=complex)
    zc = np.asarray(zc, dtype=complex)
    return np.log(1.0 - zc * zc) - np.log(1.0 - zc * np.conj(eta)) - np.log(1.0 - zc * eta)


# ---------------------------------------------------------------- holomorphic extension


def _check_zc(zc, r_max):
    zc = np.asarray(zc, dtype=complex)
    if np.any(np.abs(zc) > r_max):
        raise ValueError(f"|zc| must not exceed r_max = {r_max}")
    return zc


def holomorphic_F_scaled(ctx: EisensteinContext, lam: float, chart: GeodesicChart, zc,
                         r_max: float = R_MAX, method: str = "closed", nthreads: int = 1):
    """Holomorphic extension as ``(mantissa, log_scale)``.

    The value is ``mantissa * exp(log_scale)``; the split keeps large
    ``lambda`` finite.  ``method`` selects the closed-form logarithm (fast,
    compiled) or the Gauss-Legendre quadrature of the defining integral.
    """
    zc = _check_zc(zc, r_max)
    cp, eta = ctx.chart_data(chart)
    flat = np.atleast_1d(zc).ravel()
    if method == "closed":
        re, im, scale = kernels.holo_sum(np.ascontiguousarray(flat.real),
                                         np.ascontiguousarray(flat.imag),
                                         eta.real.copy(), eta.imag.copy(), cp, lam, nthreads)
        mant = re + 1j * im
    elif method == "quadrature":
        mant = np.empty(flat.size, complex)
        scale = np.empty(flat.size)
        for i, z in enumerate(flat):
            lg = complex_log_G(eta, z, r_max)
            mant[i], scale[i] = _holo_terms(cp, lg, lam)
    else:
        raise ValueError("method must be 'closed' or 'quadrature'")
    if zc.ndim == 0:
        return complex(mant[0]), float(scale[0])
    return mant.reshape(zc.shape), scale.reshape(zc.shape)


def _holo_terms(cp, lg, lam):
    """``sum exp((c + lg)/2) cos(lambda c + lambda lg)`` with a common scale.

    ``cos(a + ib) = cos a cosh b - i sin a sinh b`` is expanded explicitly.
    """
    a = lam * (cp + lg.real)
    v = lam * lg.imag
    s = float(np.max(np.abs(v), initial=0.0))
    ch = 0.5 * (np.exp(v - s) + np.exp(-v - s))
    sh = 0.5 * (np.exp(v - s) - np.exp(-v - s))
    cosw = np.cos(a) * ch - 1j * np.sin(a) * sh
    terms = np.exp(0.5 * (cp + lg)) * cosw
    return complex(math.fsum(terms.real), math.fsum(terms.imag)), s


def holomorphic_F(ctx: EisensteinContext, lam: float, chart: GeodesicChart, zc,
                  r_max: float = R_MAX, method: str = "closed", nthreads: int = 1):
    """``F~(zc) = sum exp((c' + L_eta(zc))/2) cos(lambda c' + lambda L_eta(zc))``.

    Restricts to ``F_lambda(g(r), xi)`` for real ``zc = r``.  May overflow
    for very large ``lambda``; use :func:`log_abs_holomorphic_F` there.
    """
    mant, scale = holomorphic_F_scaled(ctx, lam, chart, zc, r_max, method, nthreads)
    return mant * np.exp(scale)


def log_abs_holomorphic_F(ctx: EisensteinContext, lam: float, chart: GeodesicChart, zc,
                          r_max: float = R_MAX, nthreads: int = 1):
    mant, scale = holomorphic_F_scaled(ctx, lam, chart, zc, r_max, "closed", nthreads)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(mant)) + scale


@dataclass(frozen=True)
class GrowthBound:
    """Termwise bound ``|F~| <= C exp(beta lambda)`` on ``|zc| <= radius``."""

    C: float
    beta: float
    radius: float


def holomorphic_bound(ctx: EisensteinContext, chart: GeodesicChart, radius: float,
                      n_theta: int = 256) -> GrowthBound:
    """``C = max sum exp((c' + Re L)/2)``, ``beta = max |Im L|`` over the circle.

    Both maxima are attained on the boundary circle (harmonic and
    subharmonic integrands), sampled at ``n_theta`` points.
    """
    cp, eta = ctx.chart_data(chart)
    zc = radius * np.exp(2j * np.pi * np.arange(n_theta) / n_theta)
    lg = complex_log_G_closed(eta[None, :], zc[:, None])
    beta = float(np.abs(lg.imag).max())
    C = float(np.exp(0.5 * (cp[None, :] + lg.real)).sum(axis=1).max())
    return GrowthBound(C, beta, float(radius))

"""Exact formulas in the Poincare disc model.

Points are plain Python/numpy complex numbers.  Interior points satisfy
``|z| < 1``; boundary points are renormalised onto the unit circle.  The
disc is the only internal model: half-plane data is converted on entry with
the Cayley transform.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateGeodesicError,
    DomainError,
    InvalidIsometryError,
    OutOfChartError,
    SingularEvaluationError,
)

BOUNDARY_TOL = 1e-12
ISOMETRY_TOL = 1e-12


def disc_point(z) -> complex:
    """Validate an interior point of the unit disc."""
    z = complex(z)
    if not (z.real * z.real + z.imag * z.imag < 1.0):
        raise DomainError(f"point {z} is not inside the unit disc")
    return z


def boundary_point(z) -> complex:
    """Validate a point of the unit circle and renormalise it to modulus 1."""
    z = complex(z)
    r = abs(z)
    if not abs(r * r - 1.0) <= BOUNDARY_TOL:
        raise DomainError(f"point {z} is not on the unit circle (|z|={r!r})")
    return z / r


def _one_minus_abs2(z):
    r = np.abs(z)
    return (1.0 - r) * (1.0 + r)


@dataclass(frozen=True)
class DiscIsometry:
    """Orientation-preserving isometry ``z -> (a z + b) / (conj(b) z + conj(a))``.

    The normalisation ``|a|^2 - |b|^2 = 1`` is checked relative to
    ``|a|^2 + |b|^2`` so long products of generators remain admissible.
    """

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        na, nb = abs(a) ** 2, abs(b) ** 2
        if not abs(na - nb - 1.0) <= ISOMETRY_TOL * max(1.0, na + nb):
            raise InvalidIsometryError(
                f"|a|^2 - |b|^2 = {na - nb!r}, expected 1 (a={a}, b={b})"
            )

    @classmethod
    def normalized(cls, a, b) -> "DiscIsometry":
        a, b = complex(a), complex(b)
        det = abs(a) ** 2 - abs(b) ** 2
        if det <= 0:
            raise InvalidIsometryError("|a|^2 - |b|^2 must be positive")
        s = math.sqrt(det)
        return cls(a / s, b / s)

    @classmethod
    def identity(cls) -> "DiscIsometry":
        return cls(1.0, 0.0)

    @classmethod
    def rotation(cls, angle: float) -> "DiscIsometry":
        return cls(cmath.exp(0.5j * angle), 0.0)

    @classmethod
    def translation_to(cls, p) -> "DiscIsometry":
        """The transvection along the diameter through ``p`` sending 0 to ``p``."""
        p = disc_point(p)
        s = 1.0 / math.sqrt(float(_one_minus_abs2(p)))
        return cls(s, p * s)

    def __call__(self, z):
        return apply_isometry(self, z)

    def __matmul__(self, other: "DiscIsometry") -> "DiscIsometry":
        return compose(self, other)

    def inverse(self) -> "DiscIsometry":
        return invert(self)

    @property
    def matrix(self) -> np.ndarray:
        a, b = self.a, self.b
        return np.array([[a, b], [b.conjugate(), a.conjugate()]])

    @property
    def translation_length(self) -> float:
        """Translation length ``2 acosh |Re a|`` (0 for elliptic elements)."""
        t = abs(self.a.real)
        return 2.0 * math.acosh(t) if t > 1.0 else 0.0


def apply_isometry(m: DiscIsometry, z):
    """Apply ``m`` to an interior or boundary point (scalar or array).

    Boundary inputs (``|z| = 1`` within tolerance) come back renormalised.
    """
    a, b = m.a, m.b
    zz = np.asarray(z, dtype=complex)
    den = b.conjugate() * zz + a.conjugate()
    if np.any(np.abs(den) < 1e-300):
        raise SingularEvaluationError("isometry denominator vanished; corrupted input?")
    w = (a * zz + b) / den
    on_circle = np.abs(np.abs(zz) - 1.0) <= BOUNDARY_TOL
    if np.any(on_circle):
        w = np.where(on_circle, w / np.abs(w), w)
    if np.ndim(z) == 0:
        return complex(w)
    return w


def compose(m1: DiscIsometry, m2: DiscIsometry) -> DiscIsometry:
    """``compose(m1, m2)(z) == m1(m2(z))``.

    Cancellation between large operands (a word times its near-inverse)
    loses absolute rather than relative precision; such small products are
    renormalised, which is accurate precisely because they are small.
    """
    a1, b1, a2, b2 = m1.a, m1.b, m2.a, m2.b
    a = a1 * a2 + b1 * b2.conjugate()
    b = a1 * b2 + b1 * a2.conjugate()
    na, nb = abs(a) ** 2, abs(b) ** 2
    if abs(na - nb - 1.0) <= ISOMETRY_TOL * max(1.0, na + nb):
        return DiscIsometry(a, b)
    scale = (abs(a1) + abs(b1)) ** 2 * (abs(a2) + abs(b2)) ** 2
    if abs(na - nb - 1.0) <= ISOMETRY_TOL * scale:
        return DiscIsometry.normalized(a, b)
    return DiscIsometry(a, b)


def invert(m: DiscIsometry) -> DiscIsometry:
    return DiscIsometry(m.a.conjugate(), -m.b)


def dist_from_origin(z):
    """``d(0, z) = log((1 + |z|) / (1 - |z|))``; vectorised."""
    return 2.0 * np.arctanh(np.abs(z))


def dist(z, w) -> float:
    """Hyperbolic distance, computed as ``d(0, m^-1 w)`` with ``m(0) = z``."""
    z, w = disc_point(z), disc_point(w)
    u = apply_isometry(invert(DiscIsometry.translation_to(z)), w)
    return float(dist_from_origin(u))


def busemann(xi, z, w):
    """Busemann function ``B_xi(z, w)``; vectorised over ``z`` and ``w``.

    Equals ``log((1-|w|^2)|z-xi|^2 / ((1-|z|^2)|w-xi|^2))``.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    out = (
        np.log(_one_minus_abs2(w))
        - np.log(_one_minus_abs2(z))
        + 2.0 * np.log(np.abs(z - xi))
        - 2.0 * np.log(np.abs(w - xi))
    )
    if out.ndim == 0:
        return float(out)
    return out


def busemann_from_origin(xi, z):
    """``B_xi(0, z) = log((1-|z|^2) / |z-xi|^2)``; vectorised."""
    z = np.asarray(z, dtype=complex)
    out = np.log(_one_minus_abs2(z)) - 2.0 * np.log(np.abs(z - xi))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class GeodesicChart:
    """A geodesic parametrised as ``r -> map(r)``, ``r in (-1, 1)``.

    ``map(0)`` is the point of the geodesic closest to the origin and
    ``map(-1) = eta1``, ``map(+1) = eta2``.
    """

    map: DiscIsometry
    eta1: complex
    eta2: complex

    def __call__(self, r):
        return chart_eval(self, r)[0]

    @property
    def center(self) -> complex:
        return complex(apply_isometry(self.map, 0.0))

    def point(self, r):
        return chart_eval(self, r)[0]

    def arclength(self, r):
        return chart_eval(self, r)[1]


def geodesic_from_endpoints(eta1, eta2) -> GeodesicChart:
    eta1, eta2 = boundary_point(eta1), boundary_point(eta2)
    if abs(eta1 - eta2) <= 1e-9:
        raise DegenerateGeodesicError("geodesic endpoints coincide")
    mid = eta1 + eta2
    if abs(mid) <= 1e-14:
        # a diameter: rotate (-1, 1) onto it
        g = DiscIsometry.rotation(cmath.phase(eta2))
    else:
        u = mid / abs(mid)
        cos_half = abs(mid) / 2.0
        sin_half = abs(eta1 - eta2) / 2.0
        foot = u * (1.0 - sin_half) / cos_half
        direction = 1j * u
        g = DiscIsometry.translation_to(foot) @ DiscIsometry.rotation(cmath.phase(direction))
        if abs(apply_isometry(g, 1.0) - eta2) > abs(apply_isometry(g, 1.0) - eta1):
            g = DiscIsometry.translation_to(foot) @ DiscIsometry.rotation(cmath.phase(-direction))
    return GeodesicChart(g, eta1, eta2)


def chart_eval(chart: GeodesicChart, r):
    """Point ``g(r)`` and signed arclength ``s(r) = d(g(0), g(r))``."""
    rr = np.asarray(r, dtype=float)
    if np.any(np.abs(rr) >= 1.0):
        raise OutOfChartError("chart parameter must satisfy |r| < 1")
    pts = apply_isometry(chart.map, rr.astype(complex))
    s = 2.0 * np.arctanh(rr)
    if rr.ndim == 0:
        return complex(pts), float(s)
    return pts, s


def cayley_to_disc(p):
    """Cayley transform ``p -> (p - i)/(p + i)``.

    Accepts a half-plane point (``Im p > 0``), a real boundary value, or
    ``math.inf`` (sent to 1).
    """
    if isinstance(p, float) and math.isinf(p):
        return 1.0 + 0.0j
    p = complex(p)
    if p.imag < 0 or (p.imag == 0 and not math.isfinite(p.real)):
        raise DomainError(f"{p} is not in the closed upper half-plane")
    if p.imag == 0:
        w = (p - 1j) / (p + 1j)
        return w / abs(w)
    return (p - 1j) / (p + 1j)


def disc_to_cayley(z):
    """Inverse Cayley transform ``z -> i (1 + z)/(1 - z)``."""
    z = complex(z)
    if z == 1:
        return math.inf
    return 1j * (1 + z) / (1 - z)


def conjugate_to_disc(matrix) -> DiscIsometry:
    """Conjugate a real 2x2 half-plane isometry (det > 0) into the disc."""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (2, 2):
        raise DomainError("expected a 2x2 matrix")
    det = float(np.linalg.det(m))
    if det <= 0:
        raise DomainError("half-plane isometry must have positive determinant")
    m = m / math.sqrt(det)
    c = np.array([[1.0, -1j], [1.0, 1j]])
    c_inv = np.array([[1j, 1j], [-1.0, 1.0]]) / 2j
    n = c @ m @ c_inv
    return DiscIsometry.normalized(n[0, 0], n[0, 1])


def half_plane_dist(p, q) -> float:
    p, q = complex(p), complex(q)
    if p.imag <= 0 or q.imag <= 0:
        raise DomainError("half-plane points need positive imaginary part")
    return math.acosh(1.0 + abs(p - q) ** 2 / (2.0 * p.imag * q.imag))


def hyperbolic_area_disc(r: float) -> float:
    """Area ``4 pi r^2 / (1 - r^2)`` of the Euclidean disc ``|z| < r``."""
    if not 0.0 < r < 1.0:
        raise DomainError("radius must lie in (0, 1)")
    return 4.0 * math.pi * r * r / (1.0 - r * r)


def cell_area_weight(z):
    """Metric density ``4 / (1 - |z|^2)^2``; vectorised."""
    return 4.0 / _one_minus_abs2(z) ** 2


def length_weight(z):
    """Line-element density ``2 / (1 - |z|^2)``; vectorised."""
    return 2.0 / _one_minus_abs2(z)

"""Schottky groups in the disc: validation, word enumeration, orbit data.

Group elements are enumerated shell by shell (all reduced words of one
length at a time) in breadth-first order; inside a shell words are sorted
lexicographically with the letter order ``1, 2, ..., k, -1, ..., -k``.
Shell data is kept in numpy arrays; :class:`GroupElement` objects are only
materialised on request.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    BudgetExceededError,
    InsufficientDataError,
    NoClearIntervalError,
    NonHyperbolicError,
    SchottkyViolationError,
    XiInLimitSetError,
)
from .hyperbolic import (
    DiscIsometry,
    GeodesicChart,
    apply_isometry,
    boundary_point,
    conjugate_to_disc,
    geodesic_from_endpoints,
    invert,
)

DEFAULT_WORD_CAP = 10**7
PAIRING_TOL = 1e-9


# ---------------------------------------------------------------- generators


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for one hyperbolic generator.

    ``kind`` is ``"axis"`` (translate by ``length`` along the geodesic from
    ``p`` to ``q``), ``"half_plane_dilation"`` (``z -> e^length z`` in the
    upper half-plane, conjugated into the disc) or ``"matrix"`` (explicit
    ``a, b``).
    """

    kind: str
    p: complex | None = None
    q: complex | None = None
    length: float | None = None
    a: complex | None = None
    b: complex | None = None

    @classmethod
    def axis(cls, p, q, length):
        return cls("axis", p=complex(p), q=complex(q), length=float(length))

    @classmethod
    def half_plane_dilation(cls, length):
        return cls("half_plane_dilation", length=float(length))

    @classmethod
    def matrix(cls, a, b):
        return cls("matrix", a=complex(a), b=complex(b))

    def isometry(self) -> DiscIsometry:
        if self.kind == "axis":
            if not self.length > 0:
                raise NonHyperbolicError("translation length must be positive")
            g = geodesic_from_endpoints(self.p, self.q).map
            t = DiscIsometry(math.cosh(self.length / 2), math.sinh(self.length / 2))
            m = g @ t @ invert(g)
        elif self.kind == "half_plane_dilation":
            if not self.length > 0:
                raise NonHyperbolicError("dilation length must be positive")
            e = math.exp(self.length / 2)
            m = conjugate_to_disc([[e, 0.0], [0.0, 1.0 / e]])
        elif self.kind == "matrix":
            m = DiscIsometry(self.a, self.b)
        else:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        check_hyperbolic(m)
        return m


def check_hyperbolic(m: DiscIsometry) -> None:
    if abs(m.b) == 0.0:
        raise NonHyperbolicError("b = 0: rotation about the origin is elliptic")
    if not abs(m.a.real) > 1.0:
        raise NonHyperbolicError(f"|Re a| = {abs(m.a.real)!r} <= 1: not hyperbolic")


class IsometricCircle(NamedTuple):
    """Circle ``|conj(b) z + conj(a)| = 1`` of the isometry for ``letter``."""

    letter: int
    center: complex
    radius: float

    def arc(self):
        """(start, mid, end) of the boundary arc cut out on the unit circle."""
        u = self.center / abs(self.center)
        half = math.acos(min(1.0, 1.0 / abs(self.center)))
        rot = complex(math.cos(half), math.sin(half))
        return u / rot, u, u * rot


def isometric_circle(m: DiscIsometry, letter: int = 0) -> IsometricCircle:
    b = m.b
    return IsometricCircle(letter, -m.a.conjugate() / b.conjugate(), 1.0 / abs(b))


# ---------------------------------------------------------------- shells


@dataclass
class Shell:
    """All reduced words of one length, as parallel arrays."""

    a: np.ndarray
    b: np.ndarray
    parent: np.ndarray
    letter: np.ndarray

    def __len__(self):
        return self.a.shape[0]

    @property
    def displacement(self) -> np.ndarray:
        """``d(0, gamma 0) = 2 log(|a| + |b|)``."""
        return 2.0 * np.log(np.abs(self.a) + np.abs(self.b))


def words_of_length(k: int, n: int) -> int:
    if n == 0:
        return 1
    if k == 0:
        return 0
    return 2 * k * (2 * k - 1) ** (n - 1)


def words_up_to(k: int, L: int) -> int:
    return sum(words_of_length(k, n) for n in range(L + 1))


@dataclass(frozen=True)
class GroupElement:
    word: tuple
    isometry: DiscIsometry
    displacement: float


@dataclass(eq=False)
class SchottkyGroup:
    generators: tuple
    circles: tuple
    _shells: list = field(default_factory=list, repr=False)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def elementary(self) -> bool:
        return self.rank == 1

    @property
    def letters(self) -> tuple:
        k = self.rank
        return tuple(range(1, k + 1)) + tuple(-i for i in range(1, k + 1))

    def letter_isometry(self, letter: int) -> DiscIsometry:
        g = self.generators[abs(letter) - 1]
        return g if letter > 0 else invert(g)

    def circle(self, letter: int) -> IsometricCircle:
        return self.circles[self.letters.index(letter)]

    # shells are memoised; the group itself never changes
    def shell(self, n: int, cap: int = DEFAULT_WORD_CAP) -> Shell:
        if words_up_to(self.rank, n) > cap:
            raise BudgetExceededError(
                f"{words_up_to(self.rank, n)} words up to length {n} exceed the cap {cap}"
            )
        if not self._shells:
            self._shells.append(Shell(np.ones(1, complex), np.zeros(1, complex),
                                      np.full(1, -1), np.zeros(1, np.int8)))
        while len(self._shells) <= n:
            self._shells.append(self._next_shell(self._shells[-1]))
        return self._shells[n]

    def shells(self, L: int, cap: int = DEFAULT_WORD_CAP) -> list:
        self.shell(L, cap)
        return self._shells[: L + 1]

    def _next_shell(self, prev: Shell) -> Shell:
        letters = np.array(self.letters, dtype=np.int8)
        if self.rank == 0:
            empty = np.zeros(0, complex)
            return Shell(empty, empty, np.zeros(0, int), np.zeros(0, np.int8))
        ga = np.array([self.letter_isometry(x).a for x in self.letters])
        gb = np.array([self.letter_isometry(x).b for x in self.letters])
        keep = prev.letter[:, None] != -letters[None, :]
        if len(prev) == 1 and prev.letter[0] == 0:
            keep[:] = True
        a = prev.a[:, None] * ga[None, :] + prev.b[:, None] * np.conj(gb)[None, :]
        b = prev.a[:, None] * gb[None, :] + prev.b[:, None] * np.conj(ga)[None, :]
        parent = np.broadcast_to(np.arange(len(prev))[:, None], keep.shape)
        letter = np.broadcast_to(letters[None, :], keep.shape)
        return Shell(a[keep], b[keep], parent[keep], letter[keep])

    def word(self, n: int, index: int) -> tuple:
        out = []
        while n > 0:
            sh = self._shells[n]
            out.append(int(sh.letter[index]))
            index = int(sh.parent[index])
            n -= 1
        return tuple(reversed(out))

    def orbit_arrays(self, L: int, cap: int = DEFAULT_WORD_CAP):
        """Concatenated ``(a, b, length)`` arrays for all words of length <= L."""
        shells = self.shells(L, cap)
        a = np.concatenate([s.a for s in shells])
        b = np.concatenate([s.b for s in shells])
        lengths = np.concatenate([np.full(len(s), n) for n, s in enumerate(shells)])
        return a, b, lengths


def build_group(specs) -> SchottkyGroup:
    """Validate generators and build the group.

    An empty list gives the trivial group (a single identity term in every
    orbit sum), which is useful for closed-form checks.
    """
    gens = tuple(s.isometry() if isinstance(s, GeneratorSpec) else s for s in specs)
    for g in gens:
        check_hyperbolic(g)
    group = SchottkyGroup(gens, ())
    circles = tuple(isometric_circle(group.letter_isometry(x), x) for x in group.letters)
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            ci, cj = circles[i], circles[j]
            depth = ci.radius + cj.radius - abs(ci.center - cj.center)
            if depth >= 0:
                raise SchottkyViolationError(
                    f"isometric discs of letters {ci.letter} and {cj.letter} overlap "
                    f"(depth {depth:.6g})",
                    pair=(ci.letter, cj.letter),
                    overlap=depth,
                )
    group = SchottkyGroup(gens, circles)
    _check_pairing(group)
    return group


def _check_pairing(group: SchottkyGroup, samples: int = 20) -> None:
    for x in group.letters:
        src, dst = group.circle(x), group.circle(-x)
        ang = np.linspace(0, 2 * np.pi, 4 * samples, endpoint=False)
        pts = src.center + 1.02 * src.radius * np.exp(1j * ang)
        pts = pts[np.abs(pts) < 1.0][:samples]
        img = apply_isometry(group.letter_isometry(x), pts)
        if np.any(np.abs(img - dst.center) >= dst.radius + PAIRING_TOL):
            raise SchottkyViolationError(
                f"generator {x} does not map the exterior of its isometric circle "
                f"into the circle of {-x}",
                pair=(x, -x),
            )


def enumerate_elements(group: SchottkyGroup, L: int, cap: int = DEFAULT_WORD_CAP):
    """All reduced words of length <= L in canonical order."""
    if L < 0:
        raise ValueError("L must be >= 0")
    out = []
    for n, sh in enumerate(group.shells(L, cap)):
        disp = sh.displacement
        for i in range(len(sh)):
            out.append(GroupElement(group.word(n, i), DiscIsometry(sh.a[i], sh.b[i]),
                                    float(disp[i])))
    return out


# ---------------------------------------------------------------- series


@dataclass(frozen=True)
class PoincareResult:
    value: float
    tail_indicator: float
    diverging: bool
    shells: tuple

    def __iter__(self):
        return iter((self.value, self.tail_indicator))


def shell_tail(shell_sums, clamp: float = 0.99):
    """Geometric tail estimate from the last two shell sums.

    Returns ``(tail, ratio, diverging)``.
    """
    if len(shell_sums) < 2 or shell_sums[-1] == 0.0:
        return 0.0, 0.0, False
    prev = shell_sums[-2]
    rho = shell_sums[-1] / prev if prev > 0 else math.inf
    diverging = rho >= 1.0
    r = min(max(rho, 0.0), clamp)
    return shell_sums[-1] * r / (1.0 - r), rho, diverging


def poincare_partial(group: SchottkyGroup, s: float, L: int) -> PoincareResult:
    """Partial Poincare series ``sum exp(-s d(0, gamma 0))`` over words <= L."""
    if not s > 0:
        raise ValueError("s must be positive")
    sums = [math.fsum(np.exp(-s * sh.displacement)) for sh in group.shells(L)]
    terms = np.concatenate([np.exp(-s * sh.displacement) for sh in group.shells(L)])
    tail, _, diverging = shell_tail(sums)
    return PoincareResult(math.fsum(terms), tail, diverging, tuple(sums))


@dataclass(frozen=True)
class DeltaEstimate:
    delta_hat: float
    slope: float
    t_min: float
    t_max: float
    n_points: int


def _auto_length(k: int, budget: int = 200_000, max_length: int = 400) -> int:
    if k <= 1:
        return max_length if k == 1 else 0
    L = 1
    while L < max_length and words_up_to(k, L + 1) <= budget:
        L += 1
    return L


def estimate_delta(group: SchottkyGroup, L: int | None = None) -> DeltaEstimate:
    """Orbit-growth estimate of the critical exponent.

    Least-squares slope of ``log N(T)`` against ``T`` where
    ``N(T) = #{gamma : d(0, gamma 0) <= T}``, fitted between the median
    displacement of length-2 words and the largest displacement of
    length-(L-1) words.
    """
    if L is None:
        L = _auto_length(group.rank)
    if L < 4:
        raise InsufficientDataError("need L >= 4")
    shells = group.shells(L)
    disp = np.sort(np.concatenate([s.displacement for s in shells]))
    t_min = float(np.median(shells[2].displacement))
    t_max = float(shells[L - 1].displacement.max())
    counts = np.searchsorted(disp, disp, side="right")
    sel = (disp >= t_min) & (disp <= t_max)
    t, uniq_idx = np.unique(disp[sel], return_index=True)
    if t.size < 10:
        raise InsufficientDataError(f"only {t.size} distinct displacements in the fit range")
    logn = np.log(counts[sel][uniq_idx])
    slope = float(np.polyfit(t, logn, 1)[0])
    return DeltaEstimate(min(max(slope, 0.0), 1.0), slope, t_min, t_max, int(t.size))


def limit_set_sample(group: SchottkyGroup, L: int) -> np.ndarray:
    """Approximate limit points: ``gamma 0`` projected radially, ``|gamma| = L``."""
    if group.rank == 0:
        return np.zeros(0, complex)
    if group.elementary:
        return fixed_points(group.generators[0])
    sh = group.shell(L)
    v = sh.b * sh.a
    return v / np.abs(v)


def fixed_points(m: DiscIsometry) -> np.ndarray:
    """Repelling and attracting boundary fixed points of a hyperbolic ``m``."""
    a, b = m.a, m.b
    disc = np.sqrt((a.conjugate() - a) ** 2 + 4 * abs(b) ** 2 + 0j)
    roots = np.array([(a - a.conjugate() - disc) / (2 * b.conjugate()),
                      (a - a.conjugate() + disc) / (2 * b.conjugate())])
    roots = roots / np.abs(roots)
    # attracting fixed point: |derivative| < 1 there
    deriv = 1.0 / np.abs(b.conjugate() * roots + a.conjugate()) ** 2
    return roots[np.argsort(-deriv)]


def cylinder_arcs(group: SchottkyGroup, L: int):
    """Boundary arcs ``(start, mid, end)`` covering the limit set at depth L."""
    if L < 1:
        raise ValueError("L must be >= 1")
    arcs = {x: np.array(group.circle(-x).arc()) for x in group.letters}
    if L == 1:
        return np.array([arcs[x] for x in group.letters])
    prev = group.shell(L - 1)
    sh = group.shell(L)
    pa, pb = prev.a[sh.parent], prev.b[sh.parent]
    base = np.array([arcs[int(x)] for x in sh.letter])
    img = (pa[:, None] * base + pb[:, None]) / (np.conj(pb)[:, None] * base + np.conj(pa)[:, None])
    return img / np.abs(img)


def _arc_distance(xi: complex, arcs: np.ndarray) -> np.ndarray:
    two_pi = 2 * np.pi
    th = np.angle(arcs)
    t_end = np.mod(th[:, 2] - th[:, 0], two_pi)
    t_mid = np.mod(th[:, 1] - th[:, 0], two_pi)
    t_xi = np.mod(np.angle(xi) - th[:, 0], two_pi)
    ccw = t_mid <= t_end
    inside = np.where(ccw, t_xi <= t_end, t_xi >= t_end)
    ends = np.minimum(np.abs(xi - arcs[:, 0]), np.abs(xi - arcs[:, 2]))
    return np.where(inside, 0.0, ends)


def xi_admissible(group: SchottkyGroup, xi, L: int | None = None,
                  threshold: float = 1e-3) -> float:
    """Chordal margin between ``xi`` and the limit set, certified at depth L.

    The margin is the distance from ``xi`` to the depth-L cylinder arcs,
    which contain the limit set, and to the sampled limit points.  Raises
    :class:`XiInLimitSetError` when it does not exceed ``threshold``.
    """
    xi = boundary_point(xi)
    if group.rank == 0:
        return math.inf
    if L is None:
        L = min(_auto_length(group.rank, budget=20_000), 20)
    margin = float(_arc_distance(xi, cylinder_arcs(group, L)).min())
    samples = limit_set_sample(group, L)
    margin = min(margin, float(np.abs(samples - xi).min()))
    if not margin > threshold:
        raise XiInLimitSetError(
            f"xi = {xi} is within {margin:.3g} of the limit set (depth {L})", margin=margin
        )
    return margin


def orbit_of_boundary_point(group: SchottkyGroup, xi, L: int) -> np.ndarray:
    """``gamma^{-1} xi`` for all words of length <= L, canonical order."""
    a, b, _ = group.orbit_arrays(L)
    w = (np.conj(a) * xi - b) / (a - np.conj(b) * xi)
    return w / np.abs(w)


# ---------------------------------------------------------------- xi-NS


@dataclass(frozen=True)
class XiNsReport:
    word_length_checked: int
    min_orthogonality_margin: float
    min_equality_margin: float
    threshold: float
    passes: bool


def _min_two_distinct(d1: np.ndarray, d2: np.ndarray) -> float:
    """``min over i != j of max(d1[i], d2[j])``."""
    if d1.size < 2:
        return math.inf
    i1 = np.argsort(d1)[:2]
    i2 = np.argsort(d2)[:2]
    if i1[0] != i2[0]:
        return float(max(d1[i1[0]], d2[i2[0]]))
    return float(min(max(d1[i1[0]], d2[i2[1]]), max(d1[i1[1]], d2[i2[0]])))


def xi_ns_certificate(group: SchottkyGroup, chart: GeodesicChart, xi, L: int,
                      threshold: float = 1e-6) -> XiNsReport:
    """Check the two non-symmetry conditions over all pairs of words <= L.

    Orthogonality margin: ``min |Re(g^-1 g1^-1 xi - g^-1 g2^-1 xi)|``.
    Equality margin: chordal mismatch between ``{g1 xi, g2 xi}`` and the
    chart endpoints, minimised over pairs.
    """
    xi = boundary_point(xi)
    orbit = orbit_of_boundary_point(group, xi, L)
    if orbit.size < 2:
        return XiNsReport(L, math.inf, math.inf, threshold, True)
    eta = apply_isometry(invert(chart.map), orbit)
    re = np.sort(eta.real)
    ortho = float(np.diff(re).min())
    equal = _min_two_distinct(np.abs(orbit - chart.eta1), np.abs(orbit - chart.eta2))
    return XiNsReport(L, ortho, equal, threshold, ortho > threshold and equal > threshold)


# ---------------------------------------------------------------- clear interval


def critical_map(x):
    """``F(x) = x / (1 + sqrt(1 - x^2))``: the phase critical point for ``Re eta = x``."""
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    return x / (1.0 + np.sqrt((1.0 - x) * (1.0 + x)))


def critical_points(group: SchottkyGroup, chart: GeodesicChart, xi, L: int) -> np.ndarray:
    """Sorted possible stationary points ``F(Re(g^-1 gamma^-1 xi))``, words <= L."""
    eta = apply_isometry(invert(chart.map), orbit_of_boundary_point(group, xi, L))
    return np.sort(critical_map(eta.real))


@dataclass(frozen=True)
class ClearInterval:
    alpha: float
    beta: float
    margin: float

    @property
    def bounds(self):
        return self.alpha, self.beta

    @property
    def width(self):
        return self.beta - self.alpha


def clear_interval(group: SchottkyGroup, chart: GeodesicChart, xi, L: int, r0: float,
                   min_width: float = 1e-4) -> ClearInterval:
    """Widest sub-interval of ``[-r0, r0]`` kept away from all critical points.

    Consecutive critical points (with sentinels at +-infinity) bound the
    candidate gaps.  A gap clipped to ``[-r0, r0]`` with length ``D`` is
    shrunk by ``D/4`` on each side whose bounding critical point lies inside
    the window; critical points outside the window only bound the margin.
    The returned ``margin`` is the actual distance from J to the critical set.
    """
    if not 0 < r0 < 1:
        raise ValueError("r0 must lie in (0, 1)")
    crit = critical_points(group, chart, xi, L)
    pts = np.concatenate([[-math.inf], crit, [math.inf]])
    best = None
    for p, q in zip(pts[:-1], pts[1:]):
        lo, hi = max(p, -r0), min(q, r0)
        if hi <= lo:
            continue
        m = (hi - lo) / 4.0
        a = p + m if p >= -r0 else -r0
        b = q - m if q <= r0 else r0
        if b - a > 0 and (best is None or b - a > best[1] - best[0]):
            best = (a, b)
    if best is None or best[1] - best[0] <= min_width:
        raise NoClearIntervalError(f"no gap wider than {min_width} in [-{r0}, {r0}]")
    a, b = best
    margin = float(np.min(np.minimum(np.abs(crit - a), np.abs(crit - b)))) if crit.size else math.inf
    return ClearInterval(float(a), float(b), margin)

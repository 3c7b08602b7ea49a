"""Both sides and margins of the weighted Minkowski-type inequalities.

Every verifier returns an :class:`InequalityReport` whose ``lhs`` is the
functional evaluated on the shape and whose ``rhs`` is the comparison value
obtained from the geodesic ball sharing the relevant invariant (length,
quermassintegral, area, or ``int phi'``).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import mpmath
import numpy as np

from . import axisym, curve2d, flowlab
from .axisym import AxisymGeometry
from .curve2d import CurveGeometry
from .errors import ConfigError, ConvexityError, DomainError
from .spaceform import (
    SpaceForm,
    Weight,
    ball_Ag,
    binom_ext,
    make_weight,
    sphere_weighted_H,
    unit_sphere_area,
)

CURVE_TOL = 1e-6
AXISYM_TOL = 1e-4

Geometry = CurveGeometry | AxisymGeometry


def default_tol(geom: Geometry) -> float:
    return CURVE_TOL if isinstance(geom, CurveGeometry) else AXISYM_TOL


def shape_digest(geom: Geometry) -> str:
    rho = np.ascontiguousarray(geom.rho, dtype="<f8")
    h = hashlib.sha256(f"{geom.space.K}:{geom.n}:".encode() + rho.tobytes())
    return h.hexdigest()[:16]


@dataclass
class InequalityReport:
    theorem: str
    params: dict
    lhs: float
    rhs: float
    tol: float
    shape_digest: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), abs(self.rhs))

    @property
    def verdict(self) -> str:
        if abs(self.margin) <= self.tol * self.scale:
            return "equality"
        return "holds" if self.margin > 0 else "violated"

    @property
    def ok(self) -> bool:
        return self.verdict != "violated"

    def to_dict(self) -> dict:
        d = asdict(self)
        tol = d.pop("tol")
        d.update(margin=self.margin, scale=self.scale, verdict=self.verdict, tolerances={"equality": tol})
        return d


# --------------------------------------------------------------------------
# monotone inversion


def invert_monotone(
    f: Callable[[float], float], y: float, bracket: tuple[float, float], samples: int = 9
) -> float:
    """Solve ``f(r) = y`` for a strictly monotone ``f`` on ``bracket``.

    Bisection down to ``1e-12`` of the bracket width, then one secant step
    between the final endpoints.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise DomainError("bracket must satisfy lo < hi")
    probe = np.array([f(x) for x in np.linspace(lo, hi, samples)])
    d = np.diff(probe)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise DomainError("function is not strictly monotone on the bracket")
    sign = 1.0 if d[0] > 0 else -1.0
    flo, fhi = f(lo) - y, f(hi) - y
    if flo * fhi > 0:
        if abs(flo) <= 1e-14 * max(abs(y), 1.0):
            return lo
        if abs(fhi) <= 1e-14 * max(abs(y), 1.0):
            return hi
        raise DomainError(f"value {y} outside the range [{min(f(lo), f(hi))}, {max(f(lo), f(hi))}]")
    width = hi - lo
    while hi - lo > 1e-12 * width:
        mid = 0.5 * (lo + hi)
        fm = f(mid) - y
        if sign * fm > 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    if fhi != flo:
        r = lo - flo * (hi - lo) / (fhi - flo)
        if lo <= r <= hi:
            return r
    return 0.5 * (lo + hi)


def _grow_bracket(f, y, space: SpaceForm, start: float = 1.0) -> tuple[float, float]:
    if space.K == 1:
        return 0.0, 0.5 * math.pi
    hi = start
    while f(hi) < y:
        hi *= 2.0
        if hi > 1e6:
            raise DomainError(f"no radius reaches {y}")
    return 0.0, hi


# --------------------------------------------------------------------------
# checks


def _require_k_convex(geom: Geometry, k: int) -> None:
    for j in range(1, k + 1):
        if np.min(flowlab.sigma_field(geom, j)) <= 0:
            raise ConvexityError(f"shape is not {k}-convex (sigma_{j} <= 0 somewhere)")


def _constant_note(g: Weight, notes: list[str]) -> None:
    if g.note:
        notes.append(g.note)
    if g.is_constant:
        notes.append("constant weight: reduces to the unweighted statement; rigidity not tested")


# --------------------------------------------------------------------------
# verifiers


def verify_afw(geom: Geometry, g: Weight, k: int, l: int, tol: float | None = None) -> InequalityReport:
    """``int g(Phi) sigma_k dmu >= chi(xi^{-1}(W_l))`` for k-convex star-shaped shapes in R^n.

    ``chi(r) = C(n-1,k) w g(r^2/2) r^(n-k-1)`` and ``xi(r) = C(n-1,l) w r^(n-1-l)``
    with ``w = |S^{n-1}|`` and ``C(n-1,-1) = 1/n``.
    """
    if geom.space.K != 0:
        raise ConfigError("the sigma_k / W_l inequality is stated in Euclidean space")
    n = geom.n
    if not (-1 <= l <= k - 1 and k <= n - 1):
        raise ConfigError(f"need -1 <= l <= k-1 <= n-2, got k={k}, l={l}, n={n}")
    _require_k_convex(geom, k)
    w = unit_sphere_area(n - 1)
    lhs = flowlab.monitor_value(geom, "weightedRn", g, k)
    Wl = flowlab.monitor_value(geom, f"W{l}")

    def xi(r):
        return binom_ext(n - 1, l) * w * r ** (n - 1 - l)

    r = invert_monotone(xi, Wl, _grow_bracket(xi, Wl, geom.space))
    rhs = math.comb(n - 1, k) * w * float(g.g(r * r / 2.0)) * r ** (n - k - 1)
    notes: list[str] = []
    _constant_note(g, notes)
    return InequalityReport(
        "afw",
        {"K": 0, "n": n, "k": k, "l": l, "weight": g.spec, "W_l": Wl, "radius": r},
        lhs,
        rhs,
        default_tol(geom) if tol is None else tol,
        shape_digest(geom),
        notes,
    )


def verify_minkowski2d(geom: CurveGeometry, g: Weight, tol: float | None = None) -> InequalityReport:
    """``int g(Phi) kappa ds + A_g(Omega) >= minkowski2d_rhs(L)`` for strictly convex curves."""
    if not isinstance(geom, CurveGeometry):
        raise ConfigError("minkowski2d needs a curve")
    curve2d.require_convex(geom)
    lhs = flowlab.monitor_value(geom, "weighted2d", g)
    rhs = curve2d.minkowski2d_rhs(geom.space, g, geom.L)
    notes: list[str] = [g.note] if g.note else []
    if g.is_constant:
        notes.append("constant weight: both sides equal 2 pi g by Gauss-Bonnet")
    return InequalityReport(
        "minkowski2d",
        {"K": geom.space.K, "n": 2, "weight": g.spec, "L": geom.L},
        lhs,
        float(rhs),
        default_tol(geom) if tol is None else tol,
        shape_digest(geom),
        notes,
    )


def _weighted_H_rhs(space: SpaceForm, n: int, g: Weight, r: float) -> float:
    return sphere_weighted_H(space, n, g, r) + (n - 1) * ball_Ag(space, n, g, r)


def verify_minkowskiH(geom: AxisymGeometry, g: Weight, tol: float | None = None) -> InequalityReport:
    """``int g(Phi) H dmu + (n-1) A_g(Omega) >= chi(xi^{-1}(|Sigma|))`` for h-convex shapes in H^n."""
    if geom.space.K != -1 or not isinstance(geom, AxisymGeometry):
        raise ConfigError("minkowskiH needs a hypersurface in H^n, n >= 3")
    cc = axisym.convexity_class(geom)
    if not cc.h_convex:
        raise ConvexityError(f"shape is not h-convex (min kappa - 1 = {cc.h_margin:.3e})")
    n = geom.n
    space = geom.space
    w = unit_sphere_area(n - 1)
    lhs = flowlab.monitor_value(geom, "weightedH", g)

    def xi(r):
        return w * float(space.phi(r)) ** (n - 1)

    r = invert_monotone(xi, geom.area, _grow_bracket(xi, geom.area, space))
    notes: list[str] = []
    _constant_note(g, notes)
    return InequalityReport(
        "minkowskiH",
        {"K": -1, "n": n, "weight": g.spec, "area": geom.area, "radius": r},
        lhs,
        _weighted_H_rhs(space, n, g, r),
        default_tol(geom) if tol is None else tol,
        shape_digest(geom),
        notes,
    )


def verify_minkowskiS(geom: AxisymGeometry, g: Weight, tol: float | None = None) -> InequalityReport:
    """Same functional as :func:`verify_minkowskiH` in S^n, compared through ``zeta(r) = w sin^n r / n``."""
    if geom.space.K != 1 or not isinstance(geom, AxisymGeometry):
        raise ConfigError("minkowskiS needs a hypersurface in S^n, n >= 3")
    cc = axisym.convexity_class(geom)
    if not cc.strictly_convex:
        raise ConvexityError(f"shape is not strictly convex (min kappa = {cc.strict_margin:.3e})")
    geom.space.check_radius(geom.rho, convex=True)
    n = geom.n
    w = unit_sphere_area(n - 1)
    lhs = flowlab.monitor_value(geom, "weightedH", g)
    vol = flowlab.monitor_value(geom, "sphPhiVol")

    def zeta(r):
        return w * math.sin(r) ** n / n

    r = invert_monotone(zeta, vol, (0.0, 0.5 * math.pi))
    notes: list[str] = []
    _constant_note(g, notes)
    return InequalityReport(
        "minkowskiS",
        {"K": 1, "n": n, "weight": g.spec, "phi_prime_volume": vol, "radius": r},
        lhs,
        _weighted_H_rhs(geom.space, n, g, r),
        default_tol(geom) if tol is None else tol,
        shape_digest(geom),
        notes,
    )


def _H(geom: Geometry, j: int) -> np.ndarray:
    """Normalized mean curvature field with ``H_{-1} := u``."""
    if j == -1:
        return geom.u
    return flowlab.sigma_field(geom, j) / math.comb(geom.n - 1, j)


def three_term_parts(geom: Geometry, k: int) -> tuple[float, float, float]:
    """``(int H_k r^2/2, k/(n-k+1) int H_{k-2}, rhs)`` of the three-term inequality in R^n."""
    n = geom.n
    first = geom.integrate(_H(geom, k) * geom.Phi)
    second = k / (n - k + 1) * geom.integrate(_H(geom, k - 2))
    total = geom.integrate(_H(geom, k - 1))
    w = unit_sphere_area(n - 1)
    rhs = (n + 1 + k) / (2 * (n + 1 - k)) * w ** (-1.0 / (n - k)) * total ** ((n + 1 - k) / (n - k))
    return first, second, rhs


def verify_3term(geom: Geometry, k: int, tol: float | None = None) -> InequalityReport:
    """``int H_k r^2/2 + k/(n-k+1) int H_{k-2} >= c_{n,k} (int H_{k-1})^((n+1-k)/(n-k))`` in R^n.

    ``H_{-1}`` is taken to be the support function ``u``.
    """
    if geom.space.K != 0:
        raise ConfigError("the three-term inequality is stated in Euclidean space")
    n = geom.n
    if not 1 <= k <= n - 1:
        raise ConfigError(f"need 1 <= k <= {n - 1}")
    _require_k_convex(geom, k)
    first, second, rhs = three_term_parts(geom, k)
    notes = ["H_{-1} taken as the support function u"] if k == 1 else []
    return InequalityReport(
        "3term",
        {"K": 0, "n": n, "k": k},
        first + second,
        rhs,
        default_tol(geom) if tol is None else tol,
        shape_digest(geom),
        notes,
    )


# --------------------------------------------------------------------------
# the sixteen worked weights in two dimensions


# Closed forms take ``(L, m)`` where ``m`` is a math namespace: numpy for
# array evaluation, mpmath for the extended-precision cross-check (several of
# the forms cancel to a tiny value at small L).


def _s(L, m, K):
    return m.sqrt(4 * m.pi**2 - K * L * L)


EXAMPLE_ITEMS: dict[int, list[tuple[str, tuple, Callable]]] = {
    0: [
        ("monomial", (1.0,), lambda L, m: L**2 / (2 * m.pi)),
        ("monomial", (1.5, 2 * math.sqrt(2) / 3), lambda L, m: L**3 / (6 * m.pi**2)),
        ("monomial", (2.0,), lambda L, m: L**4 / (16 * m.pi**3)),
        ("exp", (), lambda L, m: 2 * m.pi * (2 * m.exp(L**2 / (8 * m.pi**2)) - 1)),
        ("exp-square", (), lambda L, m: 2 * m.pi * (2 * m.exp(L**4 / (64 * m.pi**4)) - 1)),
        ("sinh", (), lambda L, m: 4 * m.pi * m.sinh(L**2 / (8 * m.pi**2))),
        ("cosh", (), lambda L, m: 4 * m.pi * m.cosh(L**2 / (8 * m.pi**2)) - 2 * m.pi),
    ],
    1: [
        ("monomial", (1.0,), lambda L, m: L**2 / (2 * m.pi)),
        (
            "monomial",
            (2.0,),
            lambda L, m: 4 / m.mpf(3) * (_s(L, m, 1) - 2 * m.pi)
            - L**2 / (3 * m.pi**2) * (_s(L, m, 1) - 3 * m.pi),
        ),
        (
            "monomial",
            (3.0,),
            lambda L, m: -3 * L**4 / (16 * m.pi**3)
            - L**2 / m.pi**2 * (_s(L, m, 1) - 3 * m.pi)
            + 4 * _s(L, m, 1)
            - 8 * m.pi,
        ),
        ("rational-minus", (1,), lambda L, m: 4 * m.pi * m.log(2 * m.pi / _s(L, m, 1))),
        (
            "rational-minus",
            (2,),
            lambda L, m: 4 * m.pi * m.log(2 * m.pi / _s(L, m, 1)) - L**2 / (2 * m.pi),
        ),
    ],
    -1: [
        ("monomial", (1.0,), lambda L, m: L**2 / (2 * m.pi)),
        (
            "monomial",
            (2.0,),
            lambda L, m: L**2 / (3 * m.pi**2) * (_s(L, m, -1) - 3 * m.pi)
            + 4 / m.mpf(3) * (_s(L, m, -1) - 2 * m.pi),
        ),
        (
            "monomial",
            (3.0,),
            lambda L, m: 3 * L**4 / (16 * m.pi**3)
            - L**2 / m.pi**2 * (_s(L, m, -1) - 3 * m.pi)
            - 4 * _s(L, m, -1)
            + 8 * m.pi,
        ),
        (
            "rational-plus",
            (2,),
            lambda L, m: L**2 / (2 * m.pi) - 2 * m.pi * m.log(L**2 / (4 * m.pi**2) + 1),
        ),
    ],
}


class _NumpyMath:
    """numpy under the names the closed forms use."""

    pi = np.pi
    sqrt = staticmethod(np.sqrt)
    exp = staticmethod(np.exp)
    log = staticmethod(np.log)
    sinh = staticmethod(np.sinh)
    cosh = staticmethod(np.cosh)
    mpf = staticmethod(float)


def closed_form(K: int, item: int, L):
    """Printed right-hand side of worked item ``item`` (1-based) in float64."""
    f = EXAMPLE_ITEMS[K][item - 1][2]
    return f(np.asarray(L, dtype=float), _NumpyMath)


def closed_form_precise(K: int, item: int, L: float, digits: int = 40) -> float:
    """Same closed form evaluated with ``digits`` significant digits."""
    f = EXAMPLE_ITEMS[K][item - 1][2]
    with mpmath.workdps(digits):
        return float(f(mpmath.mpf(float(L)), mpmath))


def example_weights(K: int) -> list[Weight]:
    """The worked weights for curvature ``K``, in item order."""
    if K not in EXAMPLE_ITEMS:
        raise ConfigError(f"no worked examples for K={K}")
    return [make_weight(p, list(a)) for p, a, _ in EXAMPLE_ITEMS[K]]


def sample_lengths(K: int, count: int = 20) -> np.ndarray:
    if K == 1:
        return np.linspace(0.05, 0.95, count) * 2 * math.pi
    return np.linspace(0.3, 12.0, count)


def closed_form_error(space: SpaceForm, item: int, lengths=None) -> float:
    """Largest ``|general rhs - closed form| / scale`` over the sampled lengths.

    The closed form is evaluated in extended precision so that its own
    cancellation does not pollute the comparison.
    """
    K = space.K
    g = example_weights(K)[item - 1]
    L = sample_lengths(K) if lengths is None else np.asarray(lengths, dtype=float)
    general = curve2d.minkowski2d_rhs(space, g, L)
    printed = np.array([closed_form_precise(K, item, x) for x in L])
    scale = np.maximum(np.maximum(np.abs(general), np.abs(printed)), 1e-300)
    return float(np.max(np.abs(general - printed) / scale))


def worked_examples_suite(geom: CurveGeometry, tol: float | None = None) -> list[InequalityReport]:
    """Minkowski reports for every worked weight of the curve's space form.

    Each report also records the worst disagreement between the general
    right-hand side and the item's closed form over sampled lengths, and the
    closed form evaluated at this curve's length.
    """
    if not isinstance(geom, CurveGeometry):
        raise ConfigError("the worked examples are curve inequalities")
    K = geom.space.K
    out = []
    for i, g in enumerate(example_weights(K), start=1):
        rep = verify_minkowski2d(geom, g, tol)
        rep.theorem = "worked-examples"
        rep.params["item"] = i
        rep.params["closed_form_rhs"] = closed_form_precise(K, i, geom.L)
        rep.params["closed_form_max_rel_error"] = closed_form_error(geom.space, i)
        out.append(rep)
    return out

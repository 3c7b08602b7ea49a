"""Space forms M^n(K), their warp functions, and the convex weight catalog.

A space form is the warped product ``dr^2 + phi(r)^2 g_sphere`` with
``phi = r, sinh r, sin r`` for K = 0, -1, +1.  The potential
``Phi(r) = int_0^r phi`` generates the conformal Killing field
``V = phi(r) d/dr``; every geometric module works with ``phi``, ``phi'`` and
``Phi`` evaluated at the radial coordinate of a hypersurface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .errors import DomainError

# Gauss-Legendre nodes on [0, 1] for vectorised radial integrals.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS

QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class SpaceForm:
    """Simply connected space form of constant curvature ``K``."""

    K: int

    def __post_init__(self):
        if self.K not in (-1, 0, 1):
            raise DomainError(f"curvature sign must be -1, 0 or 1, got {self.K!r}")

    @property
    def r_max(self) -> float:
        return math.pi if self.K == 1 else math.inf

    @property
    def name(self) -> str:
        return {0: "euclidean", -1: "hyperbolic", 1: "sphere"}[self.K]

    def phi(self, r):
        if self.K == 0:
            return np.asarray(r, dtype=float) * 1.0
        if self.K == -1:
            return np.sinh(r)
        return np.sin(r)

    def dphi(self, r):
        if self.K == 0:
            return np.ones_like(np.asarray(r, dtype=float))
        if self.K == -1:
            return np.cosh(r)
        return np.cos(r)

    def ddphi(self, r):
        return -self.K * self.phi(r)

    def Phi(self, r):
        if self.K == 0:
            return 0.5 * np.asarray(r, dtype=float) ** 2
        if self.K == -1:
            # cosh r - 1 without cancellation for small r
            return 2.0 * np.sinh(0.5 * np.asarray(r, dtype=float)) ** 2
        return 2.0 * np.sin(0.5 * np.asarray(r, dtype=float)) ** 2

    def phi_inv(self, x):
        """Radius of the geodesic circle whose warp value is ``x``.

        For K = 1 the branch in [0, pi/2] is returned.
        """
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise DomainError("phi_inv requires x >= 0")
        if self.K == 0:
            return x * 1.0
        if self.K == -1:
            return np.arcsinh(x)
        if np.any(x > 1.0):
            raise DomainError("phi_inv on the sphere requires x <= 1")
        return np.arcsin(x)

    def check_radius(self, r, *, convex: bool = False) -> None:
        """Raise unless every ``r`` lies in ``[0, r_max)`` (``[0, pi/2)`` when ``convex`` and K = 1)."""
        r = np.asarray(r, dtype=float)
        bound = 0.5 * math.pi if (convex and self.K == 1) else self.r_max
        if not np.all(np.isfinite(r)) or np.any(r < 0) or np.any(r >= bound):
            raise DomainError(f"radius outside [0, {bound}) for K={self.K}")


def make_space_form(K: int) -> SpaceForm:
    return SpaceForm(K)


def unit_sphere_area(m: int) -> float:
    """Area of the unit m-sphere in R^(m+1)."""
    if int(m) != m or m < 1:
        raise DomainError(f"unit_sphere_area needs an integer m >= 1, got {m!r}")
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def binom_ext(m: int, k: int) -> float:
    """Binomial coefficient extended by ``C(m, -1) = 1/(m + 1)``.

    With this value ``C(n-1, -1) * omega_{n-1} * r^n`` is the volume of the
    Euclidean ball, so the quermassintegral ``W_{-1} = |Omega|`` fits the
    same ``C(n-1, l) omega_{n-1} r^(n-1-l)`` pattern as the other indices.
    """
    if k == -1:
        return 1.0 / (m + 1)
    if k < -1 or k > m:
        return 0.0
    return float(math.comb(m, k))


# --------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class Weight:
    """Convex non-decreasing weight ``g`` with derivatives and antiderivative.

    Instances are produced by :func:`make_weight`; ``interval`` is the range of
    ``Phi`` values on which the weight was validated.
    """

    preset: str
    params: tuple[float, ...]
    interval: tuple[float, float]
    _g: Callable = field(repr=False, compare=False)
    _dg: Callable = field(repr=False, compare=False)
    _d2g: Callable = field(repr=False, compare=False)
    _G: Callable = field(repr=False, compare=False)
    note: str = ""

    def g(self, x):
        return self._g(np.asarray(x, dtype=float))

    def dg(self, x):
        return self._dg(np.asarray(x, dtype=float))

    def d2g(self, x):
        return self._d2g(np.asarray(x, dtype=float))

    def G(self, x):
        return self._G(np.asarray(x, dtype=float))

    @property
    def spec(self) -> str:
        if not self.params:
            return self.preset
        return self.preset + ":" + ":".join(_fmt(p) for p in self.params)

    @property
    def is_constant(self) -> bool:
        return self.preset == "constant" or (
            self.preset == "poly" and all(c == 0 for c in self.params[1:])
        )

    def check_domain(self, x) -> None:
        x = np.asarray(x, dtype=float)
        lo, hi = self.interval
        if np.any(x < lo - 1e-14) or np.any(x > hi):
            raise DomainError(
                f"Phi values [{x.min():.6g}, {x.max():.6g}] leave the validity "
                f"interval [{lo}, {hi}] of weight {self.spec}"
            )


def _fmt(p: float) -> str:
    return str(int(p)) if float(p).is_integer() else repr(float(p))


def _monomial(p: float, c: float = 1.0):
    if p < 1:
        raise DomainError("monomial weights need p >= 1")

    def g(x):
        return c * x**p

    def dg(x):
        return c * p * x ** (p - 1)

    def d2g(x):
        if p == 1:
            return np.zeros_like(x)
        with np.errstate(divide="ignore"):
            return c * p * (p - 1) * x ** (p - 2)

    def G(x):
        return c * x ** (p + 1) / (p + 1)

    return g, dg, d2g, G


def _poly(coeffs: Sequence[float]):
    if not coeffs:
        raise DomainError("poly weight needs at least one coefficient")
    if any(c < 0 for c in coeffs):
        raise DomainError("poly weight needs nonnegative coefficients")
    P = np.polynomial.Polynomial(list(coeffs))
    dP, d2P, IP = P.deriv(1), P.deriv(2), P.integ(1, lbnd=0.0)
    return P, dP, d2P, IP


def _rational(p: int, sign: int):
    """``x^p / (1 - x)`` for sign=-1 and ``x^p / (1 + x)`` for sign=+1."""
    if int(p) != p or p < 1:
        raise DomainError("rational weights need an integer power p >= 1")
    p = int(p)
    s = float(sign)

    def g(x):
        return x**p / (1 + s * x)

    def dg(x):
        return p * x ** (p - 1) / (1 + s * x) - s * x**p / (1 + s * x) ** 2

    def d2g(x):
        lead = p * (p - 1) * x ** (p - 2) / (1 + s * x) if p >= 2 else 0.0 * x
        return lead - 2 * s * p * x ** (p - 1) / (1 + s * x) ** 2 + 2 * x**p / (1 + s * x) ** 3

    def G(x):
        # polynomial division of x^p by (1 + s x), then the log remainder
        if sign < 0:
            poly = -sum(x**j / j for j in range(1, p + 1))
            return poly - np.log1p(-x)
        poly = sum((-1.0) ** (p - 1 - j) * x ** (j + 1) / (j + 1) for j in range(p))
        return poly + (-1.0) ** p * np.log1p(x)

    return g, dg, d2g, G


def _closed_form(preset: str, params: Sequence[float]):
    if preset == "constant":
        c = params[0] if params else 1.0
        return (
            lambda x: c + 0.0 * x,
            lambda x: 0.0 * x,
            lambda x: 0.0 * x,
            lambda x: c * x,
        )
    if preset == "monomial":
        if not params:
            raise DomainError("monomial needs a power, e.g. monomial:2")
        return _monomial(*params[:2])
    if preset == "poly":
        return _poly(params)
    if preset == "exp":
        return np.exp, np.exp, np.exp, lambda x: np.expm1(x)
    if preset == "exp-square":
        return (
            lambda x: np.exp(x**2),
            lambda x: 2 * x * np.exp(x**2),
            lambda x: (2 + 4 * x**2) * np.exp(x**2),
            lambda x: 0.5 * math.sqrt(math.pi) * special.erfi(x),
        )
    if preset == "sinh":
        return np.sinh, np.cosh, np.sinh, lambda x: np.cosh(x) - 1.0
    if preset == "cosh":
        return np.cosh, np.sinh, np.cosh, np.sinh
    if preset == "cosh-minus-1":
        return lambda x: np.cosh(x) - 1.0, np.sinh, np.cosh, lambda x: np.sinh(x) - x
    if preset == "rational-minus":
        return _rational(params[0] if params else 1, -1)
    if preset == "rational-plus":
        return _rational(params[0] if params else 1, +1)
    raise DomainError(f"unknown weight preset {preset!r}")


PRESETS = (
    "constant",
    "monomial",
    "poly",
    "exp",
    "exp-square",
    "sinh",
    "cosh",
    "cosh-minus-1",
    "rational-minus",
    "rational-plus",
)

_DEFAULT_HI = {"rational-minus": 0.999}
_SAMPLE_CAP = 8.0
_SIGN_TOL = 1e-12


def make_weight(
    preset: str,
    params: Sequence[float] = (),
    interval: tuple[float, float] | None = None,
) -> Weight:
    """Build a catalog weight and validate it on ``interval``.

    Raises :class:`DomainError` if ``g > 0``, ``g' >= 0`` or ``g'' >= 0`` fails
    at any of 1000 sample points.  A weight vanishing only at ``x = 0``
    (monomials, sinh, ...) is accepted with a note.
    """
    params = tuple(float(p) for p in params)
    funcs = _closed_form(preset, params)
    lo, hi = interval if interval is not None else (0.0, _DEFAULT_HI.get(preset, math.inf))
    if lo < 0 or hi <= lo:
        raise DomainError(f"bad validity interval ({lo}, {hi})")
    w = Weight(preset, params, (float(lo), float(hi)), *funcs)
    note = validate_weight(w)
    return Weight(preset, params, (float(lo), float(hi)), *funcs, note=note)


def validate_weight(w: Weight, samples: int = 1000) -> str:
    lo, hi = w.interval
    top = hi if math.isfinite(hi) else max(lo + _SAMPLE_CAP, _SAMPLE_CAP)
    x = np.linspace(lo, top, samples)
    with np.errstate(all="ignore"):
        g, dg, d2g = w.g(x), w.dg(x), w.d2g(x)
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(dg))):
        raise DomainError(f"weight {w.spec} is not finite on [{lo}, {hi}]")
    d2g = np.where(np.isnan(d2g), -1.0, d2g)
    scale = 1.0 + np.abs(g)
    if np.any(dg < -_SIGN_TOL * scale):
        raise DomainError(f"weight {w.spec} is decreasing on [{lo}, {hi}]")
    if np.any(d2g < -_SIGN_TOL * scale):
        raise DomainError(f"weight {w.spec} is not convex on [{lo}, {hi}]")
    if np.any(g[1:] <= 0) or g[0] < 0:
        raise DomainError(f"weight {w.spec} is not positive on ({lo}, {hi}]")
    if g[0] == 0:
        return "g vanishes at the left end of its interval; accepted"
    return ""


def parse_weight(text: str, interval: tuple[float, float] | None = None) -> Weight:
    """Parse ``preset[:p1[:p2...]]``; ``poly`` also takes comma lists (``poly:1,0,2``)."""
    parts = text.strip().split(":")
    preset, raw = parts[0], parts[1:]
    values: list[float] = []
    for item in raw:
        values.extend(float(v) for v in item.split(",") if v != "")
    return make_weight(preset, values, interval)


# --------------------------------------------------------------------------
# radial integrals and geodesic balls


def radial_integral(f: Callable, rho, method: str = "gauss"):
    """``int_0^rho f(s) ds`` for each entry of ``rho``.

    ``gauss`` uses 48-point Gauss-Legendre (vectorised); ``quad`` runs
    adaptive Gauss-Kronrod per entry at relative tolerance 1e-10.
    """
    rho = np.asarray(rho, dtype=float)
    if method == "gauss":
        s = rho[..., None] * _GL_NODES
        return rho * np.sum(f(s) * _GL_WEIGHTS, axis=-1)
    if method == "quad":
        flat = [
            integrate.quad(f, 0.0, float(r), epsabs=0.0, epsrel=QUAD_RTOL, limit=200)[0]
            for r in rho.ravel()
        ]
        return np.asarray(flat).reshape(rho.shape)
    raise ValueError(f"unknown integration method {method!r}")


def ag_density(space: SpaceForm, g: Weight):
    """Integrand ``g'(Phi) phi' + K g(Phi)`` of the weighted volume, as a function of r."""

    def dens(s):
        Ph = space.Phi(s)
        return g.dg(Ph) * space.dphi(s) + space.K * g.g(Ph)

    return dens


def ball_volume(space: SpaceForm, n: int, r: float) -> float:
    """Volume of the geodesic ball B(r) in M^n(K) by adaptive quadrature."""
    space.check_radius(r)
    w = unit_sphere_area(n - 1)
    val = integrate.quad(lambda s: space.phi(s) ** (n - 1), 0.0, r, epsabs=0.0, epsrel=QUAD_RTOL)[0]
    return w * val


def ball_Ag(space: SpaceForm, n: int, g: Weight, r: float) -> float:
    """Weighted volume ``A_g(B(r))`` of a geodesic ball."""
    if n < 2:
        raise DomainError("dimension n must be >= 2")
    space.check_radius(r)
    g.check_domain(space.Phi(r))
    if r == 0:
        return 0.0
    dens = ag_density(space, g)
    val = integrate.quad(
        lambda s: float(dens(s)) * float(space.phi(s)) ** (n - 1),
        0.0,
        float(r),
        epsabs=0.0,
        epsrel=QUAD_RTOL,
        limit=200,
    )[0]
    return unit_sphere_area(n - 1) * val


def sphere_weighted_H(space: SpaceForm, n: int, g: Weight, r: float) -> float:
    """``int_{S(r)} g(Phi) H`` for the geodesic sphere, where ``H = (n-1) phi'/phi``."""
    if n < 2:
        raise DomainError("dimension n must be >= 2")
    if not (0 < r < space.r_max):
        raise DomainError(f"radius {r} outside (0, {space.r_max})")
    Ph = space.Phi(r)
    g.check_domain(Ph)
    return float(
        unit_sphere_area(n - 1) * (n - 1) * g.g(Ph) * space.dphi(r) * space.phi(r) ** (n - 2)
    )

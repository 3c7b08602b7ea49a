"""Hypersurfaces of revolution in M^n(K), n >= 3, as radial graphs over the polar angle.

The profile ``r = rho(theta)``, ``theta in [0, pi]``, is sampled at
``theta_j = j pi / M``.  Derivatives use 4th-order central differences with
ghost values from even reflection across the poles; integrals over theta use
composite Simpson (``M`` must be even).

The meridian curvature ``kappa1`` has multiplicity one and the parallel
curvature ``kappa2`` multiplicity ``n - 2``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.special import eval_legendre

from .errors import ConfigError, ConvexityError, DomainError, NumericalError
from .spaceform import SpaceForm, Weight, ag_density, radial_integral, unit_sphere_area
from .symfun import sigmas

DEFAULT_M = 800
POLE_TOL = 1e-6


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AxisymShape:
    space: SpaceForm
    n: int
    rho: np.ndarray
    check_poles: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        rho = _frozen(self.rho)
        object.__setattr__(self, "rho", rho)
        if self.n < 3:
            raise DomainError("axisymmetric shapes need n >= 3; use curve2d for n = 2")
        M = rho.size - 1
        if rho.ndim != 1 or M < 8 or M % 2:
            raise DomainError("profile needs M + 1 samples with M even and M >= 8")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise DomainError("profile samples must be finite and positive")
        if self.space.K == 1 and np.any(rho >= 0.5 * math.pi):
            raise DomainError("hypersurfaces in S^n must lie in the open hemisphere rho < pi/2")
        if not self.check_poles:
            return
        h = math.pi / M
        # 6th-order one-sided derivative; error O(h^7) for even profiles
        stencil = np.array([-49 / 20, 6.0, -15 / 2, 20 / 3, -15 / 4, 6 / 5, -1 / 6]) / h
        slope = max(abs(stencil @ rho[:7]), abs(stencil @ rho[::-1][:7]))
        if slope > POLE_TOL * rho.max():
            raise DomainError(
                f"profile is not regular at the poles (one-sided rho' = {slope:.2e})"
            )

    @property
    def M(self) -> int:
        return self.rho.size - 1

    @property
    def theta(self) -> np.ndarray:
        return theta_grid(self.M)

    def with_rho(self, rho, check_poles: bool = True) -> "AxisymShape":
        return AxisymShape(self.space, self.n, rho, check_poles)


@dataclass(frozen=True)
class AxisymGeometry:
    shape: AxisymShape
    theta: np.ndarray
    drho: np.ndarray
    d2rho: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    W: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    u: np.ndarray
    Phi: np.ndarray
    dmu: np.ndarray
    grad_phi_sq: np.ndarray
    area: float

    @functools.cached_property
    def volume(self) -> float:
        """Enclosed volume; computed on first use since flows rarely need it."""
        n, M = self.n, self.shape.M
        sp = self.space
        sin_pow = np.abs(np.sin(self.theta)) ** (n - 2)
        omega = unit_sphere_area(n - 2)
        inner = radial_integral(lambda r: sp.phi(r) ** (n - 1), self.rho)
        return float(omega * np.sum(inner * sin_pow * simpson_weights(M, math.pi / M)))

    @property
    def space(self) -> SpaceForm:
        return self.shape.space

    @property
    def n(self) -> int:
        return self.shape.n

    @property
    def rho(self) -> np.ndarray:
        return self.shape.rho

    @property
    def kappa(self) -> np.ndarray:
        """Full principal-curvature tuples, shape ``(M + 1, n - 1)``."""
        k2 = np.repeat(self.kappa2[:, None], self.n - 2, axis=1)
        return np.concatenate([self.kappa1[:, None], k2], axis=1)

    def sigma(self, k: int) -> np.ndarray:
        return sigma_axisym(k, self.kappa1, self.kappa2, self.n)

    def H(self) -> np.ndarray:
        return self.sigma(1)

    def integrate(self, f) -> float:
        return float(np.sum(np.asarray(f) * self.dmu))


def simpson_weights(M: int, h: float) -> np.ndarray:
    w = np.ones(M + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def pole_derivatives(rho: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """4th-order first and second derivatives with even reflection at both poles."""
    ext = np.concatenate([rho[2:0:-1], rho, rho[-2:-4:-1]])
    d1 = (ext[:-4] - 8 * ext[1:-3] + 8 * ext[3:-1] - ext[4:]) / (12 * h)
    d2 = (-ext[:-4] + 16 * ext[1:-3] - 30 * ext[2:-2] + 16 * ext[3:-1] - ext[4:]) / (12 * h * h)
    return d1, d2


def sigma_axisym(k: int, kappa1, kappa2, n: int):
    """``sigma_k`` of the tuple ``(kappa1, kappa2, ..., kappa2)`` with ``n - 2`` copies of ``kappa2``."""
    m2 = n - 2
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k == 0:
        return np.ones_like(kappa1)
    if k > n - 1:
        return np.zeros_like(kappa1)
    a = math.comb(m2, k) * kappa2**k if k <= m2 else 0.0 * kappa1
    b = math.comb(m2, k - 1) * kappa1 * kappa2 ** (k - 1)
    return a + b


def sigma_minus_first(k: int, kappa2, n: int):
    """``sigma_k`` of the tuple with the meridian curvature removed (``T_{k}`` entry along the meridian)."""
    m2 = n - 2
    if k == 0:
        return np.ones_like(kappa2)
    if k > m2:
        return np.zeros_like(kappa2)
    return math.comb(m2, k) * kappa2**k


def axisym_geometry(s: AxisymShape) -> AxisymGeometry:
    sp = s.space
    n = s.n
    M = s.M
    h = math.pi / M
    th = s.theta
    rho = s.rho
    r1, r2 = pole_derivatives(rho, h)
    r1[0] = r1[-1] = 0.0
    ph, dph = sp.phi(rho), sp.dphi(rho)
    W = np.sqrt(ph * ph + r1 * r1)
    k1 = (ph * ph * dph + 2.0 * dph * r1 * r1 - ph * r2) / W**3
    sin_t, cos_t = np.sin(th), np.cos(th)
    k2 = np.empty_like(k1)
    inner = slice(1, M)
    k2[inner] = (ph[inner] * dph[inner] * sin_t[inner] - r1[inner] * cos_t[inner]) / (
        W[inner] * ph[inner] * sin_t[inner]
    )
    k2[0], k2[-1] = k1[0], k1[-1]
    if not (np.all(np.isfinite(k1)) and np.all(np.isfinite(k2))):
        raise NumericalError("non-finite principal curvatures")
    u = ph * ph / W
    Phi = sp.Phi(rho)
    omega = unit_sphere_area(n - 2) if n > 2 else 2.0
    sw = simpson_weights(M, h)
    sin_pow = np.abs(sin_t) ** (n - 2)
    dmu = omega * W * ph ** (n - 2) * sin_pow * sw
    return AxisymGeometry(
        shape=s,
        theta=th,
        drho=r1,
        d2rho=r2,
        phi=ph,
        dphi=dph,
        W=W,
        kappa1=k1,
        kappa2=k2,
        u=u,
        Phi=Phi,
        dmu=dmu,
        grad_phi_sq=(ph * r1 / W) ** 2,
        area=float(np.sum(dmu)),
    )


def theta_integral(shape: AxisymShape, f_theta) -> float:
    """``omega_{n-2} int_0^pi f(theta) sin^{n-2} theta d theta`` by Simpson."""
    M = shape.M
    h = math.pi / M
    th = shape.theta
    omega = unit_sphere_area(shape.n - 2)
    return float(omega * np.sum(np.asarray(f_theta) * np.abs(np.sin(th)) ** (shape.n - 2) * simpson_weights(M, h)))


# --------------------------------------------------------------------------
# functionals


def quermassintegral(geom: AxisymGeometry, l: int) -> float:
    """``W_{-1} = |Omega|``, ``W_0 = |Sigma|``, ``W_l = int sigma_l dmu``."""
    n = geom.n
    if not -1 <= l <= n - 1:
        raise DomainError(f"quermassintegral index must be in [-1, {n - 1}]")
    if l == -1:
        return geom.volume
    if l == 0:
        return geom.area
    return geom.integrate(geom.sigma(l))


def weighted_sigma_integral(geom: AxisymGeometry, g: Weight, k: int) -> float:
    """``int g(Phi) sigma_k dmu``."""
    if not 1 <= k <= geom.n - 1:
        raise DomainError(f"k must be in [1, {geom.n - 1}]")
    g.check_domain(geom.Phi)
    return geom.integrate(g.g(geom.Phi) * geom.sigma(k))


def Ag_volume(s: AxisymShape | AxisymGeometry, g: Weight, method: str = "gauss") -> float:
    """Weighted volume ``int_Omega (g'(Phi) phi' + K g(Phi)) dv``."""
    shape = s.shape if isinstance(s, AxisymGeometry) else s
    sp, n = shape.space, shape.n
    g.check_domain(sp.Phi(shape.rho))
    dens = ag_density(sp, g)
    inner = radial_integral(lambda r: dens(r) * sp.phi(r) ** (n - 1), shape.rho, method)
    return theta_integral(shape, inner)


def phi_prime_volume(s: AxisymShape | AxisymGeometry) -> float:
    """``int_Omega phi' dv`` (exact radial primitive ``phi^n / n``)."""
    shape = s.shape if isinstance(s, AxisymGeometry) else s
    return theta_integral(shape, shape.space.phi(shape.rho) ** shape.n / shape.n)


@dataclass(frozen=True)
class ConvexityClass:
    k_margins: tuple[float, ...]
    strict_margin: float
    h_margin: float

    def k_convex(self, k: int) -> bool:
        return self.k_margins[k - 1] > 0

    @property
    def strictly_convex(self) -> bool:
        return self.strict_margin > 0

    @property
    def h_convex(self) -> bool:
        return self.h_margin >= 0

    def as_dict(self) -> dict:
        return {
            "k_convex": {k + 1: m > 0 for k, m in enumerate(self.k_margins)},
            "k_margins": list(self.k_margins),
            "strictly_convex": self.strictly_convex,
            "strict_margin": self.strict_margin,
            "h_convex": self.h_convex,
            "h_margin": self.h_margin,
        }


def convexity_class(geom) -> ConvexityClass:
    """Cone memberships with margins (minimum over samples)."""
    kappa = geom.kappa if geom.n > 2 else np.asarray(geom.kappa)[:, None]
    m = kappa.shape[-1]
    e = sigmas(kappa, m)
    k_margins = tuple(float(np.min(e[1 : j + 1])) for j in range(1, m + 1))
    kmin = float(np.min(kappa))
    return ConvexityClass(k_margins, kmin, kmin - 1.0)


def require_k_convex(geom, k: int) -> None:
    cc = convexity_class(geom)
    if not cc.k_convex(k):
        raise ConvexityError(f"shape is not {k}-convex (margin {cc.k_margins[k - 1]:.3e})")


# --------------------------------------------------------------------------
# construction


@functools.lru_cache(maxsize=32)
def theta_grid(M: int) -> np.ndarray:
    return _frozen(np.linspace(0.0, math.pi, M + 1))


def sphere(space: SpaceForm, n: int, radius: float, M: int = DEFAULT_M) -> AxisymShape:
    return AxisymShape(space, n, np.full(M + 1, float(radius)))


def offset_sphere(radius: float, offset: float, n: int = 3, M: int = DEFAULT_M) -> AxisymShape:
    """Euclidean round sphere of ``radius`` whose centre sits ``offset`` up the axis."""
    if not 0 <= abs(offset) < radius:
        raise DomainError("offset sphere needs |offset| < radius so the origin is inside")
    th = theta_grid(M)
    rho = offset * np.cos(th) + np.sqrt(radius**2 - (offset * np.sin(th)) ** 2)
    return AxisymShape(SpaceForm(0), n, rho)


def legendre_profile(
    space: SpaceForm, n: int, a0: float, coeffs: Sequence[float] = (), M: int = DEFAULT_M
) -> AxisymShape:
    """``rho = a0 + sum_j coeffs[j-1] P_j(cos theta)``; smooth at both poles by construction."""
    th = theta_grid(M)
    x = np.cos(th)
    rho = np.full(M + 1, float(a0))
    for j, c in enumerate(coeffs, start=1):
        rho += c * eval_legendre(j, x)
    return AxisymShape(space, n, rho)


def ellipsoid(a: float, c: float, n: int = 3, M: int = DEFAULT_M) -> AxisymShape:
    """Euclidean ellipsoid of revolution, equatorial semi-axis ``a``, polar semi-axis ``c``."""
    th = theta_grid(M)
    rho = 1.0 / np.sqrt((np.sin(th) / a) ** 2 + (np.cos(th) / c) ** 2)
    return AxisymShape(SpaceForm(0), n, rho)


def resample(shape: AxisymShape, M_new: int) -> AxisymShape:
    """Re-sample the profile on a new grid by cubic interpolation in theta (pole-even)."""
    from scipy.interpolate import CubicSpline

    th = shape.theta
    ext_t = np.concatenate([-th[:0:-1], th, 2 * math.pi - th[-2::-1]])
    ext_r = np.concatenate([shape.rho[:0:-1], shape.rho, shape.rho[-2::-1]])
    spl = CubicSpline(ext_t, ext_r)
    return shape.with_rho(spl(theta_grid(M_new)))


def translate_axis(shape: AxisymShape, shift: float) -> AxisymShape:
    """Move a Euclidean profile by ``-shift`` along the symmetry axis and re-express it radially."""
    if shape.space.K != 0:
        raise DomainError("axis translation is only implemented in R^n")
    from scipy.interpolate import CubicSpline

    th = shape.theta
    x = shape.rho * np.sin(th)
    z = shape.rho * np.cos(th) - shift
    psi = np.arctan2(x, z)
    if np.any(np.diff(psi) <= 0):
        raise DomainError("profile is not star-shaped about the new centre")
    r = np.hypot(x, z)
    psi[0], psi[-1] = 0.0, math.pi
    ext_p = np.concatenate([-psi[:0:-1], psi, 2 * math.pi - psi[-2::-1]])
    ext_r = np.concatenate([r[:0:-1], r, r[-2::-1]])
    spl = CubicSpline(ext_p, ext_r)
    return shape.with_rho(spl(th))


def axial_center(geom: AxisymGeometry, weight=None) -> float:
    """Axial coordinate of the centre of mass of ``Sigma`` with density ``weight``."""
    w = geom.H() / (geom.n - 1) if weight is None else np.asarray(weight)
    z = geom.rho * np.cos(geom.theta)
    return geom.integrate(w * z) / geom.integrate(w)


def from_config(space: SpaceForm, n: int, cfg: Mapping[str, Any], M: int = DEFAULT_M) -> AxisymShape:
    kind = cfg.get("type")
    if kind == "profile_samples":
        return AxisymShape(space, n, cfg["rho"])
    if kind == "offset_sphere":
        if space.K != 0:
            raise ConfigError("offset_sphere is a Euclidean shape")
        return offset_sphere(cfg["radius"], cfg.get("offset", 0.0), n, M)
    if kind == "legendre":
        return legendre_profile(space, n, cfg["a0"], cfg.get("coeffs", ()), M)
    if kind == "sphere":
        return sphere(space, n, cfg["radius"], M)
    if kind == "ellipsoid":
        return ellipsoid(cfg["a"], cfg["c"], n, M)
    raise ConfigError(f"unknown shape type {kind!r}")


def to_config(shape: AxisymShape) -> dict:
    return {"type": "profile_samples", "rho": [float(x) for x in shape.rho]}

"""Closed convex curves in M^2(K) as radial graphs ``r = rho(theta)``.

Samples sit at uniform angles ``theta_j = 2 pi j / N``; derivatives are
spectral, and every integral is the periodic trapezoid rule, which is
spectrally accurate for smooth periodic integrands.
"""

from __future__ import annotations

import csv
import io
import functools
import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import ConfigError, ConvexityError, DomainError, NumericalError
from .spaceform import SpaceForm, Weight, ag_density, radial_integral

DEFAULT_N = 512
MAX_N = 8192


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ClosedCurve:
    space: SpaceForm
    rho: np.ndarray

    def __post_init__(self):
        rho = _frozen(self.rho)
        object.__setattr__(self, "rho", rho)
        if rho.ndim != 1 or rho.size < 8:
            raise DomainError("a curve needs at least 8 radial samples")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise DomainError("radial samples must be finite and positive (curve must enclose the origin)")
        if self.space.K == 1 and np.any(rho >= 0.5 * math.pi):
            raise DomainError("curves in S^2 must lie in the open hemisphere rho < pi/2")

    @property
    def N(self) -> int:
        return self.rho.size

    @property
    def theta(self) -> np.ndarray:
        return _theta_grid(self.N)

    def with_rho(self, rho) -> "ClosedCurve":
        return ClosedCurve(self.space, rho)


@dataclass(frozen=True)
class CurveGeometry:
    """Per-sample geometry of a :class:`ClosedCurve` plus totals ``L`` and ``A``."""

    curve: ClosedCurve
    theta: np.ndarray
    drho: np.ndarray
    d2rho: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    W: np.ndarray
    kappa: np.ndarray
    u: np.ndarray
    Phi: np.ndarray
    ds: np.ndarray
    grad_phi_sq: np.ndarray
    L: float
    A: float

    @property
    def space(self) -> SpaceForm:
        return self.curve.space

    @property
    def rho(self) -> np.ndarray:
        return self.curve.rho

    @property
    def n(self) -> int:
        return 2

    @property
    def convexity_margin(self) -> float:
        return float(np.min(self.kappa) * self.L)

    def integrate(self, f) -> float:
        return float(np.sum(np.asarray(f) * self.ds))

    def d_ds(self, f) -> np.ndarray:
        """Tangential derivative with respect to arclength."""
        return spectral_derivative(f, 1) / self.W


# --------------------------------------------------------------------------
# spectral calculus


@functools.lru_cache(maxsize=32)
def _theta_grid(N: int) -> np.ndarray:
    t = 2.0 * math.pi * np.arange(N) / N
    t.setflags(write=False)
    return t


def spectral_derivative(f, order: int = 1) -> np.ndarray:
    """Derivative of a 2 pi-periodic sample vector via the real FFT."""
    f = np.asarray(f, dtype=float)
    N = f.shape[-1]
    fh = np.fft.rfft(f, axis=-1)
    k = np.arange(fh.shape[-1], dtype=float)
    mult = (1j * k) ** order
    if N % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    return np.fft.irfft(fh * mult, n=N, axis=-1)


def spectral_derivatives_12(f) -> tuple[np.ndarray, np.ndarray]:
    """First and second derivatives from a single forward transform."""
    f = np.asarray(f, dtype=float)
    N = f.shape[-1]
    fh = np.fft.rfft(f, axis=-1)
    k = np.arange(fh.shape[-1], dtype=float)
    m1 = 1j * k
    if N % 2 == 0:
        m1[-1] = 0.0
    return np.fft.irfft(fh * m1, n=N, axis=-1), np.fft.irfft(fh * (-k * k), n=N, axis=-1)


def trig_interpolate(f, N_new: int) -> np.ndarray:
    """Resample a periodic sample vector onto ``N_new`` uniform points (band-limited)."""
    f = np.asarray(f, dtype=float)
    N = f.size
    fh = np.fft.rfft(f) / N
    out = np.zeros(N_new // 2 + 1, dtype=complex)
    kmax = min(fh.size, out.size)
    out[:kmax] = fh[:kmax]
    if N % 2 == 0 and N_new > N:
        out[N // 2] *= 0.5
    if N_new % 2 == 0 and N_new < N:
        out[-1] = out[-1].real
    return np.fft.irfft(out * N_new, n=N_new)


def trig_eval(f, theta) -> np.ndarray:
    """Evaluate the trigonometric interpolant of samples ``f`` at arbitrary angles."""
    f = np.asarray(f, dtype=float)
    N = f.size
    fh = np.fft.rfft(f) / N
    k = np.arange(fh.size)
    c = 2.0 * fh
    c[0] = fh[0]
    if N % 2 == 0:
        c[-1] = fh[-1]
    phase = np.exp(1j * np.outer(np.atleast_1d(theta), k))
    return np.real(phase @ c)


# --------------------------------------------------------------------------
# construction


def circle(space: SpaceForm, radius: float, N: int = DEFAULT_N) -> ClosedCurve:
    """Geodesic circle of the given radius centred at the origin."""
    return ClosedCurve(space, np.full(N, float(radius)))


def from_fourier(
    space: SpaceForm,
    a0: float,
    cos: Sequence[float] = (),
    sin: Sequence[float] = (),
    N: int = DEFAULT_N,
) -> ClosedCurve:
    """``rho = a0 + sum_j cos[j-1] cos(j theta) + sin[j-1] sin(j theta)``."""
    theta = 2.0 * math.pi * np.arange(N) / N
    rho = np.full(N, float(a0))
    for j, c in enumerate(cos, start=1):
        rho += c * np.cos(j * theta)
    for j, s in enumerate(sin, start=1):
        rho += s * np.sin(j * theta)
    return ClosedCurve(space, rho)


def ellipse(a: float, b: float, N: int = DEFAULT_N, center=(0.0, 0.0)) -> ClosedCurve:
    """Euclidean ellipse ``x^2/a^2 + y^2/b^2 = 1`` (optionally translated), in radial form about the origin."""
    cx, cy = center
    theta = 2.0 * math.pi * np.arange(N) / N
    c, s = np.cos(theta), np.sin(theta)
    # solve |rho (c, s) - center|_ellipse = 1 for rho > 0
    A = (c / a) ** 2 + (s / b) ** 2
    B = -2.0 * (c * cx / a**2 + s * cy / b**2)
    C = (cx / a) ** 2 + (cy / b) ** 2 - 1.0
    if C >= 0:
        raise DomainError("the origin must lie inside the ellipse")
    rho = (-B + np.sqrt(B * B - 4 * A * C)) / (2 * A)
    return ClosedCurve(SpaceForm(0), rho)


def refine(curve: ClosedCurve, N_new: int) -> ClosedCurve:
    return curve.with_rho(trig_interpolate(curve.rho, N_new))


def auto_resolve(curve: ClosedCurve) -> ClosedCurve:
    """Double ``N`` while the convexity margin ``min(kappa) L`` is below 1e-3."""
    c = curve
    while c.N < MAX_N and curve_geometry(c).convexity_margin < 1e-3:
        c = refine(c, 2 * c.N)
    return c


def from_config(space: SpaceForm, cfg: Mapping[str, Any], N: int = DEFAULT_N) -> ClosedCurve:
    """Build a curve from the JSON schema (``radial_fourier`` / ``samples`` / ``circle`` / ``ellipse``)."""
    kind = cfg.get("type")
    if kind == "radial_fourier":
        return from_fourier(space, cfg["a0"], cfg.get("cos", ()), cfg.get("sin", ()), N)
    if kind == "samples":
        return ClosedCurve(space, cfg["rho"])
    if kind == "circle":
        return circle(space, cfg["radius"], N)
    if kind == "ellipse":
        if space.K != 0:
            raise ConfigError("ellipse shapes are Euclidean")
        return ellipse(cfg["a"], cfg["b"], N, tuple(cfg.get("center", (0.0, 0.0))))
    raise ConfigError(f"unknown curve type {kind!r}")


def to_config(curve: ClosedCurve) -> dict:
    return {"type": "samples", "rho": [float(x) for x in curve.rho]}


# --------------------------------------------------------------------------
# geometry


def curve_geometry(c: ClosedCurve) -> CurveGeometry:
    sp = c.space
    N = c.N
    dth = 2.0 * math.pi / N
    rho = c.rho
    r1, r2 = spectral_derivatives_12(rho)
    ph, dph = sp.phi(rho), sp.dphi(rho)
    W = np.sqrt(ph * ph + r1 * r1)
    kappa = (ph * ph * dph + 2.0 * dph * r1 * r1 - ph * r2) / W**3
    u = ph * ph / W
    Phi = sp.Phi(rho)
    ds = W * dth
    if not (np.all(np.isfinite(kappa)) and np.all(np.isfinite(W))):
        raise NumericalError("non-finite curve derivatives")
    grad_phi_sq = (ph * r1 / W) ** 2
    theta = c.theta
    return CurveGeometry(
        curve=c,
        theta=theta,
        drho=r1,
        d2rho=r2,
        phi=ph,
        dphi=dph,
        W=W,
        kappa=kappa,
        u=u,
        Phi=Phi,
        ds=ds,
        grad_phi_sq=grad_phi_sq,
        L=float(np.sum(ds)),
        A=float(np.sum(Phi) * dth),
    )


def require_convex(geom: CurveGeometry) -> None:
    if np.min(geom.kappa) <= 0:
        raise ConvexityError(f"curve is not strictly convex (min kappa = {np.min(geom.kappa):.3e})")


def weighted_kappa_integral(geom: CurveGeometry, g: Weight) -> float:
    """``int g(Phi) kappa ds``."""
    g.check_domain(geom.Phi)
    return geom.integrate(g.g(geom.Phi) * geom.kappa)


def Ag_area(c: ClosedCurve | CurveGeometry, g: Weight, method: str = "closed") -> float:
    """Weighted area ``int_Omega (g'(Phi) phi' + K g(Phi)) dv``.

    The angular integral is the periodic trapezoid rule.  The radial one is
    exact by default: integrating by parts with ``phi'' = -K phi`` gives
    ``phi'(rho) g(Phi(rho)) - g(0) + 2 K G(Phi(rho))``.  ``gauss`` (48-point
    Gauss-Legendre) and ``quad`` (adaptive) integrate numerically instead.
    """
    curve = c.curve if isinstance(c, CurveGeometry) else c
    sp = curve.space
    Phi = sp.Phi(curve.rho)
    g.check_domain(Phi)
    if method == "closed":
        inner = sp.dphi(curve.rho) * g.g(Phi) - g.g(0.0) + 2.0 * sp.K * g.G(Phi)
    else:
        dens = ag_density(sp, g)
        inner = radial_integral(lambda s: dens(s) * sp.phi(s), curve.rho, method)
    return float(np.sum(inner) * 2.0 * math.pi / curve.N)


def geodesic_disk_area(space: SpaceForm, L) -> np.ndarray | float:
    """``A(L) = 2 pi Phi(phi^{-1}(L / 2 pi))``, area of the geodesic disk with circumference ``L``."""
    return 2.0 * math.pi * space.Phi(space.phi_inv(np.asarray(L, dtype=float) / (2.0 * math.pi)))


def minkowski2d_rhs(space: SpaceForm, g: Weight, L):
    """Sharp lower bound ``2 g(x) sqrt(4pi^2 - K L^2) - 2 pi g(0) + 4 pi K G(x)``, ``x = A(L)/2pi``."""
    L = np.asarray(L, dtype=float)
    if np.any(L <= 0):
        raise DomainError("length must be positive")
    disc = 4.0 * math.pi**2 - space.K * L * L
    if np.any(disc < 0):
        raise DomainError("4 pi^2 - K L^2 < 0: no geodesic circle with this length")
    x = geodesic_disk_area(space, L) / (2.0 * math.pi)
    g.check_domain(x)
    out = 2.0 * g.g(x) * np.sqrt(disc) - 2.0 * math.pi * g.g(0.0) + 4.0 * math.pi * space.K * g.G(x)
    return float(out) if out.ndim == 0 else out


def evolution_rhs_2d(geom: CurveGeometry, g: Weight, speed) -> float:
    """``int (2 g'(Phi) u kappa - g''(Phi) |grad Phi|^2) F ds``.

    Time derivative of ``int g(Phi) kappa ds + A_g`` under the normal flow
    with speed ``F``.
    """
    F = np.asarray(speed, dtype=float)
    if F.shape != geom.kappa.shape:
        raise DomainError("speed must be sampled on the curve grid")
    Ph = geom.Phi
    integrand = 2.0 * g.dg(Ph) * geom.u * geom.kappa - g.d2g(Ph) * geom.grad_phi_sq
    return geom.integrate(integrand * F)


# --------------------------------------------------------------------------
# recentring (Euclidean)


def points(curve: ClosedCurve) -> np.ndarray:
    th = curve.theta
    return np.stack([curve.rho * np.cos(th), curve.rho * np.sin(th)], axis=-1)


def translate(curve: ClosedCurve, shift) -> ClosedCurve:
    """Re-express ``curve - shift`` radially about the origin (Euclidean only).

    The new radial function is recovered by Newton iteration on the
    trigonometric interpolant, so accuracy stays spectral.  Weighted
    functionals change under translation; callers do this explicitly.
    """
    if curve.space.K != 0:
        raise DomainError("translation is only implemented in the Euclidean plane")
    cx, cy = (float(v) for v in shift)
    N = curve.N
    target = curve.theta
    rho = curve.rho
    d1 = spectral_derivative(rho, 1)

    def angle_and_deriv(t):
        r = trig_eval(rho, t)
        dr = trig_eval(d1, t)
        x, y = r * np.cos(t) - cx, r * np.sin(t) - cy
        dx = dr * np.cos(t) - r * np.sin(t)
        dy = dr * np.sin(t) + r * np.cos(t)
        psi = np.arctan2(y, x)
        dpsi = (x * dy - y * dx) / (x * x + y * y)
        return psi, dpsi, np.hypot(x, y)

    t = target.copy()
    for _ in range(50):
        psi, dpsi, _r = angle_and_deriv(t)
        if np.any(dpsi <= 0):
            raise DomainError("curve is not star-shaped about the new centre")
        err = np.angle(np.exp(1j * (psi - target)))
        t = t - err / dpsi
        if np.max(np.abs(err)) < 1e-15:
            break
    _, _, r_new = angle_and_deriv(t)
    if np.any(r_new <= 0):
        raise DomainError("new centre lies on the curve")
    return ClosedCurve(curve.space, r_new.reshape(N))


def weighted_center(geom: CurveGeometry, weight=None) -> np.ndarray:
    """Centre of mass of the curve with density ``weight`` (default ``kappa``)."""
    w = geom.kappa if weight is None else np.asarray(weight)
    xy = points(geom.curve)
    mass = geom.integrate(w)
    return np.array([geom.integrate(w * xy[:, 0]), geom.integrate(w * xy[:, 1])]) / mass


def geometry_csv(geom: CurveGeometry) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "rho", "kappa", "u", "Phi", "ds"])
    for row in zip(geom.theta, geom.rho, geom.kappa, geom.u, geom.Phi, geom.ds):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()

"""Shape strings for the command line and seeded random corpora."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Union

import numpy as np

from . import axisym, curve2d
from .axisym import AxisymShape
from .curve2d import ClosedCurve
from .errors import ConfigError, DomainError
from .spaceform import SpaceForm

Shape = Union[ClosedCurve, AxisymShape]

CURVE_KINDS = ("circle", "ellipse", "fourier")
SURFACE_KINDS = ("offset_sphere", "legendre", "ellipsoid")
MAX_TRIES = 200


def _floats(text: str) -> list[float]:
    text = text.strip()
    return [float(t) for t in text.split(",") if t.strip()] if text else []


def shape_config(text: str) -> dict:
    """Turn ``kind:arg:...`` into the JSON shape schema.

    ``circle:r``, ``ellipse:a:b``, ``fourier:a0:c1,c2:s1,s2``, ``sphere:R``,
    ``offset_sphere:R:d``, ``legendre:a0:c1,c2``, ``ellipsoid:a:c`` and
    ``file:path.json``.
    """
    kind, _, rest = text.partition(":")
    args = rest.split(":") if rest else []
    try:
        if kind == "file":
            return json.loads(Path(rest).read_text())
        if kind in ("circle", "sphere"):
            (r,) = args
            return {"type": kind, "radius": float(r)}
        if kind == "ellipse":
            a, b = args
            return {"type": "ellipse", "a": float(a), "b": float(b)}
        if kind == "fourier":
            a0, *more = args
            cos = _floats(more[0]) if len(more) > 0 else []
            sin = _floats(more[1]) if len(more) > 1 else []
            if len(more) > 2:
                raise ValueError
            return {"type": "radial_fourier", "a0": float(a0), "cos": cos, "sin": sin}
        if kind == "offset_sphere":
            r, d = args
            return {"type": "offset_sphere", "radius": float(r), "offset": float(d)}
        if kind == "legendre":
            a0, *more = args
            if len(more) > 1:
                raise ValueError
            return {"type": "legendre", "a0": float(a0), "coeffs": _floats(more[0]) if more else []}
        if kind == "ellipsoid":
            a, c = args
            return {"type": "ellipsoid", "a": float(a), "c": float(c)}
    except (ValueError, OSError) as exc:
        raise ConfigError(f"cannot parse shape {text!r}") from exc
    raise ConfigError(f"unknown shape kind {kind!r}")


def natural_dim(cfg: dict) -> int:
    """2 for curve schemas, 3 for surface schemas, 0 when either works (circle/sphere/samples)."""
    kind = cfg.get("type")
    if kind in ("ellipse", "radial_fourier", "samples"):
        return 2
    if kind in ("offset_sphere", "legendre", "ellipsoid", "profile_samples"):
        return 3
    return 0


def build_shape(cfg: dict, space: SpaceForm, n: int, N: int, M: int) -> Shape:
    cfg = dict(cfg)
    if n == 2:
        if cfg.get("type") == "sphere":
            cfg["type"] = "circle"
        return curve2d.from_config(space, cfg, N)
    if cfg.get("type") == "circle":
        cfg["type"] = "sphere"
    if natural_dim(cfg) == 2:
        raise ConfigError(f"shape type {cfg.get('type')!r} is a curve; use --dim 2")
    return axisym.from_config(space, n, cfg, M)


# --------------------------------------------------------------------------
# random corpora


def _base_radius(space: SpaceForm, rng: np.random.Generator) -> float:
    if space.K == 0:
        return float(rng.uniform(0.7, 1.5))
    return float(rng.uniform(0.5, 0.9))


def _meets(geom, require: str) -> bool:
    cc = axisym.convexity_class(geom)
    if require == "convex":
        return cc.strictly_convex
    if require == "h-convex":
        return cc.h_margin > 0
    if require.startswith("k-convex:"):
        return cc.k_convex(int(require.split(":")[1]))
    raise ConfigError(f"unknown convexity requirement {require!r}")


def random_curve(
    space: SpaceForm, rng: np.random.Generator, amp: float = 0.15, N: int = 64,
    require: str = "convex", modes: int = 4,
) -> ClosedCurve:
    """Radial Fourier curve with coefficients ``a0 * amp * U(-1,1) / j^2``, rejection-sampled."""
    for _ in range(MAX_TRIES):
        a0 = _base_radius(space, rng)
        decay = amp * a0 / np.arange(1, modes + 1) ** 2
        cos = rng.uniform(-1, 1, modes) * decay
        sin = rng.uniform(-1, 1, modes) * decay
        try:
            c = curve2d.from_fourier(space, a0, cos, sin, N)
        except DomainError:
            continue
        if _meets(curve2d.curve_geometry(c), require):
            return c
    raise ConfigError(f"no {require} curve found in {MAX_TRIES} tries; lower the amplitude")


def random_profile(
    space: SpaceForm, n: int, rng: np.random.Generator, amp: float = 0.15, M: int = 48,
    require: str = "convex", modes: int = 4,
) -> AxisymShape:
    """Legendre profile ``a0 (1 + sum c_j P_j)`` with ``|c_j| <= amp / j^2``, rejection-sampled."""
    for _ in range(MAX_TRIES):
        a0 = _base_radius(space, rng)
        coeffs = rng.uniform(-1, 1, modes) * amp * a0 / np.arange(1, modes + 1) ** 2
        try:
            s = axisym.legendre_profile(space, n, a0, coeffs, M)
        except DomainError:
            continue
        if _meets(axisym.axisym_geometry(s), require):
            return s
    raise ConfigError(f"no {require} profile found in {MAX_TRIES} tries; lower the amplitude")


def random_shape(
    space: SpaceForm, n: int, rng: np.random.Generator, amp: float, N: int, M: int, require: str
) -> Shape:
    if n == 2:
        return random_curve(space, rng, amp, N, require)
    return random_profile(space, n, rng, amp, M, require)


def corpus(
    space: SpaceForm, n: int, count: int, seed: int, amp: float = 0.15,
    N: int = 64, M: int = 48, require: str = "convex",
) -> list[Shape]:
    rng = np.random.default_rng(seed)
    return [random_shape(space, n, rng, amp, N, M, require) for _ in range(count)]


def radius_span(shape: Shape) -> float:
    return float(np.ptp(shape.rho))


def outline(shape: Shape) -> np.ndarray:
    """Planar points of the curve, or of the meridian mirrored into a closed outline."""
    if isinstance(shape, ClosedCurve):
        th = np.append(shape.theta, 2 * math.pi)
        r = np.append(shape.rho, shape.rho[0])
    else:
        th = np.concatenate([shape.theta, 2 * math.pi - shape.theta[-2::-1]])
        r = np.concatenate([shape.rho, shape.rho[-2::-1]])
    # meridian drawn with the axis vertical
    if isinstance(shape, AxisymShape):
        return np.column_stack([r * np.sin(th), r * np.cos(th)])
    return np.column_stack([r * np.cos(th), r * np.sin(th)])

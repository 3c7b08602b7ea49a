"""The weighted eigenvalue problem ``-Laplace f = lambda H_k f`` and its upper bound.

Curves are discretized directly in the polar angle: with ``ds = W dtheta``
the weak form reads ``int F'G'/W dtheta = lambda int kappa W F G dtheta``.
Surfaces of revolution in R^3 split into Fourier modes ``F(theta) e^{i m
psi}``; with ``R = phi(rho) sin(theta)`` each mode solves

    int (R/W) F'G' + m^2 int (W/R) F G = lambda int H_k R W F G

on a cell-centred grid, the vanishing of ``R`` at the poles supplying the
regularity conditions.  Both are symmetric-definite; the mass matrix is
diagonal, so a diagonal congruence gives an ordinary symmetric problem.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import eigsh

from . import axisym, curve2d, flowlab
from .axisym import AxisymGeometry, AxisymShape
from .curve2d import ClosedCurve, CurveGeometry
from .errors import ConfigError, ConvexityError, DomainError, NumericalError
from .inequalities import InequalityReport, shape_digest, three_term_parts

EIGEN_TOL = 1e-4
DEFAULT_MAX_MODE = 3


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    modes: np.ndarray
    size: int
    residuals: np.ndarray

    @property
    def lambda1(self) -> float:
        """Smallest eigenvalue above the constant mode."""
        scale = max(float(np.max(np.abs(self.eigenvalues))), 1.0)
        pos = self.eigenvalues[self.eigenvalues > 1e-9 * scale]
        if pos.size == 0:
            raise NumericalError("no positive eigenvalue found")
        return float(pos[0])

    @property
    def lambda0(self) -> float:
        return float(self.eigenvalues[0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "mode", "lambda", "residual"])
        for i, (m, lam, res) in enumerate(zip(self.modes, self.eigenvalues, self.residuals)):
            w.writerow([i, int(m), repr(float(lam)), repr(float(res))])
        return buf.getvalue()


def _sorted_result(vals, modes, size, res) -> SpectrumResult:
    vals = np.asarray(vals, dtype=float)
    order = np.argsort(vals, kind="stable")
    return SpectrumResult(vals[order], np.asarray(modes)[order], size, np.asarray(res)[order])


def curve_pencil(geom: CurveGeometry) -> tuple[sp.csr_matrix, np.ndarray]:
    """Stiffness matrix and diagonal mass for ``-f_ss = lambda kappa f`` on the theta grid."""
    if np.min(geom.kappa) <= 0:
        raise ConvexityError("the curve eigenproblem needs kappa > 0")
    N = geom.curve.N
    h = 2.0 * math.pi / N
    W_half = curve2d.trig_interpolate(geom.W, 2 * N)[1::2]
    a = 1.0 / (W_half * h)
    idx = np.arange(N)
    nxt = (idx + 1) % N
    rows = np.concatenate([idx, idx, nxt, idx])
    cols = np.concatenate([idx, nxt, idx, nxt])
    vals = np.concatenate([a, -a, -a, np.zeros(N)])
    A = sp.coo_matrix((vals, (rows, cols)), shape=(N, N)).tocsr()
    A = A + sp.diags(np.roll(a, 1))
    return A.tocsr(), geom.kappa * geom.W * h


def curve_spectrum(geom: CurveGeometry, count: int = 6) -> SpectrumResult:
    """Lowest ``count`` eigenvalues of ``-d^2/ds^2 f = lambda kappa f``."""
    if count < 2:
        raise ConfigError("count must be at least 2")
    A, B = curve_pencil(geom)
    N = B.size
    s = 1.0 / np.sqrt(B)
    C = sp.diags(s) @ A @ sp.diags(s)
    count = min(count, N - 2)
    shift = -1e-3 * (2.0 * math.pi / geom.L) ** 2 / float(np.mean(geom.kappa))
    vals, vecs = eigsh(C.tocsc(), k=count, sigma=shift, which="LM", tol=0.0)
    res = np.linalg.norm(C @ vecs - vecs * vals, axis=0) / np.linalg.norm(vecs, axis=0)
    return _sorted_result(vals, np.zeros(count, dtype=int), N, res)


def _mode_tridiagonal(geom_fine: AxisymGeometry, k: int, m: int):
    """Diagonal, off-diagonal and mass of Fourier mode ``m`` (cell-centred)."""
    M = geom_fine.shape.M // 2
    h = math.pi / M
    R = geom_fine.phi * np.sin(geom_fine.theta)
    W = geom_fine.W
    faces = slice(0, None, 2)
    cells = slice(1, None, 2)
    a = (R / W)[faces] / h
    a[0] = a[-1] = 0.0
    Hk = flowlab.sigma_field(geom_fine, k)[cells] / math.comb(geom_fine.n - 1, k)
    if np.min(Hk) <= 0:
        raise ConvexityError(f"H_{k} must be positive for the weighted eigenproblem")
    B = Hk * R[cells] * W[cells] * h
    diag = a[:-1] + a[1:] + m * m * (W[cells] / R[cells]) * h
    off = -a[1:-1]
    return diag, off, B


def axisym_spectrum(
    geom: AxisymGeometry, k: int = 1, max_mode: int = DEFAULT_MAX_MODE, count: int = 4
) -> SpectrumResult:
    """Lowest eigenvalues of each Fourier mode ``0..max_mode``, merged and sorted.

    Eigenvalues with ``m >= 1`` are listed once although each has multiplicity two.
    """
    if geom.n != 3:
        raise ConfigError("eigenvalue solves on surfaces of revolution are implemented for n = 3")
    if max_mode < 1:
        raise ConfigError("max_mode must be at least 1")
    if not 1 <= k <= 2:
        raise ConfigError("k must be 1 or 2 for n = 3")
    fine = axisym.axisym_geometry(axisym.resample(geom.shape, 2 * geom.shape.M))
    vals, modes, res = [], [], []
    M = geom.shape.M
    for m in range(max_mode + 1):
        d, e, B = _mode_tridiagonal(fine, k, m)
        s = 1.0 / np.sqrt(B)
        dd = d * s * s
        ee = e * s[:-1] * s[1:]
        cnt = min(count, M)
        lam, V = eigh_tridiagonal(dd, ee, select="i", select_range=(0, cnt - 1))
        CV = dd[:, None] * V
        CV[:-1] += ee[:, None] * V[1:]
        CV[1:] += ee[:, None] * V[:-1]
        r = np.linalg.norm(CV - V * lam, axis=0)
        vals.extend(lam)
        modes.extend([m] * cnt)
        res.extend(r)
    return _sorted_result(vals, modes, M, res)


# --------------------------------------------------------------------------
# the bound


def eigen_bound(geom, k: int = 1) -> float:
    """``(n-1)|Sigma| / (2 B)`` with ``B`` the three-term right side minus its ``H_{k-2}`` term.

    Uses the shape as given; :func:`verify_eigen_bound` recentres first.
    """
    if geom.space.K != 0:
        raise ConfigError("the eigenvalue bound is stated in Euclidean space")
    n = geom.n
    if not 1 <= k <= n - 1:
        raise ConfigError(f"need 1 <= k <= {n - 1}")
    _first, second, rhs = three_term_parts(geom, k)
    bracket = rhs - second
    if bracket <= 0:
        raise NumericalError(f"bound denominator is not positive ({bracket:.3e})")
    area = geom.L if isinstance(geom, CurveGeometry) else geom.area
    return 0.5 * (n - 1) * area / bracket


def bound_bracket(geom, k: int = 1) -> float:
    _first, second, rhs = three_term_parts(geom, k)
    return rhs - second


def recenter(geom, k: int = 1):
    """Translate so the ``H_k``-weighted centre of ``Sigma`` is the origin; returns new geometry."""
    if isinstance(geom, CurveGeometry):
        w = flowlab.sigma_field(geom, k)
        c = curve2d.weighted_center(geom, w)
        return curve2d.curve_geometry(curve2d.translate(geom.curve, c))
    w = flowlab.sigma_field(geom, k)
    z = axisym.axial_center(geom, w)
    return axisym.axisym_geometry(axisym.translate_axis(geom.shape, z))


def spectrum(geom, k: int = 1, max_mode: int = DEFAULT_MAX_MODE, count: int = 6) -> SpectrumResult:
    if isinstance(geom, CurveGeometry):
        if k != 1:
            raise ConfigError("curves only have k = 1")
        return curve_spectrum(geom, count)
    return axisym_spectrum(geom, k, max_mode, count)


def verify_eigen_bound(
    geom, k: int = 1, max_mode: int = DEFAULT_MAX_MODE, tol: float = EIGEN_TOL
) -> tuple[InequalityReport, SpectrumResult]:
    """Compare the recentred bound (lhs) with the computed first eigenvalue (rhs)."""
    if geom.space.K != 0:
        raise ConfigError("the eigenvalue bound is stated in Euclidean space")
    spec = spectrum(geom, k, max_mode)
    centred = recenter(geom, k)
    bound = eigen_bound(centred, k)
    rep = InequalityReport(
        "eigen",
        {"K": 0, "n": geom.n, "k": k, "bracket": bound_bracket(centred, k), "size": spec.size},
        bound,
        spec.lambda1,
        tol,
        shape_digest(geom),
        ["bound evaluated after moving the H_k-weighted centre to the origin"],
    )
    return rep, spec


def shape_geometry(shape):
    if isinstance(shape, ClosedCurve):
        return curve2d.curve_geometry(shape)
    if isinstance(shape, AxisymShape):
        return axisym.axisym_geometry(shape)
    raise DomainError("expected a ClosedCurve or AxisymShape")

"""Elementary symmetric functions of principal curvatures and Newton tensors.

Tuples of principal curvatures are numpy arrays whose *last* axis holds the
``m = n - 1`` curvatures, so per-sample curvature fields of shape ``(N, m)``
are processed in one call.  Weingarten maps are taken in an orthonormal
frame (metric = identity).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvexityError, DomainError

UMBILIC_TOL = 1e-12


def sigma(k: int, kappa) -> np.ndarray | float:
    """k-th elementary symmetric polynomial of ``kappa`` (last axis).

    ``sigma_0 = 1`` and ``sigma_k = 0`` for ``k > m``.  Uses the one-pass
    recurrence ``e_j <- e_j + x * e_{j-1}``, never forming products of all
    subsets.
    """
    if k < 0:
        raise DomainError(f"sigma needs k >= 0, got {k}")
    kappa = np.asarray(kappa, dtype=float)
    m = kappa.shape[-1]
    if k == 0:
        return np.ones(kappa.shape[:-1]) if kappa.ndim > 1 else 1.0
    if k > m:
        return np.zeros(kappa.shape[:-1]) if kappa.ndim > 1 else 0.0
    e = [np.ones(kappa.shape[:-1])] + [np.zeros(kappa.shape[:-1]) for _ in range(k)]
    for i in range(m):
        x = kappa[..., i]
        for j in range(min(i + 1, k), 0, -1):
            e[j] = e[j] + x * e[j - 1]
    out = e[k]
    return out if kappa.ndim > 1 else float(out)


def sigmas(kappa, kmax: int | None = None) -> np.ndarray:
    """All of ``sigma_0 .. sigma_kmax`` stacked on a new leading axis."""
    kappa = np.asarray(kappa, dtype=float)
    m = kappa.shape[-1]
    kmax = m if kmax is None else kmax
    e = np.zeros((kmax + 1,) + kappa.shape[:-1])
    e[0] = 1.0
    for i in range(m):
        x = kappa[..., i]
        for j in range(min(i + 1, kmax), 0, -1):
            e[j] = e[j] + x * e[j - 1]
    return e


def h_norm(k: int, kappa) -> np.ndarray | float:
    """Normalized mean curvature ``H_k = sigma_k / C(m, k)`` for ``0 <= k <= m``.

    ``k = -1`` is rejected: by this toolkit's convention ``H_{-1}`` is the
    support function, which a curvature tuple alone does not determine.
    """
    kappa = np.asarray(kappa, dtype=float)
    m = kappa.shape[-1]
    if k == -1:
        raise DomainError("H_{-1} is the support function; it is not a function of kappa")
    if not 0 <= k <= m:
        raise DomainError(f"h_norm needs 0 <= k <= {m}, got {k}")
    return sigma(k, kappa) / math.comb(m, k)


def _h_ext(k: int, kappa):
    """``H_k`` with the convention ``H_k = 0`` for ``k > m``."""
    m = np.shape(kappa)[-1]
    if k > m:
        return sigma(k, kappa)
    return h_norm(k, kappa)


def sigma_matrix(k: int, W) -> float:
    """``sigma_k`` of the eigenvalues of a (not necessarily symmetric) matrix.

    Read off the characteristic polynomial ``det(tI - W) = sum (-1)^k sigma_k t^(m-k)``.
    """
    W = np.asarray(W, dtype=float)
    m = W.shape[0]
    if k < 0:
        raise DomainError(f"sigma needs k >= 0, got {k}")
    if k > m:
        return 0.0
    coeffs = np.poly(W)
    return float(np.real((-1) ** k * coeffs[k]))


def newton_tensor(k: int, W) -> np.ndarray:
    """Newton tensor ``T_k = d sigma_{k+1} / d h`` of a Weingarten matrix.

    Built by ``T_0 = I`` and ``T_j = sigma_j I - T_{j-1} h``; so
    ``T_1 = sigma_1 I - h``.  Valid for ``0 <= k <= m - 1``.
    """
    W = np.asarray(W, dtype=float)
    m = W.shape[0]
    if W.shape != (m, m):
        raise DomainError("Weingarten map must be square")
    if not 0 <= k <= m - 1:
        raise DomainError(f"newton_tensor needs 0 <= k <= {m - 1}, got {k}")
    eye = np.eye(m)
    T = eye
    for j in range(1, k + 1):
        T = sigma_matrix(j, W) * eye - T @ W
    return T


def cone_check(k: int, kappa) -> bool | np.ndarray:
    """True iff ``sigma_j(kappa) > 0`` for ``j = 1..k`` (Garding cone)."""
    kappa = np.asarray(kappa, dtype=float)
    e = sigmas(kappa, k)
    ok = np.all(e[1 : k + 1] > 0, axis=0)
    return bool(ok) if kappa.ndim == 1 else ok


def cone_margin(k: int, kappa) -> float:
    """Smallest ``sigma_j`` over ``j = 1..k`` and all samples."""
    e = sigmas(np.asarray(kappa, dtype=float), k)
    return float(np.min(e[1 : k + 1]))


def maclaurin_gap(k: int, l: int, kappa) -> float:
    """``H_k H_l - H_{k+1} H_{l-1}``, nonnegative on the cone ``Gamma_k``.

    Zero exactly on umbilic tuples; values within 1e-12 of zero, relative to
    ``max(1, H_k H_l)``, are snapped to zero.
    """
    kappa = np.asarray(kappa, dtype=float)
    m = kappa.shape[-1]
    if not 1 <= l <= k <= m:
        raise DomainError(f"need 1 <= l <= k <= {m}, got k={k}, l={l}")
    if not cone_check(k, kappa):
        raise ConvexityError(f"curvature tuple {kappa} is outside Gamma_{k}")
    lead = _h_ext(k, kappa) * _h_ext(l, kappa)
    gap = lead - _h_ext(k + 1, kappa) * _h_ext(l - 1, kappa)
    return 0.0 if abs(gap) <= UMBILIC_TOL * max(1.0, abs(lead)) else float(gap)


def maclaurin_power_gap(k: int, kappa) -> float:
    """``H_k^{(k+1)/k} - H_{k+1}``, nonnegative on ``Gamma_k``."""
    kappa = np.asarray(kappa, dtype=float)
    m = kappa.shape[-1]
    if not 1 <= k <= m:
        raise DomainError(f"need 1 <= k <= {m}")
    if not cone_check(k, kappa):
        raise ConvexityError(f"curvature tuple {kappa} is outside Gamma_{k}")
    lead = _h_ext(k, kappa) ** ((k + 1) / k)
    gap = lead - _h_ext(k + 1, kappa)
    return 0.0 if abs(gap) <= UMBILIC_TOL * max(1.0, abs(lead)) else float(gap)


def is_umbilic(kappa, tol: float = UMBILIC_TOL) -> bool:
    kappa = np.asarray(kappa, dtype=float)
    return bool(np.ptp(kappa) <= tol * max(1.0, float(np.max(np.abs(kappa)))))

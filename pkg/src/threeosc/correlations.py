"""Bipartite Gaussian measures and time-series diagnostics.

Pair covariances are ordered (q_A, p_A, q_B, p_B) with vacuum variance 1/2.
The measures accept a single 4x4 matrix or a stack ``(..., 4, 4)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.special import xlogy

from .errors import DegenerateError, NumericalError, ValidationError, WindowError
from .dynamics import GaussianState
from .gaussian import symplectic_form


@dataclass(frozen=True)
class PairCovariance:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape[-2:] != (4, 4):
            raise ValidationError(f"pair covariance must be 4x4, got {m.shape}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def alpha(self):
        return self.matrix[..., :2, :2]

    @property
    def beta(self):
        return self.matrix[..., 2:, 2:]

    @property
    def gamma(self):
        return self.matrix[..., :2, 2:]

    def swapped(self):
        m = self.matrix
        perm = [2, 3, 0, 1]
        return PairCovariance(m[..., perm, :][..., :, perm])


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValidationError("times and values must be 1-d arrays of equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValidationError("times must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValidationError("values must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def _matrix(V):
    return V.matrix if isinstance(V, PairCovariance) else np.asarray(V, dtype=float)


def _unwrap(x):
    return float(x) if np.ndim(x) == 0 else x


def reduce_pair_matrix(cov, i, j):
    """(q_i, p_i, q_j, p_j) block of natural-basis covariance(s); 1-based labels."""
    if i == j or not {i, j} <= {1, 2, 3}:
        raise IndexError(f"need two distinct oscillators in 1..3, got ({i}, {j})")
    idx = [i - 1, i + 2, j - 1, j + 2]
    cov = np.asarray(cov)
    return cov[..., idx, :][..., :, idx]


def reduce_pair(state: GaussianState, i: int, j: int) -> PairCovariance:
    if state.basis != "natural":
        raise ValidationError("pair reduction needs the natural basis")
    return PairCovariance(reduce_pair_matrix(state.cov, i, j))


_flip = np.array([1.0, 1.0, 1.0, -1.0])
_PT_SIGN = np.outer(_flip, _flip)
_IJ = 1j * symplectic_form(2, "xpxp")


def min_symplectic_eig(V):
    """Smallest symplectic eigenvalue of the partially transposed covariance,
    in units where the vacuum gives 1."""
    m = _matrix(V)
    a = 4 * np.linalg.det(m[..., :2, :2])
    b = 4 * np.linalg.det(m[..., 2:, 2:])
    g = 4 * np.linalg.det(m[..., :2, 2:])
    s = 16 * np.linalg.det(m)
    delta = a + b - 2 * g
    inner = delta ** 2 - 4 * s
    if np.any(inner < -1e-12 * np.maximum(1.0, delta ** 2)):
        raise NumericalError("negative radicand in symplectic eigenvalue")
    # Same quantity as sqrt((delta - sqrt(inner)) / 2), but the determinant
    # form cancels badly when both eigenvalues are close (e.g. squeezed
    # product states). The spectrum of S iJ S with S = sqrt(V_pt) is +-nu.
    pt = m * _PT_SIGN
    w, U = np.linalg.eigh(pt)
    if np.any(w <= 0):
        raise NumericalError("partially transposed covariance is not positive definite")
    S = (U * np.sqrt(w)[..., None, :]) @ np.swapaxes(U, -1, -2)
    M = S @ _IJ @ S
    nu = 2.0 * np.linalg.eigvalsh(M)[..., 2]
    return _unwrap(nu)


def log_negativity(nu_minus):
    """``max(0, -ln nu_minus)``."""
    nu = np.asarray(nu_minus, dtype=float)
    return _unwrap(np.maximum(0.0, -np.log(nu)))


def pair_log_negativity(cov, i, j):
    return log_negativity(min_symplectic_eig(reduce_pair_matrix(cov, i, j)))


def _local_normaliser(block):
    """Single-mode symplectic S with S block S^T proportional to the identity."""
    w, U = np.linalg.eigh(block)
    nu = np.sqrt(np.prod(w))
    return np.sqrt(nu) * (U / np.sqrt(w)) @ U.T


def _rotation_svd(M):
    U, s, Wt = np.linalg.svd(M)
    if np.linalg.det(U) < 0:
        U[:, 1] *= -1
        s[1] *= -1
    if np.linalg.det(Wt) < 0:
        Wt[1, :] *= -1
        s[1] *= -1
    return U, s, Wt


def standard_form(V) -> PairCovariance:
    """Local-symplectic standard form ``[[a I, diag(c, d)], [diag(c, d), b I]]``
    with ``c >= |d|``."""
    m = _matrix(V)
    SA = _local_normaliser(m[:2, :2])
    SB = _local_normaliser(m[2:, 2:])
    S = np.zeros((4, 4))
    S[:2, :2], S[2:, 2:] = SA, SB
    m = S @ m @ S.T
    U, _, Wt = _rotation_svd(m[:2, 2:])
    R = np.zeros((4, 4))
    R[:2, :2], R[2:, 2:] = U.T, Wt
    out = R @ m @ R.T
    return PairCovariance(0.5 * (out + out.T))


def _f(x):
    return xlogy((x + 1) / 2, (x + 1) / 2) - xlogy((x - 1) / 2, (x - 1) / 2)


def gaussian_discord(V, measured_party: Literal["A", "B"] = "B"):
    """Gaussian discord with the optimal Gaussian measurement on one party.

    Closed form in the invariants ``A, B, C, D`` of the covariance scaled so
    the vacuum is the identity; the measured party's local invariant is
    ``B``. Non-negative, zero on product states.
    """
    m = _matrix(V)
    if measured_party == "A":
        perm = [2, 3, 0, 1]
        m = m[..., perm, :][..., :, perm]
    elif measured_party != "B":
        raise ValidationError(f"measured_party must be 'A' or 'B', got {measured_party!r}")
    m = 2.0 * m
    A = np.linalg.det(m[..., :2, :2])
    B = np.linalg.det(m[..., 2:, 2:])
    C = np.linalg.det(m[..., :2, 2:])
    D = np.linalg.det(m)
    if np.any(A < 1 - 1e-9) or np.any(B < 1 - 1e-9) or np.any(D < 1 - 1e-9):
        raise NumericalError("non-physical covariance in discord evaluation")
    A, B, D = np.maximum(A, 1.0), np.maximum(B, 1.0), np.maximum(D, 1.0)

    delta = A + B + 2 * C
    root = np.sqrt(np.clip(delta ** 2 - 4 * D, 0, None))
    nu_p = np.sqrt((delta + root) / 2)
    nu_m = np.sqrt(np.clip((delta - root) / 2, 1.0, None))

    Bm1 = B - 1
    pure_b = Bm1 < 1e-12
    safe = np.where(pure_b, 1.0, Bm1)
    inner = np.clip(C ** 2 + Bm1 * (D - A), 0, None)
    e_het = (2 * C ** 2 + Bm1 * (D - A) + 2 * np.abs(C) * np.sqrt(inner)) / safe ** 2
    e_hom = (A * B - C ** 2 + D
             - np.sqrt(np.clip(C ** 4 + (D - A * B) ** 2 - 2 * C ** 2 * (A * B + D), 0, None))
             ) / (2 * B)
    use_het = (D - A * B) ** 2 <= (1 + B) * C ** 2 * (A + D)
    e_min = np.where(use_het, e_het, e_hom)
    e_min = np.where(pure_b, A, e_min)

    val = _f(np.sqrt(B)) - _f(nu_m) - _f(nu_p) + _f(np.sqrt(np.maximum(e_min, 1.0)))
    if np.any(val < -1e-9):
        raise NumericalError(f"negative discord {np.min(val):.3e}")
    return _unwrap(np.maximum(val, 0.0))


def _window_mask(times, t, window):
    span = max(abs(t), abs(t + window), 1.0) * 1e-12
    if times[0] > t + span or times[-1] < t + window - span:
        raise WindowError(f"series [{times[0]}, {times[-1]}] does not cover "
                          f"[{t}, {t + window}]")
    mask = (times >= t - span) & (times <= t + window + span)
    if mask.sum() < 32:
        raise WindowError(f"only {mask.sum()} samples in window; need >= 32")
    return mask


def sync_from_samples(times, h, g):
    """Normalised covariance of two sampled signals (trapezoidal quadrature)."""
    span = times[-1] - times[0]
    hc = h - np.trapezoid(h, times) / span
    gc = g - np.trapezoid(g, times) / span
    var_h = np.trapezoid(hc * hc, times)
    var_g = np.trapezoid(gc * gc, times)
    if var_h / span < 1e-15 or var_g / span < 1e-15:
        raise DegenerateError("windowed variance vanishes")
    c = np.trapezoid(hc * gc, times) / np.sqrt(var_h * var_g)
    return float(np.clip(c, -1.0, 1.0))


def sync_indicator(h: TimeSeries, g: TimeSeries, t: float, window: float) -> float:
    """Synchronisation indicator over ``[t, t + window]``, in [-1, 1]."""
    if window <= 0:
        raise WindowError("window must be positive")
    mask = _window_mask(h.times, t, window)
    if not np.array_equal(h.times, g.times):
        raise WindowError("both series must share the same sample times")
    return sync_from_samples(h.times[mask], h.values[mask], g.values[mask])


def gaussian_smooth(series: TimeSeries, width: float) -> TimeSeries:
    """Gaussian filter with standard deviation ``width`` (time units) and
    reflective boundaries. Needs a uniform grid."""
    if width <= 0:
        raise ValidationError("width must be positive")
    t = series.times
    if t.size < 2:
        return series
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ValidationError("Gaussian smoothing needs a uniform time grid")
    sigma = width / dt[0]
    smoothed = gaussian_filter1d(series.values, sigma, mode="reflect")
    return TimeSeries(t, smoothed)

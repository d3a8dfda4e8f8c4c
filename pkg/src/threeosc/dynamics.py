"""Gaussian-state dynamics under the strong-RWA Markovian master equation.

In the normal-mode basis every mode relaxes independently: first moments
and second moments obey

    dX/dt = A X,            dV/dt = A V + V A^T + Diff,

with, per mode n and quadrature pair (Q_n, P_n),

    A_n    = [[-Gamma_n/2, 1], [-Omega_n**2, -Gamma_n/2]]
    Diff_n = diag(D_n / (2 Omega_n**2), D_n / 2)

``Gamma_n = gamma kappa_n**2`` and ``D_n = Gamma_n Omega_n coth(Omega_n / 2T)``
for an Ohmic bath. The drift part commutes with the free rotation, so the
propagator is a damped rotation and no time stepping is needed.

Vectors are ordered (x1, x2, x3, p1, p2, p3) in both bases.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import BasisMismatch, CutoffViolation, ValidationError
from .gaussian import symplectic_eigenvalues
from .lattice import BathParams, NormalModes

Basis = Literal["natural", "normal"]


def coth_factor(Omega, T):
    """``coth(Omega / 2T)`` with the ``T = 0`` limit 1."""
    Omega = np.asarray(Omega, dtype=float)
    if T == 0:
        return np.ones_like(Omega)
    with np.errstate(over="ignore"):
        return 1.0 / np.tanh(Omega / (2.0 * T))


@dataclass(frozen=True)
class GaussianState:
    basis: str
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        if self.basis not in ("natural", "normal"):
            raise ValidationError(f"unknown basis {self.basis!r}")
        mean = np.array(self.mean, dtype=float).reshape(6)
        cov = np.array(self.cov, dtype=float).reshape(6, 6)
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ValidationError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def symplectic_eigenvalues(self):
        return symplectic_eigenvalues(self.cov, "xxpp")

    def is_physical(self, tol=1e-9):
        return bool(self.symplectic_eigenvalues().min() >= 0.5 - tol)

    def variances(self):
        """Diagonal second moments <x_i^2>, <p_i^2> (zero mean assumed by callers)."""
        d = np.diag(self.cov)
        return d[:3], d[3:]


@dataclass(frozen=True)
class MmeCoefficients:
    """Per-mode damping/diffusion plus the assembled 6x6 blocks."""

    Omega: np.ndarray
    Gamma: np.ndarray
    D: np.ndarray
    free: np.ndarray      # True where the mode is decoupled (kappa = 0)
    T: float

    @property
    def drift(self):
        A = np.zeros((6, 6))
        for n in range(3):
            A[n, n] = A[n + 3, n + 3] = -self.Gamma[n] / 2
            A[n, n + 3] = 1.0
            A[n + 3, n] = -self.Omega[n] ** 2
        return A

    @property
    def diffusion(self):
        return np.diag(np.concatenate([self.D / (2 * self.Omega ** 2), self.D / 2]))

    def drift_block(self, n):
        return self.drift[np.ix_([n, n + 3], [n, n + 3])]

    def diffusion_block(self, n):
        return self.diffusion[np.ix_([n, n + 3], [n, n + 3])]

    @property
    def stationary_blocks(self):
        """2x2 stationary covariance per mode; None for free modes."""
        c = coth_factor(self.Omega, self.T)
        blocks = []
        for n in range(3):
            if self.free[n]:
                blocks.append(None)
            else:
                blocks.append(np.diag([c[n] / (2 * self.Omega[n]), self.Omega[n] * c[n] / 2]))
        return tuple(blocks)

    @property
    def stationary_cov(self):
        """6x6 stationary covariance with zero blocks for free modes."""
        c = np.where(self.free, 0.0, coth_factor(self.Omega, self.T))
        return np.diag(np.concatenate([c / (2 * self.Omega), self.Omega * c / 2]))


def squeezed_vacuum(omega_sq, r) -> GaussianState:
    """Separable squeezed vacuum, position squeezed for r > 0."""
    omega = np.sqrt(np.asarray(omega_sq, dtype=float))
    r = np.broadcast_to(np.asarray(r, dtype=float), (3,))
    if np.any(omega <= 0):
        raise ValidationError("squared frequencies must be positive")
    q2 = np.exp(-2 * r) / (2 * omega)
    p2 = omega * np.exp(2 * r) / 2
    return GaussianState("natural", np.zeros(6), np.diag(np.concatenate([q2, p2])))


def _basis_matrix(F):
    S = np.zeros((6, 6))
    S[:3, :3] = F.T
    S[3:, 3:] = F.T
    return S


def change_basis(state: GaussianState, modes: NormalModes, to: Basis) -> GaussianState:
    if to not in ("natural", "normal"):
        raise ValidationError(f"unknown basis {to!r}")
    if state.basis == to:
        raise BasisMismatch(f"state already in the {to} basis")
    S = _basis_matrix(modes.F)
    if to == "natural":
        S = S.T
    return GaussianState(to, S @ state.mean, S @ state.cov @ S.T)


def mme_coefficients(modes: NormalModes, bath: BathParams) -> MmeCoefficients:
    """Damping and diffusion coefficients for an Ohmic, sharp-cutoff bath."""
    Omega = np.asarray(modes.Omega, dtype=float)
    if np.any(Omega >= bath.cutoff):
        raise CutoffViolation(
            f"normal frequencies {Omega} must stay below the cutoff {bath.cutoff}")
    free = np.asarray(modes.protected)
    k2 = np.where(free, 0.0, np.asarray(modes.kappa) ** 2)
    Gamma = bath.gamma * k2
    D = Gamma * Omega * coth_factor(Omega, bath.T)
    return MmeCoefficients(Omega=Omega, Gamma=Gamma, D=D, free=free, T=bath.T)


def transfer_matrix(coeffs: MmeCoefficients, t):
    """Propagator exp(A t); stacked along a leading axis when ``t`` is an array."""
    t = np.asarray(t, dtype=float)
    tt = t[..., None]
    Om = coeffs.Omega
    decay = np.exp(-coeffs.Gamma * tt / 2)
    c, s = np.cos(Om * tt), np.sin(Om * tt)
    Phi = np.zeros(t.shape + (6, 6))
    idx = np.arange(3)
    Phi[..., idx, idx] = decay * c
    Phi[..., idx + 3, idx + 3] = decay * c
    Phi[..., idx, idx + 3] = decay * s / Om
    Phi[..., idx + 3, idx] = -decay * Om * s
    return Phi


def _require_normal(state):
    if state.basis != "normal":
        raise BasisMismatch("propagation needs a state in the normal-mode basis")


def propagate(state: GaussianState, coeffs: MmeCoefficients, t: float) -> GaussianState:
    _require_normal(state)
    if t < 0:
        raise ValidationError("t must be >= 0")
    Phi = transfer_matrix(coeffs, t)
    Vinf = coeffs.stationary_cov
    return GaussianState("normal", Phi @ state.mean,
                         Phi @ (state.cov - Vinf) @ Phi.T + Vinf)


def propagate_series(state: GaussianState, coeffs: MmeCoefficients, times):
    """Means ``(n, 6)`` and covariances ``(n, 6, 6)`` at each time, each
    computed directly from t = 0."""
    _require_normal(state)
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValidationError("times must be >= 0")
    Phi = transfer_matrix(coeffs, times)
    Vinf = coeffs.stationary_cov
    means = Phi @ state.mean
    covs = Phi @ (state.cov - Vinf) @ np.swapaxes(Phi, -1, -2) + Vinf
    return means, covs


def natural_series(state: GaussianState, modes: NormalModes, coeffs: MmeCoefficients,
                   times):
    """Propagate a natural-basis state and return natural-basis covariances."""
    normal = change_basis(state, modes, "normal") if state.basis == "natural" else state
    means, covs = propagate_series(normal, coeffs, times)
    S = _basis_matrix(modes.F).T
    return means @ S.T, S @ covs @ S.T


def thermal_state(modes: NormalModes, bath: BathParams) -> GaussianState:
    """Gibbs state of all three normal modes at the bath temperature."""
    Om = np.asarray(modes.Omega)
    c = coth_factor(Om, bath.T)
    return GaussianState("normal", np.zeros(6),
                         np.diag(np.concatenate([c / (2 * Om), Om * c / 2])))

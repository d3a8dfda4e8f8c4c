"""Symplectic helpers shared by the dynamics and correlation code.

Covariances use hbar = 1 with vacuum variance 1/2 (in units where the
oscillator frequency is one), so physical states have symplectic
eigenvalues >= 1/2.
"""
import numpy as np


def symplectic_form(n, ordering="xxpp"):
    """``[[0, I], [-I, 0]]`` for ``xxpp``; block-diagonal ``[[0, 1], [-1, 0]]`` for ``xpxp``."""
    if ordering == "xxpp":
        eye = np.eye(n)
        zero = np.zeros((n, n))
        return np.block([[zero, eye], [-eye, zero]])
    if ordering == "xpxp":
        return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    raise ValueError(f"unknown ordering {ordering!r}")


def symplectic_eigenvalues(cov, ordering="xxpp"):
    """Ascending symplectic eigenvalues of a covariance matrix."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[-1] // 2
    J = symplectic_form(n, ordering)
    ev = np.abs(np.linalg.eigvals(1j * J @ cov))
    return np.sort(ev)[::2]


def partial_transpose(cov, mode, ordering="xpxp"):
    """Flip the momentum of ``mode`` (time reflection of one party)."""
    cov = np.array(cov, dtype=float)
    n = cov.shape[-1] // 2
    idx = 2 * mode + 1 if ordering == "xpxp" else n + mode
    cov[..., idx, :] *= -1
    cov[..., :, idx] *= -1
    return cov

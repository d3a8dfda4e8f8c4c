"""Hamiltonian matrix, normal modes and effective bath couplings.

Conventions: unit masses, hbar = k_B = 1, and frequencies usually quoted in
units of the central oscillator frequency.  Squared frequencies are the
primary inputs; couplings ``l12, l13, l23`` carry the same units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PositivityError, ValidationError

#: Relative threshold for calling an effective coupling zero.
NS_TOL = 1e-9
#: Relative gap below which two squared normal frequencies are merged.
DEGENERACY_TOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SystemParams:
    """Squared frequencies, couplings and per-oscillator bath weights."""

    omega_sq: tuple[float, float, float]
    l12: float = 0.0
    l13: float = 0.0
    l23: float = 0.0
    bath_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        omega_sq = tuple(map(float, self.omega_sq))
        weights = tuple(map(float, self.bath_weights))
        if len(omega_sq) != 3 or len(weights) != 3:
            raise ValidationError("need exactly three oscillators")
        couplings = (float(self.l12), float(self.l13), float(self.l23))
        if not all(map(math.isfinite, omega_sq + weights + couplings)):
            raise ValidationError("parameters must be finite")
        object.__setattr__(self, "omega_sq", omega_sq)
        object.__setattr__(self, "bath_weights", weights)
        for name, v in zip(("l12", "l13", "l23"), couplings):
            object.__setattr__(self, name, v)

    @classmethod
    def from_frequencies(cls, omega, l12=0.0, l13=0.0, l23=0.0,
                         bath_weights=(1.0, 1.0, 1.0)):
        return cls(tuple(float(w) ** 2 for w in omega), l12, l13, l23,
                   bath_weights)

    @classmethod
    def open_chain(cls, omega1, omega2, omega3, lam, l13=0.0):
        """Chain 1-2-3 with equal nearest-neighbour couplings."""
        return cls.from_frequencies((omega1, omega2, omega3), lam, l13, lam)

    @property
    def omega(self):
        return tuple(float(np.sqrt(w)) if w >= 0 else float("nan")
                     for w in self.omega_sq)

    @property
    def couplings(self):
        return (self.l12, self.l13, self.l23)

    def replace(self, **changes):
        fields = dict(omega_sq=self.omega_sq, l12=self.l12, l13=self.l13,
                      l23=self.l23, bath_weights=self.bath_weights)
        unknown = set(changes) - set(fields)
        if unknown:
            raise TypeError(f"unknown fields {sorted(unknown)}")
        fields.update(changes)
        return SystemParams(**fields)

    def as_dict(self):
        return {"omega_sq": list(self.omega_sq), "l12": self.l12,
                "l13": self.l13, "l23": self.l23,
                "bath_weights": list(self.bath_weights)}


@dataclass(frozen=True)
class NormalModes:
    """Mode matrix ``F`` (columns are modes), frequencies and couplings.

    Natural and normal coordinates are related by ``q = F Q``.
    """

    F: np.ndarray
    Omega: np.ndarray
    kappa: np.ndarray
    kappa_tol: float = NS_TOL

    def __post_init__(self):
        for name in ("F", "Omega", "kappa"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def Omega_sq(self):
        return self.Omega ** 2

    @property
    def protected(self):
        """Boolean mask of modes decoupled from the bath."""
        return np.abs(self.kappa) < self.kappa_tol

    @property
    def ns_mode_count(self):
        return int(self.protected.sum())


@dataclass(frozen=True)
class BathParams:
    """Ohmic bath with a sharp cutoff."""

    T: float
    gamma: float
    cutoff: float = field(default=50.0)

    def __post_init__(self):
        if not (self.T >= 0 and np.isfinite(self.T)):
            raise ValidationError(f"temperature must be >= 0, got {self.T}")
        if not self.gamma > 0:
            raise ValidationError(f"gamma must be > 0, got {self.gamma}")
        if not self.cutoff > 0:
            raise ValidationError(f"cutoff must be > 0, got {self.cutoff}")


def _potential_matrix(params):
    w1, w2, w3 = params.omega_sq
    return np.array([[w1, params.l12, params.l13],
                     [params.l12, w2, params.l23],
                     [params.l13, params.l23, w3]])


def _check_positive(lowest):
    if lowest <= 0:
        raise PositivityError(
            f"Hamiltonian matrix not positive definite (lowest eigenvalue {lowest:.6g})")


def build_hamiltonian(params: SystemParams) -> np.ndarray:
    """Symmetric 3x3 potential matrix; raises PositivityError unless PD."""
    H = _potential_matrix(params)
    _check_positive(np.linalg.eigvalsh(H)[0])
    return H


def kappa_tolerance(bath_weights) -> float:
    return NS_TOL * float(np.sum(np.abs(bath_weights)))


def _degenerate_groups(evals):
    scale = max(float(np.max(np.abs(evals))), 1e-300)
    groups, current = [], [0]
    for n in range(1, len(evals)):
        if evals[n] - evals[current[-1]] < DEGENERACY_TOL * scale:
            current.append(n)
        else:
            groups.append(current)
            current = [n]
    groups.append(current)
    return groups


def _split_degenerate(U, weights, tol):
    """Orthonormal basis of span(U): decoupled combinations first, then the
    single bath-coupled direction (if any)."""
    P = U @ U.T
    k = P @ weights
    chosen = []
    coupled = None
    if np.linalg.norm(k) > tol:
        coupled = k / np.linalg.norm(k)
        chosen.append(coupled)
    free = []
    while len(chosen) < U.shape[1]:
        best, best_norm = None, 0.0
        for e in np.eye(3):
            v = P @ e
            for c in chosen:
                v = v - (c @ v) * c
            nv = np.linalg.norm(v)
            if nv > best_norm + 1e-12:
                best, best_norm = v / nv, nv
        chosen.append(best)
        free.append(best)
    cols = free + ([coupled] if coupled is not None else [])
    return np.column_stack(cols)


def _fix_signs(F):
    A = np.abs(F)
    # first component within round-off of the column maximum
    idx = np.argmax(A >= A.max(axis=0) * (1 - 1e-9), axis=0)
    lead = F[idx, np.arange(F.shape[1])]
    return F * np.where(lead < 0, -1.0, 1.0)


def normal_modes(params: SystemParams) -> NormalModes:
    """Diagonalise the potential matrix.

    Modes are sorted by ascending frequency. Each column is signed so that
    its largest-magnitude component is positive (first one on ties). Inside
    a degenerate eigenspace the basis is rotated so that as many modes as
    possible have zero effective coupling.
    """
    evals, vecs = np.linalg.eigh(_potential_matrix(params))
    _check_positive(evals[0])
    weights = np.asarray(params.bath_weights)
    tol = kappa_tolerance(weights)
    for group in _degenerate_groups(evals):
        if len(group) > 1:
            vecs[:, group] = _split_degenerate(vecs[:, group], weights, tol)
    F = _fix_signs(vecs)
    kappa = weights @ F
    return NormalModes(F=F, Omega=np.sqrt(evals), kappa=kappa, kappa_tol=tol)


def decay_ratio(modes: NormalModes) -> float:
    """Ratio of the two smallest squared effective couplings, in [0, 1].

    Couplings below the decoupling tolerance count as exactly zero, so two
    protected modes give 0.
    """
    k2 = np.where(modes.protected, 0.0, modes.kappa ** 2)
    k2 = np.sort(k2)
    if k2[1] == 0.0:
        return 0.0
    return float(k2[0] / k2[1])

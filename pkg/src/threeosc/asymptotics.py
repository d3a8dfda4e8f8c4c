"""Long-time closed forms for the symmetric open chain.

Once the dissipative normal modes have thermalised, the outer pair (1, 3)
is described by a free part (the protected modes, still carrying the
initial squeezing) plus a thermal part. Two cases have closed forms:

* one protected mode (``w1 = w3``, ``l12 = l23 = lam``, ``l13 = 0``), where
  the reduced state only depends on ``cos(2 omega t)``;
* two protected modes (``lam = omega**2 - omega2**2``), where the state
  beats at ``2 omega`` and ``2 Omega_eps``.

Frequencies are plain (not squared) and ``nu`` is normalised so the vacuum
gives 1, consistent with :func:`threeosc.correlations.min_symplectic_eig`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple, Union

import numpy as np
from scipy.optimize import minimize

from .dynamics import coth_factor
from .errors import (NumericalError, PositivityError, RegimeError,
                     SymmetryViolated, ValidationError)
from .lattice import NS_TOL, SystemParams

Phase = Literal["SD", "SDR", "NSD"]


def _check_T(T):
    if not np.isfinite(T) or T < 0:
        raise ValidationError(f"temperature must be >= 0, got {T}")


def _check_symmetric(params: SystemParams):
    w1, _, w3 = params.omega_sq
    if abs(w1 - w3) > NS_TOL * max(1.0, w1):
        raise SymmetryViolated("closed forms need w1 = w3")
    if abs(params.l12 - params.l23) > NS_TOL * max(1.0, abs(params.l12)):
        raise SymmetryViolated("closed forms need l12 = l23")
    if abs(params.l13) > NS_TOL:
        raise SymmetryViolated("closed forms assume an open chain (l13 = 0)")
    if not np.allclose(params.bath_weights, 1.0, rtol=0, atol=NS_TOL):
        raise SymmetryViolated("closed forms assume equal bath weights")


@dataclass(frozen=True)
class OneModeNsSpec:
    """Symmetric open chain with the antisymmetric mode (1, 0, -1) protected."""

    omega: float
    omega2: float
    lam: float

    def __post_init__(self):
        for name in ("omega", "omega2", "lam"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.omega <= 0 or self.omega2 <= 0:
            raise ValidationError("frequencies must be positive")
        if self.lam == 0:
            raise ValidationError("lam = 0 decouples the chain")
        if self.Omega_sq[1] <= 0:
            raise PositivityError("coupling too strong: Hamiltonian not positive definite")
        # On the two-mode manifold one of the symmetric modes is also protected.
        w2 = self.omega ** 2
        if np.min(np.abs(self.Omega_sq - w2 + 2 * self.lam)) <= NS_TOL * max(1.0, w2):
            raise RegimeError("lam = omega**2 - omega2**2 protects a second mode; "
                              "use TwoModeNsSpec")

    @classmethod
    def from_params(cls, params: SystemParams) -> "OneModeNsSpec":
        _check_symmetric(params)
        w = np.sqrt(params.omega_sq)
        return cls(w[0], w[1], params.l12)

    def to_params(self) -> SystemParams:
        return SystemParams.open_chain(self.omega, self.omega2, self.omega, self.lam)

    @property
    def Omega_sq(self):
        """Squared frequencies of the two dissipative modes, (plus, minus)."""
        mid = (self.omega ** 2 + self.omega2 ** 2) / 2
        root = np.sqrt(((self.omega2 ** 2 - self.omega ** 2) / 2) ** 2 + 2 * self.lam ** 2)
        return np.array([mid + root, mid - root])

    @property
    def Omega(self):
        return np.sqrt(self.Omega_sq)

    @property
    def c_sq(self):
        """Squared normalisations of ``(lam, Omega**2 - omega**2, lam)``."""
        return 1.0 / (2 * self.lam ** 2 + (self.Omega_sq - self.omega ** 2) ** 2)


@dataclass(frozen=True)
class TwoModeNsSpec:
    """Symmetric open chain with ``lam = omega**2 - omega2**2``; only the
    centre of mass (1, 1, 1) dissipates."""

    omega: float
    omega2: float

    def __post_init__(self):
        for name in ("omega", "omega2"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v <= 0:
                raise ValidationError(f"{name} must be positive")
            object.__setattr__(self, name, v)
        w, w2 = self.omega ** 2, self.omega2 ** 2
        if not (2 * w2 > w and 2 * w > w2):
            raise RegimeError("closed form needs 2 omega2**2 > omega**2 and "
                              "2 omega**2 > omega2**2")

    @classmethod
    def from_params(cls, params: SystemParams) -> "TwoModeNsSpec":
        _check_symmetric(params)
        w1, w2, _ = params.omega_sq
        lam0 = w1 - w2
        if abs(params.l12 - lam0) > NS_TOL * max(1.0, w1):
            raise RegimeError(f"l12 = {params.l12} is not omega**2 - omega2**2 = {lam0}")
        return cls(np.sqrt(w1), np.sqrt(w2))

    def to_params(self) -> SystemParams:
        return SystemParams.open_chain(self.omega, self.omega2, self.omega, self.lam)

    @property
    def lam(self):
        return self.omega ** 2 - self.omega2 ** 2

    @property
    def Omega_delta(self):
        return self.omega

    @property
    def Omega_eps(self):
        return np.sqrt(2 * self.omega2 ** 2 - self.omega ** 2)

    @property
    def Omega_cm(self):
        return np.sqrt(2 * self.omega ** 2 - self.omega2 ** 2)


NsSpec = Union[OneModeNsSpec, TwoModeNsSpec]


class CriticalSqueezings(NamedTuple):
    r0_plus: float
    r0_minus: float
    r_c: float


class Extremes(NamedTuple):
    E0: float
    dE: float


class OneModeEntanglement(NamedTuple):
    E_N: np.ndarray
    E0: float
    dE: float


def sigma_coefficients(spec: NsSpec, T: float):
    """Bath-induced variances ``(sigma_Q, sigma_P)`` of the dissipative modes."""
    _check_T(T)
    if isinstance(spec, TwoModeNsSpec):
        Oc = spec.Omega_cm
        c = float(coth_factor(Oc, T))
        return spec.omega / (6 * Oc) * c, Oc / (6 * spec.omega) * c
    Om = spec.Omega
    weight = spec.c_sq * coth_factor(Om, T)
    sQ = float(np.sum(spec.omega / (2 * Om) * weight))
    sP = float(np.sum(Om / (2 * spec.omega) * weight))
    return sQ, sP


def critical_squeezings(spec: OneModeNsSpec, T: float) -> CriticalSqueezings:
    if not isinstance(spec, OneModeNsSpec):
        raise ValidationError("critical squeezings are defined for one protected mode")
    sQ, sP = sigma_coefficients(spec, T)
    l2 = 4 * spec.lam ** 2
    rp = 0.5 * np.log(l2 * sQ)
    rm = -0.5 * np.log(l2 * sP)
    return CriticalSqueezings(float(rp), float(rm), float((rp + rm) / 4))


def one_mode_g(spec: OneModeNsSpec, r, T):
    """``(G0, G1)`` such that the relevant invariant is ``G0 + G1 cos(2 omega t)``."""
    sQ, sP = sigma_coefficients(spec, T)
    r = np.asarray(r, dtype=float)
    return (sQ + sP) * np.cosh(2 * r), (sQ - sP) * np.sinh(2 * r)


def one_mode_nu(spec: OneModeNsSpec, r, T, t):
    """Asymptotic smallest partially transposed symplectic eigenvalue of the
    outer pair, equal squeezing ``r`` on oscillators 1 and 3."""
    sQ, sP = sigma_coefficients(spec, T)
    G0, G1 = one_mode_g(spec, r, T)
    X = G0 + G1 * np.cos(2 * spec.omega * np.asarray(t, dtype=float))
    root = np.sqrt(np.clip(X * X - 4 * sP * sQ, 0, None))
    # X - root loses precision for large X; use the product form instead
    nu2 = 2 * spec.lam ** 2 * 4 * sP * sQ / (X + root)
    out = np.sqrt(nu2)
    return float(out) if out.ndim == 0 else out


def _one_mode_extremes(spec, r, T):
    if r < 0:
        raise ValidationError("squeezing r must be >= 0")
    rp, rm, rc = critical_squeezings(spec, T)
    if r >= 2 * rc:
        return Extremes(r - rp, 2 * rc)
    return Extremes(rm - r, float(r))


def one_mode_entanglement(spec: OneModeNsSpec, r: float, T: float, t,
                          form: Literal["exact", "harmonic"] = "exact"
                          ) -> OneModeEntanglement:
    """Asymptotic log-negativity of the outer pair and its extremes.

    ``E0`` is the minimum of ``-ln nu`` over a period and ``E0 + 2 dE`` the
    maximum. ``form="exact"`` evaluates ``-ln nu(t)`` itself; ``"harmonic"``
    returns the interpolation ``E0 + dE (1 + cos 2 omega t)``, which shares
    the extremes but not the shape in between.
    """
    E0, dE = _one_mode_extremes(spec, r, T)
    t = np.asarray(t, dtype=float)
    if form == "exact":
        raw = -np.log(one_mode_nu(spec, r, T, t))
    elif form == "harmonic":
        raw = E0 + dE * (1 + np.cos(2 * spec.omega * t))
    else:
        raise ValidationError(f"unknown form {form!r}")
    E = np.maximum(0.0, raw)
    return OneModeEntanglement(float(E) if E.ndim == 0 else E, E0, dE)


def phase_classify(E0: float, dE: float) -> Phase:
    """NSD if ``E0 > 0``; SDR if ``E0 <= 0 < E0 + 2 dE``; SD otherwise."""
    if E0 > 0:
        return "NSD"
    if E0 + 2 * dE > 0:
        return "SDR"
    return "SD"


def _two_mode_terms(spec: TwoModeNsSpec, r, T):
    w, w2, Oe = spec.omega, spec.omega2, spec.Omega_eps
    sQ, sP = sigma_coefficients(spec, T)
    ep, em = np.exp(2 * r), np.exp(-2 * r)
    a = ep * (2 * w2 + w) / Oe ** 2
    b = em * (2 * w + w2) / (w * w2)
    Jp, Jm = (a + b) / (12 * w), (a - b) / (12 * w)
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    A0 = ch * (4 * (sQ + sP) + 2 / 3 * Jp * (Oe ** 2 + w ** 2))
    B0 = (64 * sP * sQ + 4 / 81 * (2 * w + w2) * (2 * w2 + w) / (w * w2)
          + 32 / 3 * Jp * (w ** 2 * sP + Oe ** 2 * sQ))
    return dict(w=w, Oe=Oe, sQ=sQ, sP=sP, Jp=Jp, Jm=Jm, ch=ch, sh=sh, A0=A0, B0=B0)


def _two_mode_nu_angles(c, th1, th2):
    """``nu`` as a function of the phases ``th1 = 2 omega t`` and
    ``th2 = 2 Omega_eps t``."""
    w, Oe = c["w"], c["Oe"]
    c1, c2 = np.cos(th1), np.cos(th2)
    A1 = (4 * c1 * c["sh"] * (c["sQ"] - c["sP"])
          + 2 / 3 * c["Jp"] * c1 * c["sh"] * (w ** 2 - Oe ** 2)
          + 2 / 3 * c["Jm"] * c2 * c["ch"] * (Oe ** 2 - w ** 2)
          - 1 / 3 * c["Jm"] * c["sh"] * ((Oe + w) ** 2 * np.cos(th2 - th1)
                                          + (Oe - w) ** 2 * np.cos(th2 + th1)))
    B1 = 32 / 3 * c["Jm"] * c2 * (Oe ** 2 * c["sQ"] - w ** 2 * c["sP"])
    X = c["A0"] + A1
    B = c["B0"] + B1
    disc = X * X - B
    if np.any(disc < -1e-12 * np.max(X * X)):
        raise NumericalError("negative discriminant in the two-mode closed form")
    nu2 = B / (2 * (X + np.sqrt(np.clip(disc, 0, None))))
    return np.sqrt(nu2)


def two_mode_nu(spec: TwoModeNsSpec, r: float, T: float, t):
    """Asymptotic smallest partially transposed symplectic eigenvalue of the
    outer pair, equal squeezing ``r`` on all three oscillators."""
    c = _two_mode_terms(spec, r, T)
    t = np.asarray(t, dtype=float)
    out = _two_mode_nu_angles(c, 2 * spec.omega * t, 2 * spec.Omega_eps * t)
    return float(out) if out.ndim == 0 else out


def _two_mode_extremes(spec, r, T, grid=96):
    c = _two_mode_terms(spec, r, T)
    th = np.linspace(0, 2 * np.pi, grid, endpoint=False)
    T1, T2 = np.meshgrid(th, th, indexing="ij")
    E = -np.log(_two_mode_nu_angles(c, T1, T2))

    def refine(sign, idx):
        x0 = np.array([T1.flat[idx], T2.flat[idx]])
        f = lambda x: sign * float(-np.log(_two_mode_nu_angles(c, x[0], x[1])))
        res = minimize(f, x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
        return min(sign * E.flat[idx], res.fun) * sign

    lo = refine(1.0, int(np.argmin(E)))
    hi = refine(-1.0, int(np.argmax(E)))
    return Extremes(float(lo), float((hi - lo) / 2))


def entanglement_extremes(spec: NsSpec, r: float, T: float) -> Extremes:
    """``(E0, dE)``: minimum of the asymptotic ``-ln nu`` and half its range.

    For two protected modes the phases ``2 omega t`` and ``2 Omega_eps t``
    are treated as independent, which is the long-time envelope when the
    frequencies are incommensurate.
    """
    _check_T(T)
    if isinstance(spec, TwoModeNsSpec):
        if r < 0:
            raise ValidationError("squeezing r must be >= 0")
        return _two_mode_extremes(spec, r, T)
    return _one_mode_extremes(spec, r, T)


def spec_from_params(params: SystemParams) -> NsSpec:
    """One- or two-mode closed-form spec for a symmetric open chain."""
    _check_symmetric(params)
    w1, w2, _ = params.omega_sq
    if abs(params.l12 - (w1 - w2)) <= NS_TOL * max(1.0, w1):
        return TwoModeNsSpec.from_params(params)
    return OneModeNsSpec.from_params(params)

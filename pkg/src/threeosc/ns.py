"""Noiseless-subsystem (NS) conditions for the three-oscillator chain.

A normal mode is protected when its effective coupling vanishes, i.e. its
mode vector lies in the plane ``x + y + z = 0`` (unit bath weights). The
closed forms here locate such modes analytically; diagonalisation in
:mod:`threeosc.lattice` remains the authoritative test.

Configuration labels follow the usual catalogue of chains:

====  ==========================================================
a     ``w1 = w3``, ``l12 = l23`` (open or closed chain)
b     ``w1 = w3``, ``w2**2`` tuned to ``omega2_tilde``
c     ``l12 = l23 = lambda_pm``, open chain (``l13 = 0``)
d     ``l12 = l23 = lambda_pm``, closed chain
e     ``w1 = w3``, ``l12 = l23 = lambda_0``, open chain (two modes)
f     ``w1 = w3``, ``l12 = l23 = lambda_0``, closed chain (two modes)
====  ==========================================================
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import (BranchUndefined, NonPhysical, NotOnManifold,
                     NumericalError, PositivityError, SymmetryViolated,
                     ValidationError)
from .lattice import (NS_TOL, SystemParams, build_hamiltonian,
                      kappa_tolerance, normal_modes)

Branch = Literal["plus", "minus"]
CONFIG_LABELS = ("a", "b", "c", "d", "e", "f")

_SIGN = {"plus": 1.0, "minus": -1.0}


@dataclass(frozen=True)
class DeltaMode:
    omega_delta_sq: float
    vector: np.ndarray  # unnormalised
    c: float            # normalisation constant

    @property
    def unit_vector(self):
        return self.c * self.vector


@dataclass(frozen=True)
class NsReport:
    kappa: tuple
    residual: float
    Delta: float
    Sigma: float
    R: dict
    ns_mode_count: int
    config_label: Optional[str]

    def as_dict(self):
        return {"kappa": list(self.kappa), "residual": self.residual,
                "Delta": self.Delta, "Sigma": self.Sigma,
                "R_plus": self.R.get("plus"), "R_minus": self.R.get("minus"),
                "ns_mode_count": self.ns_mode_count,
                "config_label": self.config_label or "none"}


def _close(a, b, tol=NS_TOL):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _branch_sign(branch):
    try:
        return _SIGN[branch]
    except KeyError:
        raise ValidationError(f"branch must be 'plus' or 'minus', got {branch!r}")


def delta_sigma(params: SystemParams):
    w1, w2, w3 = params.omega_sq
    return (w1 - w3) / 2, (w1 + w3) / 2 - w2


def r_branch(params: SystemParams, branch: Branch) -> float:
    """Shift of the candidate protected frequency, ``Omega_d**2 - (w1**2+w3**2)/2``."""
    sign = _branch_sign(branch)
    Delta, _ = delta_sigma(params)
    l12, l13, l23 = params.l12, params.l13, params.l23
    s = (l12 + l23) / 2
    arg = (Delta + s - l13) ** 2 + 2 * Delta * (l13 - l12)
    if arg < 0:
        raise BranchUndefined(f"negative radicand {arg:.6g} in branch {branch}")
    return -s + sign * np.sqrt(arg)


def _plane_rows(params, R):
    """Eigen-equations restricted to the plane x + y + z = 0, in unknowns (x, z)."""
    Delta, Sigma = delta_sigma(params)
    l12, l13, l23 = params.l12, params.l13, params.l23
    row1 = (Delta - R - l12, l13 - l12)
    row2 = (l12 + R + Sigma, l23 + R + Sigma)
    row3 = (l13 - l23, -Delta - R - l23)
    return row1, row2, row3


def constraint_residual(params: SystemParams, branch: Branch) -> float:
    """Compatibility residual for a zero-coupling mode on one branch.

    The outer oscillators' equations fix the candidate frequency; the
    residual is the 2x2 minor pairing the central oscillator's equation with
    the better-conditioned outer one. It vanishes iff a mode with
    ``x + y + z = 0`` exists at that frequency.
    """
    build_hamiltonian(params)
    R = r_branch(params, branch)
    row1, row2, row3 = _plane_rows(params, R)
    outer = row1 if np.hypot(*row1) >= np.hypot(*row3) else row3
    return float(outer[0] * row2[1] - row2[0] * outer[1])


def _residual_tol(params):
    scale = max(1.0, max(abs(v) for v in params.omega_sq + params.couplings))
    return NS_TOL * scale ** 2


def _null_vector(M):
    """Null vector of a rank-2 3x3 matrix from the best-conditioned row pair."""
    rows = [np.cross(M[0], M[1]), np.cross(M[0], M[2]), np.cross(M[1], M[2])]
    return max(rows, key=np.linalg.norm)


def delta_mode(params: SystemParams, branch: Branch) -> DeltaMode:
    """Frequency and shape of the protected mode on the given branch."""
    residual = constraint_residual(params, branch)
    if abs(residual) > _residual_tol(params):
        raise NotOnManifold(f"constraint residual {residual:.3e} on branch {branch}",
                            residual)
    w1, _, w3 = params.omega_sq
    omega_sq = (w1 + w3) / 2 + r_branch(params, branch)
    if omega_sq <= 0:
        raise NonPhysical(f"protected mode frequency squared {omega_sq:.6g} <= 0")
    H = build_hamiltonian(params)
    v = _null_vector(H - omega_sq * np.eye(3))
    norm = np.linalg.norm(v)
    if norm == 0:
        raise NumericalError("eigen-system fully degenerate at the protected frequency")
    return DeltaMode(omega_delta_sq=float(omega_sq), vector=v, c=1.0 / norm)


def two_mode_check(params: SystemParams):
    """``(True, Omega_CM)`` when the centre of mass is a normal mode.

    Then the two remaining modes are orthogonal to (1, 1, 1) and decouple
    from a uniformly weighted bath.
    """
    w1, w2, w3 = params.omega_sq
    l12, l13, l23 = params.l12, params.l13, params.l23
    cm_sq = w1 + w3 - w2 + 2 * l13
    ok = (_close(w1, w2 + l23 - l13) and _close(w3, w2 + l12 - l13)
          and cm_sq > 0)
    return ok, (float(np.sqrt(cm_sq)) if ok else None)


def _require_outer_symmetry(params):
    w1, _, w3 = params.omega_sq
    if not _close(w1, w3):
        raise SymmetryViolated("requires equal outer frequencies (w1 == w3)")


def omega2_tilde_sq(params: SystemParams) -> float:
    _require_outer_symmetry(params)
    l12, l13, l23 = params.l12, params.l13, params.l23
    denom = l12 + l23 - 2 * l13
    if denom == 0:
        raise NonPhysical("l12 + l23 - 2 l13 = 0: tuned central frequency undefined")
    return params.omega_sq[0] + 2 * (l23 - l13) * (l13 - l12) / denom


def lambda0_tilde(params: SystemParams) -> float:
    _require_outer_symmetry(params)
    w, w2 = params.omega_sq[0], params.omega_sq[1]
    return w - w2 + params.l13


def lambda_pm_tilde(params: SystemParams):
    w1, w2, w3 = params.omega_sq
    prod = (w2 - w1) * (w2 - w3)
    if prod < 0:
        raise NonPhysical("(w2^2 - w1^2)(w2^2 - w3^2) < 0: no real lambda_pm")
    root = np.sqrt(prod)
    return params.l13 + root, params.l13 - root


def _check_tuned(params, two_modes=False):
    try:
        modes = normal_modes(params)
    except PositivityError as exc:
        raise NonPhysical(f"tuned system not positive definite: {exc}") from exc
    need = 2 if two_modes else 1
    if modes.ns_mode_count < need:
        raise NumericalError(
            f"tuned parameters failed re-validation (kappa={modes.kappa})")
    return params


def tuned_parameters(params: SystemParams, target: str,
                     branch: Optional[Branch] = None):
    """Tuned value(s) placing ``params`` on an NS manifold.

    ``target``:
      * ``"omega2"`` -> tuned central squared frequency ``omega2_tilde**2``;
      * ``"lambda0"`` -> common coupling ``l12 = l23`` giving a two-mode NS;
      * ``"lambda_pm"`` -> ``(lambda_plus, lambda_minus)``, or the single
        value selected by ``branch``.

    Every returned value is re-validated by diagonalisation.
    """
    if target == "omega2":
        w2_sq = omega2_tilde_sq(params)
        if w2_sq <= 0:
            raise NonPhysical(f"tuned omega2^2 = {w2_sq:.6g} <= 0")
        om = params.omega_sq
        _check_tuned(params.replace(omega_sq=(om[0], w2_sq, om[2])))
        return w2_sq
    if target == "lambda0":
        lam = lambda0_tilde(params)
        _check_tuned(params.replace(l12=lam, l23=lam), two_modes=True)
        return lam
    if target == "lambda_pm":
        if not _close(params.l12, params.l23):
            raise SymmetryViolated("lambda_pm tuning requires l12 == l23")
        plus, minus = lambda_pm_tilde(params)
        values = {"plus": plus, "minus": minus}
        chosen = [branch] if branch else ["plus", "minus"]
        for b in chosen:
            _branch_sign(b)
            _check_tuned(params.replace(l12=values[b], l23=values[b]))
        if branch:
            return values[branch]
        return plus, minus
    raise ValidationError(f"unknown tuning target {target!r}")


def place_on_manifold(params: SystemParams, config: str,
                      branch: Branch = "plus") -> SystemParams:
    """Return a copy of ``params`` adjusted onto configuration ``config``.

    Outer frequency ``w3`` is set to ``w1`` where the configuration needs it;
    the remaining free parameters are kept.
    """
    om = params.omega_sq
    sym = params.replace(omega_sq=(om[0], om[1], om[0]))
    if config == "a":
        return sym.replace(l23=params.l12)
    if config == "b":
        w2_sq = tuned_parameters(sym, "omega2")
        return sym.replace(omega_sq=(om[0], w2_sq, om[0]))
    if config in ("c", "d"):
        base = params.replace(l23=params.l12)
        if config == "c":
            base = base.replace(l13=0.0)
        lam = tuned_parameters(base, "lambda_pm", branch=branch)
        return base.replace(l12=lam, l23=lam)
    if config in ("e", "f"):
        base = sym.replace(l13=0.0) if config == "e" else sym
        lam = tuned_parameters(base, "lambda0")
        return base.replace(l12=lam, l23=lam)
    raise ValidationError(f"unknown configuration {config!r}")


def classify(params: SystemParams) -> Optional[str]:
    """Catalogue label of the configuration, or None.

    Two-mode labels win over one-mode labels.
    """
    try:
        build_hamiltonian(params)
    except PositivityError:
        return None
    w1, w2, w3 = params.omega_sq
    l12, l13, l23 = params.l12, params.l13, params.l23
    outer_equal = _close(w1, w3)
    couplings_equal = _close(l12, l23)
    open_chain = abs(l13) <= NS_TOL
    if outer_equal and couplings_equal and two_mode_check(params)[0]:
        return "e" if open_chain else "f"
    if outer_equal and couplings_equal:
        return "a"
    if outer_equal and l12 + l23 - 2 * l13 != 0 and _close(w2, omega2_tilde_sq(params)):
        return "b"
    if couplings_equal and (w2 - w1) * (w2 - w3) >= 0:
        if any(_close(l12, lam) for lam in lambda_pm_tilde(params)):
            return "c" if open_chain else "d"
    return None


def ns_report(params: SystemParams) -> NsReport:
    modes = normal_modes(params)
    Delta, Sigma = delta_sigma(params)
    R, residuals = {}, []
    for b in ("plus", "minus"):
        try:
            R[b] = float(r_branch(params, b))
            residuals.append(constraint_residual(params, b))
        except BranchUndefined:
            R[b] = None
    residual = min(residuals, key=abs) if residuals else float("nan")
    return NsReport(kappa=tuple(float(k) for k in modes.kappa),
                    residual=float(residual), Delta=Delta, Sigma=Sigma, R=R,
                    ns_mode_count=modes.ns_mode_count,
                    config_label=classify(params))


def ns_tolerance(params: SystemParams) -> float:
    return kappa_tolerance(params.bath_weights)

"""Command-line experiment runner.

All frequencies and couplings are in units of the central oscillator
frequency (``--omega2 1`` unless stated), times in its inverse. Frequencies
are given plainly (``--omega1 1.3``), couplings as entries of the potential
matrix.

Subcommands and their CSV columns:

  modes          mode, Omega_sq, Omega, kappa, Gamma, protected, F1, F2, F3
  ns-check       kappa1..3, residual, Delta, Sigma, R_plus, R_minus,
                 ns_mode_count, config_label
  tune           branch, value, omega1, omega2, omega3, l12, l13, l23,
                 ns_mode_count, config_label
  evolve         t, EN_12, EN_13, EN_23, physical, mean_*, cov_i_j (i <= j)
  phase-diagram  r, T, E0, dE, phase, r0_plus, r0_minus, two_r_c, half_gap
  decay-map      omega1, omega3, R, ns_mode_count, status
  sync-map       omega1, omega3, t_eval, C_abs, status
  series         t, then the requested observables (and *_smooth columns)

Every file written with ``--out`` gets a ``<out>.manifest.json`` side-car
holding the resolved configuration; ``--config <manifest>`` re-runs it.
Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (OneModeNsSpec, critical_squeezings,
                          entanglement_extremes, phase_classify, spec_from_params)
from .correlations import (DegenerateError, TimeSeries, gaussian_discord,
                           gaussian_smooth, log_negativity, min_symplectic_eig,
                           reduce_pair_matrix, sync_from_samples)
from .dynamics import mme_coefficients, natural_series, squeezed_vacuum
from .errors import (NotOnManifold, NumericalError, PositivityError,
                     SymmetryViolated, ValidationError)
from .gaussian import symplectic_eigenvalues
from .lattice import BathParams, SystemParams, decay_ratio, normal_modes
from .ns import classify, ns_report, place_on_manifold, tuned_parameters

COMMANDS = ("modes", "ns-check", "tune", "evolve", "phase-diagram",
            "decay-map", "sync-map", "series")
OBSERVABLES = ("q2", "p2", "EN", "discord")
# keys that do not change the produced data
_NOT_RECORDED = {"config", "out", "workers"}


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    steps: int
    scale: str = "linear"

    def __post_init__(self):
        if self.steps < 2:
            raise ValidationError(f"axis {self.name}: steps must be >= 2")
        if not (math.isfinite(self.min) and math.isfinite(self.max)) or self.max <= self.min:
            raise ValidationError(f"axis {self.name}: need min < max")
        if self.scale not in ("linear", "log"):
            raise ValidationError(f"axis {self.name}: scale must be linear or log")
        if self.scale == "log" and self.min <= 0:
            raise ValidationError(f"axis {self.name}: log scale needs min > 0")

    @classmethod
    def parse(cls, name, text):
        parts = str(text).split(":")
        if len(parts) not in (3, 4):
            raise ValidationError(f"axis {name}: expected min:max:steps[:scale], got {text!r}")
        try:
            lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ValidationError(f"axis {name}: cannot parse {text!r}") from None
        return cls(name, lo, hi, steps, parts[3] if len(parts) == 4 else "linear")

    def values(self):
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.steps)
        return np.linspace(self.min, self.max, self.steps)


@dataclass
class SweepSpec:
    command: str
    axes: list
    fixed: dict
    bath: dict
    observable: str
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")


@dataclass
class RunManifest:
    config: dict
    version: str
    grid: list
    timing: dict
    output: dict = field(default_factory=dict)

    def write(self, path):
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- parsing

def _floats(value, n=None, name="value"):
    if isinstance(value, (list, tuple)):
        items = list(value)
    elif isinstance(value, (int, float)):
        items = [value]
    else:
        items = [v for v in str(value).split(",") if v.strip()]
    try:
        out = [float(v) for v in items]
    except ValueError:
        raise ValidationError(f"{name}: cannot parse {value!r}") from None
    if n is not None:
        if len(out) == 1:
            out = out * n
        if len(out) != n:
            raise ValidationError(f"{name}: expected {n} values, got {len(out)}")
    return out


def _pairs(value):
    items = value if isinstance(value, list) else str(value).split(",")
    pairs = []
    for item in items:
        s = str(item).strip()
        if len(s) != 2 or not s.isdigit():
            raise ValidationError(f"pair must look like 13, got {item!r}")
        i, j = int(s[0]), int(s[1])
        if i == j or not {i, j} <= {1, 2, 3}:
            raise ValidationError(f"invalid pair {s}")
        pairs.append((i, j))
    return pairs


def _add_system(p, omega=(1.0, 1.0, 1.0), lam=None):
    g = p.add_argument_group("system (units of omega2)")
    g.add_argument("--omega1", type=float, default=omega[0])
    g.add_argument("--omega2", type=float, default=omega[1])
    g.add_argument("--omega3", type=float, default=omega[2])
    g.add_argument("--lam", type=float, default=lam,
                   help="sets l12 = l23 (overrides --l12/--l23)")
    g.add_argument("--l12", type=float, default=0.0)
    g.add_argument("--l13", type=float, default=0.0)
    g.add_argument("--l23", type=float, default=0.0)
    g.add_argument("--weights", default="1,1,1", help="bath weights g1,g2,g3")


def _add_bath(p):
    g = p.add_argument_group("bath")
    g.add_argument("--T", type=float, default=10.0, help="temperature")
    g.add_argument("--gamma", type=float, default=0.07, help="system-bath coupling")
    g.add_argument("--cutoff", type=float, default=50.0, help="Ohmic cutoff")


def _add_output(p):
    g = p.add_argument_group("output")
    g.add_argument("--config", help="JSON file (or run manifest) with option values")
    g.add_argument("--out", help="output path (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="threeosc",
        description="Three oscillators in a common bath. Frequencies in units of omega2.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["modes"] = sub.add_parser("modes", help="normal modes and couplings")
    _add_system(p)
    _add_bath(p)

    p = subs["ns-check"] = sub.add_parser("ns-check", help="noiseless-subsystem diagnostics")
    _add_system(p)

    p = subs["tune"] = sub.add_parser("tune", help="tune parameters onto an NS manifold")
    _add_system(p)
    p.add_argument("--target", choices=("omega2", "lambda0", "lambda_pm"))
    p.add_argument("--branch", choices=("plus", "minus"))
    p.add_argument("--place", choices=tuple("abcdef"),
                   help="adjust onto catalogue configuration instead of --target")

    p = subs["evolve"] = sub.add_parser("evolve", help="state at one time")
    _add_system(p)
    _add_bath(p)
    p.add_argument("--r", default="2,2.5,3", help="initial squeezings r1,r2,r3")
    p.add_argument("--t", type=float, default=100.0)

    p = subs["phase-diagram"] = sub.add_parser(
        "phase-diagram", help="asymptotic E0 and SD/SDR/NSD phase over (r, T)")
    _add_system(p, omega=(1.0, 1.2, 1.0), lam=0.6)
    p.add_argument("--r-axis", default="0:1.5:200")
    p.add_argument("--T-axis", default="0:2:200")

    p = subs["decay-map"] = sub.add_parser("decay-map", help="decay-rate ratio over (omega1, omega3)")
    _add_system(p, lam=0.4)
    p.add_argument("--omega1-axis", default="1:2:200")
    p.add_argument("--omega3-axis", default="1:2:200")
    p.add_argument("--overlays", help="CSV path for the manifold curves "
                   "(default <out>.overlays.csv)")

    p = subs["sync-map"] = sub.add_parser("sync-map", help="synchronisation over (omega1, omega3)")
    _add_system(p, lam=0.4)
    _add_bath(p)
    p.add_argument("--omega1-axis", default="1:2:200")
    p.add_argument("--omega3-axis", default="1:2:200")
    p.add_argument("--pair", default="13")
    p.add_argument("--r", default="2,2.5,3")
    p.add_argument("--t-max", type=float, default=5000.0)
    p.add_argument("--window", type=float, default=15.0)
    p.add_argument("--dt", type=float, default=0.02)

    p = subs["series"] = sub.add_parser("series", help="observables versus time")
    _add_system(p)
    _add_bath(p)
    p.add_argument("--r", default="2,2.5,3")
    p.add_argument("--t-max", type=float, default=200.0)
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--observables", default="q2,p2,EN,discord",
                   help="subset of " + ",".join(OBSERVABLES))
    p.add_argument("--pairs", default="12,13,23")
    p.add_argument("--measured", choices=("A", "B"), default="B",
                   help="party measured in the discord")
    p.add_argument("--smooth", type=float, default=5.0,
                   help="width of the Gaussian filter for the extra smoothed columns "
                        "(0 disables)")
    p.add_argument("--smooth-observables", default="discord",
                   help="observables that get a smoothed column")

    for p in subs.values():
        _add_output(p)
    return parser, subs


def _load_config(path):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        data = data["config"]
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_args(argv=None):
    """Parse ``argv``; values from ``--config`` fill in for flags not given."""
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        data = _load_config(args.config)
        command = data.pop("command", args.command)
        if command != args.command:
            raise ValidationError(f"config is for {command!r}, not {args.command!r}")
        sp = subs[args.command]
        known = {a.dest for a in sp._actions}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        sp.set_defaults(**data)
        args = parser.parse_args(argv)
    return args


def resolve(args) -> dict:
    """Flat, JSON-serialisable configuration with ``--lam`` folded in."""
    cfg = {k: v for k, v in vars(args).items() if k not in _NOT_RECORDED}
    if cfg.get("lam") is not None:
        cfg["l12"] = cfg["l23"] = float(cfg["lam"])
    if "lam" in cfg:
        # recorded as None so a manifest replay keeps the folded couplings
        cfg["lam"] = None
    if "weights" in cfg:
        cfg["weights"] = _floats(cfg["weights"], 3, "weights")
    if "r" in cfg:
        cfg["r"] = _floats(cfg["r"], 3, "r")
    return cfg


def _system(cfg, **override) -> SystemParams:
    c = dict(cfg, **override)
    om = (c["omega1"], c["omega2"], c["omega3"])
    if any(not w > 0 for w in om):
        raise ValidationError("frequencies must be positive")
    return SystemParams.from_frequencies(om, c["l12"], c["l13"], c["l23"], tuple(c["weights"]))


def _bath(cfg) -> BathParams:
    return BathParams(T=cfg["T"], gamma=cfg["gamma"], cutoff=cfg["cutoff"])


# ---------------------------------------------------------------- workers

def _pool_map(func, items, workers):
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [func(x) for x in items]
    chunk = max(1, len(items) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunk))


def _phase_cell(spec, item):
    r, T = item
    E0, dE = entanglement_extremes(spec, r, T)
    if isinstance(spec, OneModeNsSpec):
        rp, rm, rc = critical_squeezings(spec, T)
        extra = (rp, rm, 2 * rc, (rp - rm) / 2)
    else:
        extra = (math.nan,) * 4
    return (r, T, E0, dE, phase_classify(E0, dE)) + extra


def _decay_cell(base, item):
    w1, w3 = item
    om = base.omega_sq
    try:
        modes = normal_modes(base.replace(omega_sq=(w1 ** 2, om[1], w3 ** 2)))
    except PositivityError:
        return (w1, w3, math.nan, 0, "nonphysical")
    return (w1, w3, decay_ratio(modes), modes.ns_mode_count, "ok")


def _sync_cell(base, bath, r, pair, t_max, window, dt, item):
    w1, w3 = item
    om = base.omega_sq
    try:
        params = base.replace(omega_sq=(w1 ** 2, om[1], w3 ** 2))
        modes = normal_modes(params)
    except PositivityError:
        return (w1, w3, math.nan, math.nan, "nonphysical")
    coeffs = mme_coefficients(modes, bath)
    g0 = float(np.min(coeffs.Gamma))
    t_eval = t_max if g0 <= 0 else min(t_max, 1.0 / g0)
    n = max(32, int(round(window / dt)) + 1)
    times = np.linspace(t_eval, t_eval + window, n)
    state = squeezed_vacuum(params.omega_sq, r)
    _, covs = natural_series(state, modes, coeffs, times)
    i, j = pair
    try:
        C = sync_from_samples(times, covs[:, i - 1, i - 1], covs[:, j - 1, j - 1])
    except DegenerateError:
        return (w1, w3, t_eval, math.nan, "degenerate")
    return (w1, w3, t_eval, abs(C), "ok")


# ---------------------------------------------------------------- commands

def cmd_modes(cfg):
    params = _system(cfg)
    modes = normal_modes(params)
    coeffs = mme_coefficients(modes, _bath(cfg))
    cols = ["mode", "Omega_sq", "Omega", "kappa", "Gamma", "protected", "F1", "F2", "F3"]
    rows = []
    for n in range(3):
        F = modes.F[:, n]
        rows.append([n, modes.Omega_sq[n], modes.Omega[n], modes.kappa[n], coeffs.Gamma[n],
                     bool(modes.protected[n]), F[0], F[1], F[2]])
    return cols, rows, [3], {}


def cmd_ns_check(cfg):
    rep = ns_report(_system(cfg)).as_dict()
    k = rep.pop("kappa")
    cols = ["kappa1", "kappa2", "kappa3", "residual", "Delta", "Sigma", "R_plus",
            "R_minus", "ns_mode_count", "config_label"]
    row = k + [rep[c] for c in cols[3:]]
    return cols, [row], [1], {}


def cmd_tune(cfg):
    params = _system(cfg)
    if cfg.get("place"):
        tuned = [(cfg.get("branch") or "", None,
                  place_on_manifold(params, cfg["place"], branch=cfg.get("branch") or "plus"))]
    elif cfg.get("target"):
        target, branch = cfg["target"], cfg.get("branch")
        value = tuned_parameters(params, target, branch=branch)
        om = params.omega_sq
        if target == "omega2":
            tuned = [("", value, params.replace(omega_sq=(om[0], value, om[2])))]
        elif target == "lambda0":
            tuned = [("", value, params.replace(l12=value, l23=value))]
        else:
            values = {branch: value} if branch else dict(zip(("plus", "minus"), value))
            tuned = [(b, v, params.replace(l12=v, l23=v)) for b, v in values.items()]
    else:
        raise ValidationError("tune needs --target or --place")
    cols = ["branch", "value", "omega1", "omega2", "omega3", "l12", "l13", "l23",
            "ns_mode_count", "config_label"]
    rows = []
    for branch, value, p in tuned:
        rows.append([branch, value, *p.omega, p.l12, p.l13, p.l23,
                     normal_modes(p).ns_mode_count, classify(p) or "none"])
    return cols, rows, [len(rows)], {}


def cmd_evolve(cfg):
    params = _system(cfg)
    modes = normal_modes(params)
    coeffs = mme_coefficients(modes, _bath(cfg))
    state = squeezed_vacuum(params.omega_sq, cfg["r"])
    if cfg["t"] < 0:
        raise ValidationError("t must be >= 0")
    means, covs = natural_series(state, modes, coeffs, np.array([cfg["t"]]))
    mean, cov = means[0], covs[0]
    labels = ["x1", "x2", "x3", "p1", "p2", "p3"]
    cols = ["t", "EN_12", "EN_13", "EN_23", "physical"]
    row = [cfg["t"]]
    for i, j in ((1, 2), (1, 3), (2, 3)):
        row.append(log_negativity(min_symplectic_eig(reduce_pair_matrix(cov, i, j))))
    row.append(bool(symplectic_eigenvalues(cov).min() >= 0.5 - 1e-9))
    cols += [f"mean_{a}" for a in labels]
    row += list(mean)
    for a in range(6):
        for b in range(a, 6):
            cols.append(f"cov_{labels[a]}_{labels[b]}")
            row.append(cov[a, b])
    return cols, [row], [1], {}


def _ns_spec(params):
    try:
        return spec_from_params(params)
    except SymmetryViolated as exc:
        w1, _, w3 = params.omega_sq
        residual = max(abs(w1 - w3), abs(params.l12 - params.l23), abs(params.l13))
        raise NotOnManifold(f"not a symmetric open-chain NS configuration "
                            f"(residual {residual:.3e}): {exc}",
                            residual) from None


def cmd_phase_diagram(cfg, workers=1):
    spec = _ns_spec(_system(cfg))
    r_ax = Axis.parse("r", cfg["r_axis"])
    T_ax = Axis.parse("T", cfg["T_axis"])
    if r_ax.min < 0 or T_ax.min < 0:
        raise ValidationError("r and T axes must be non-negative")
    cells = [(float(r), float(T)) for T in T_ax.values() for r in r_ax.values()]
    rows = _pool_map(partial(_phase_cell, spec), cells, workers)
    cols = ["r", "T", "E0", "dE", "phase", "r0_plus", "r0_minus", "two_r_c", "half_gap"]
    return cols, rows, [T_ax.steps, r_ax.steps], {}


def manifold_overlays(cfg, ax1: Axis, ax3: Axis):
    """Diagonal ``omega1 = omega3`` and the curve where ``lam`` equals a
    lambda_pm root: ``omega3**2 = omega2**2 - (lam - l13)**2 / (omega2**2 - omega1**2)``."""
    rows = []
    lo, hi = max(ax1.min, ax3.min), min(ax1.max, ax3.max)
    if hi > lo:
        for w in np.linspace(lo, hi, max(ax1.steps, ax3.steps)):
            rows.append(["diagonal", w, w])
    w2 = cfg["omega2"] ** 2
    lam = cfg["l12"] - cfg["l13"]
    for w1 in np.linspace(ax1.min, ax1.max, 4 * ax1.steps):
        d = w2 - w1 ** 2
        if d == 0:
            continue
        w3_sq = w2 - lam ** 2 / d
        if w3_sq > 0 and ax3.min <= math.sqrt(w3_sq) <= ax3.max:
            rows.append(["hyperbola", w1, math.sqrt(w3_sq)])
    return ["curve", "omega1", "omega3"], rows


def _map_base(cfg):
    """Parameters for (omega1, omega3) maps; the outer frequencies are
    replaced per cell."""
    return SystemParams((1.0, cfg["omega2"] ** 2, 1.0), cfg["l12"], cfg["l13"],
                        cfg["l23"], tuple(cfg["weights"]))


def _map_cells(ax1, ax3):
    return [(float(w1), float(w3)) for w1 in ax1.values() for w3 in ax3.values()]


def cmd_decay_map(cfg, workers=1):
    if abs(cfg["l12"] - cfg["l23"]) > 0:
        raise ValidationError("decay-map needs l12 = l23 (use --lam)")
    base = _map_base(cfg)
    ax1 = Axis.parse("omega1", cfg["omega1_axis"])
    ax3 = Axis.parse("omega3", cfg["omega3_axis"])
    rows = _pool_map(partial(_decay_cell, base), _map_cells(ax1, ax3), workers)
    cols = ["omega1", "omega3", "R", "ns_mode_count", "status"]
    return cols, rows, [ax1.steps, ax3.steps], {"overlays": manifold_overlays(cfg, ax1, ax3)}


def cmd_sync_map(cfg, workers=1):
    base = _map_base(cfg)
    bath = _bath(cfg)
    pair = _pairs(cfg["pair"])
    if len(pair) != 1:
        raise ValidationError("sync-map takes exactly one pair")
    if cfg["window"] <= 0 or cfg["dt"] <= 0 or cfg["t_max"] < 0:
        raise ValidationError("window and dt must be positive, t-max non-negative")
    if cfg["window"] / cfg["dt"] < 31:
        raise ValidationError("window must hold at least 32 samples")
    ax1 = Axis.parse("omega1", cfg["omega1_axis"])
    ax3 = Axis.parse("omega3", cfg["omega3_axis"])
    func = partial(_sync_cell, base, bath, tuple(cfg["r"]), pair[0], cfg["t_max"],
                   cfg["window"], cfg["dt"])
    rows = _pool_map(func, _map_cells(ax1, ax3), workers)
    cols = ["omega1", "omega3", "t_eval", "C_abs", "status"]
    return cols, rows, [ax1.steps, ax3.steps], {}


def time_grid(t_max, dt):
    if dt <= 0 or t_max < 0:
        raise ValidationError("dt must be positive and t-max non-negative")
    n = int(math.floor(t_max / dt + 1e-9)) + 1
    return dt * np.arange(n)


def series_columns(params, bath, r, times, observables, pairs, measured="B", smooth=None,
                   smooth_observables=("discord",)):
    """Observable columns for a squeezed-vacuum start; returns (names, arrays).

    Raw columns are always kept; ``smooth`` adds ``<name>_smooth`` columns
    for the observables in ``smooth_observables``.
    """
    unknown = set(observables) - set(OBSERVABLES)
    if unknown:
        raise ValidationError(f"unknown observables {sorted(unknown)}")
    modes = normal_modes(params)
    coeffs = mme_coefficients(modes, bath)
    _, covs = natural_series(squeezed_vacuum(params.omega_sq, r), modes, coeffs, times)
    names, data, kinds = [], [], []
    for obs in observables:
        if obs == "q2":
            for i in range(3):
                names.append(f"q{i + 1}_sq")
                data.append(covs[:, i, i])
                kinds.append(obs)
        elif obs == "p2":
            for i in range(3):
                names.append(f"p{i + 1}_sq")
                data.append(covs[:, i + 3, i + 3])
                kinds.append(obs)
        else:
            for i, j in pairs:
                V = reduce_pair_matrix(covs, i, j)
                if obs == "EN":
                    vals = np.atleast_1d(log_negativity(min_symplectic_eig(V)))
                else:
                    vals = np.atleast_1d(gaussian_discord(V, measured_party=measured))
                names.append(f"{obs}_{i}{j}")
                data.append(vals)
                kinds.append(obs)
    if smooth:
        for name, vals, kind in list(zip(names, data, kinds)):
            if kind not in smooth_observables:
                continue
            names.append(f"{name}_smooth")
            data.append(gaussian_smooth(TimeSeries(times, vals), smooth).values)
    return names, data


def _names(value):
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [o.strip() for o in str(value).split(",") if o.strip()]


def cmd_series(cfg):
    params = _system(cfg)
    times = time_grid(cfg["t_max"], cfg["dt"])
    obs = _names(cfg["observables"])
    if cfg["smooth"] is not None and cfg["smooth"] < 0:
        raise ValidationError("smoothing width must be >= 0")
    smooth_obs = _names(cfg["smooth_observables"])
    names, data = series_columns(params, _bath(cfg), cfg["r"], times, obs,
                                 _pairs(cfg["pairs"]), cfg["measured"], cfg["smooth"],
                                 smooth_obs)
    rows = np.column_stack([times] + data).tolist()
    return ["t"] + names, rows, [len(times)], {}


def sweep_spec(cfg, workers=1, output=None) -> SweepSpec:
    command = cfg["command"]
    axis_keys = {"phase-diagram": ("r_axis", "T_axis"),
                 "decay-map": ("omega1_axis", "omega3_axis"),
                 "sync-map": ("omega1_axis", "omega3_axis")}[command]
    axes = [asdict(Axis.parse(k[:-5], cfg[k])) for k in axis_keys]
    fixed = {k: cfg[k] for k in ("omega1", "omega2", "omega3", "l12", "l13", "l23", "weights")}
    bath = {k: cfg[k] for k in ("T", "gamma", "cutoff") if k in cfg}
    observable = {"phase-diagram": "E0", "decay-map": "R",
                  "sync-map": f"C_abs[{cfg.get('pair')}]"}[command]
    return SweepSpec(command, axes, fixed, bath, observable, output, workers)


_HANDLERS = {
    "modes": cmd_modes, "ns-check": cmd_ns_check, "tune": cmd_tune,
    "evolve": cmd_evolve, "phase-diagram": cmd_phase_diagram,
    "decay-map": cmd_decay_map, "sync-map": cmd_sync_map, "series": cmd_series,
}
_SWEEPS = {"phase-diagram", "decay-map", "sync-map"}


# ---------------------------------------------------------------- output

def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def to_csv(cols, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else None
    return v


def to_json(cols, rows, extra):
    doc = {"columns": cols, "rows": [[_jsonable(v) for v in row] for row in rows]}
    for key, (ecols, erows) in extra.items():
        doc[key] = {"columns": ecols, "rows": [[_jsonable(v) for v in r] for r in erows]}
    return json.dumps(doc, sort_keys=True) + "\n"


def run(args) -> int:
    cfg = resolve(args)
    command = cfg["command"]
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    handler = _HANDLERS[command]
    sweep = None
    if command in _SWEEPS:
        sweep = sweep_spec(cfg, args.workers, args.out)
        cols, rows, grid, extra = handler(cfg, workers=args.workers)
    else:
        cols, rows, grid, extra = handler(cfg)
    elapsed = time.perf_counter() - t0

    text = to_json(cols, rows, extra) if cfg["format"] == "json" else to_csv(cols, rows)
    if not args.out:
        sys.stdout.write(text)
        return 0
    out = Path(args.out)
    out.write_text(text, newline="")
    outputs = {"path": str(out), "sha256": hashlib.sha256(text.encode()).hexdigest()}
    if "overlays" in extra and cfg["format"] == "csv":
        opath = Path(cfg.get("overlays") or f"{out}.overlays.csv")
        otext = to_csv(*extra["overlays"])
        opath.write_text(otext, newline="")
        outputs["overlays"] = {"path": str(opath),
                               "sha256": hashlib.sha256(otext.encode()).hexdigest()}
    if sweep is not None:
        outputs["sweep"] = asdict(sweep)
    RunManifest(config=cfg, version=__version__, grid=grid,
                timing={"started": started, "elapsed_s": elapsed,
                        "workers": args.workers},
                output=outputs).write(f"{out}.manifest.json")
    return 0


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return run(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

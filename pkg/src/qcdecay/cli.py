"""Command-line experiment runner.

Every subcommand reads an optional JSON config file, applies command-line
flags on top, validates the result and writes ``<name>.csv`` plus a
``<name>.json`` summary with keys ``manifest``, ``derived_params`` and
``metrics``.  Exit codes: 0 ok, 2 config error, 3 resource cap,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import importlib.resources
import json
import math
import os
import platform
import sys
import time
import warnings
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import __version__, kernels
from .cauchy import (CauchyParams, cauchy_cdf, cf_sup_distance, centering_constant,
                     example3_distribution, iterate_cf_limit, tail_limit)
from .errors import ConfigError, NumericalError, ResourceCapError
from .fano import (fano_dip, golden_rule_matrix, lineshape, multilevel_density,
                   sample_multimodel, trace_integral)
from .fullrandom import (ScaleSeparationWarning, added_interaction_convolution_check,
                         basis_state_distribution, build_full_model, central_distribution,
                         iqr_width)
from .model import RandomSeed, make_spectrum, rank1_model
from .resolvent import (averaged_density, distribution_function, eigensystem, ergodic_plateau,
                        spectral_density_eigen, spectral_density_schur, survival_amplitude)
from .rg import rg_flow
from .stats import (chebyshev_bound, default_rate_window, exceedance_frequency, fit_decay_rate,
                    imh_samples, kappa, ks_distance, summarize_imh)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERICAL = 4

SEPARATION_WARNING = "separation of scales violated: need omega_B << Gamma << Delta E"

COMMON = {"seed": 0, "threads": 1, "backend": "auto", "out_dir": ".", "name": None}
RANK1 = {"n": 300, "delta_e": 20.0, "level_energy": 0.0, "gamma": None, "v2": None,
         "kind": "equidistant", "epsilon": None}
GRID = {"grid_lo": None, "grid_hi": None, "grid_points": 2001}

COMMANDS: Dict[str, Dict[str, Any]] = {
    "spectrum-density": {**RANK1, **GRID},
    "figure1": {**RANK1, **GRID},
    "survival": {**RANK1, "t_max": None, "t_points": 801, "window_lo": None, "window_hi": None},
    "ensemble": {**RANK1, "members": 500, "x": None, "n_epsilon": [10.0, 30.0, 100.0],
                 "delta": None, "redraw_spectrum": False},
    "rg-flow": {**RANK1, "steps": 3, "level_cap": 20000},
    "fano": {"n": 8000, "delta_e": 40.0, "kind": "equidistant", "h_a": [[0.0, 0.5], [0.5, 1.0]],
             "gamma_matrix": [[2.0, 0.0], [0.0, 0.0]], "theta": [1.0, 0.0], "epsilon": 0.05,
             "grid_lo": -3.0, "grid_hi": 3.0, "grid_points": 1201},
    "cauchy-limit": {"v": 0.1, "omega": 1.0, "k_max": 100000, "n_list": [16, 64, 256],
                     "t_points": 401, "tail_x": None},
    "fullrandom": {"n": 400, "rho0": 20.0, "gamma": None, "v2": None, "n_states": 9,
                   "size_cap": 2000, "grid_points": 2001},
}

HELP = {
    "spectrum-density": "smoothed spectral density by the Schur and eigen routes",
    "figure1": "step distribution function against the Cauchy cdf",
    "survival": "|chi(t)|^2 series and golden-rule rate fit",
    "ensemble": "fluctuation statistics of Im H~ over coupling draws",
    "rg-flow": "dimension-doubling flow towards the Cauchy fixed point",
    "fano": "multilevel lineshapes and golden-rule matrix",
    "cauchy-limit": "CF iteration of the lattice example towards the Cauchy law",
    "fullrandom": "basis-state decay under a dense random interaction",
}

DEFAULT_GAMMA = {"fullrandom": 1.0}
DEFAULT_GAMMA_RANK1 = 1.41

# Column units for the CSV outputs; energies are dimensionless (hbar = 1).
UNITS = {
    "x": "energy", "t": "1/energy", "epsilon": "energy", "phi_schur": "1/energy",
    "phi_eigen": "1/energy", "phi_averaged": "1/energy", "cauchy_pdf": "1/energy",
    "phi_step": "probability", "cauchy_cdf": "probability", "survival_sq": "probability",
    "chi_re": "amplitude", "chi_im": "amplitude", "f_theta": "1/energy", "beta": "energy",
    "cf_sup_distance": "amplitude", "gamma_estimate": "energy", "sample_mean": "energy",
    "predicted_mean": "energy", "sample_variance": "energy^2", "predicted_variance": "energy^2",
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _parse_list(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return [float(v) for v in text.split(",") if v.strip()]


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _arg_type(default):
    if isinstance(default, bool):
        return _bool
    if isinstance(default, int):
        return int
    if isinstance(default, float):
        return float
    if isinstance(default, list):
        return _parse_list
    return None


_TYPES = {"gamma": float, "v2": float, "epsilon": float, "grid_lo": float, "grid_hi": float,
          "t_max": float, "window_lo": float, "window_hi": float, "x": float, "delta": float,
          "tail_x": float, "name": str, "seed": int}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcdecay", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qcdecay {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for cmd, params in COMMANDS.items():
        sp = sub.add_parser(cmd, help=HELP[cmd])
        sp.add_argument("--config", help="JSON file with parameters; flags override it")
        for name, default in {**COMMON, **params}.items():
            if name == "backend":
                sp.add_argument("--backend", choices=("auto", "compiled", "python"), default=None)
                continue
            if name == "kind":
                sp.add_argument("--kind", choices=("equidistant", "poisson"), default=None)
                continue
            typ = _TYPES.get(name) or _arg_type(default) or str
            sp.add_argument(_flag(name), dest=name, type=typ, default=None,
                            help=f"default: {default!r}")
    return p


def load_config(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def merge_config(command: str, file_cfg: Dict[str, Any], flags: Dict[str, Any]) -> Dict[str, Any]:
    """defaults <- config file <- explicit flags; unknown file keys are errors."""
    allowed = {**COMMON, **COMMANDS[command]}
    errors = []
    file_cfg = dict(file_cfg)
    cmd_in_file = file_cfg.pop("command", command)
    if cmd_in_file != command:
        errors.append(f"config file is for {cmd_in_file!r}, not {command!r}")
    unknown = sorted(set(file_cfg) - set(allowed))
    if unknown:
        errors.append(f"unknown config keys for {command}: {', '.join(unknown)}")
    if errors:
        raise ConfigError(errors)
    cfg = dict(allowed)
    cfg.update(file_cfg)
    cfg.update({k: v for k, v in flags.items() if v is not None and k in allowed})
    return cfg


def _positive(cfg, key, errors, allow_none=False):
    v = cfg.get(key)
    if v is None and allow_none:
        return
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v <= 0:
        errors.append(f"{key} must be a positive number (got {v!r})")


def _rank1_validate(command, cfg, errors, warns):
    _positive(cfg, "delta_e", errors)
    if not isinstance(cfg["n"], int) or cfg["n"] < 1:
        errors.append(f"n must be a positive integer (got {cfg['n']!r})")
    if cfg["gamma"] is not None and cfg["v2"] is not None:
        errors.append("give only one of gamma and v2; the other is derived")
    _positive(cfg, "gamma", errors, allow_none=True)
    _positive(cfg, "v2", errors, allow_none=True)
    _positive(cfg, "epsilon", errors, allow_none=True)
    if cfg["kind"] not in ("equidistant", "poisson"):
        errors.append(f"kind must be equidistant or poisson (got {cfg['kind']!r})")
    if errors:
        return None
    rho = cfg["n"] / cfg["delta_e"]
    if cfg["gamma"] is None and cfg["v2"] is None:
        cfg["gamma"] = DEFAULT_GAMMA_RANK1
    if cfg["gamma"] is None:
        cfg["gamma"] = 2.0 * math.pi * rho * cfg["v2"]
    else:
        cfg["v2"] = cfg["gamma"] / (2.0 * math.pi * rho)
    gamma = cfg["gamma"]
    omega_b = 1.0 / rho
    if cfg["epsilon"] is None:
        cfg["epsilon"] = math.sqrt(omega_b * gamma)
    if not (omega_b < gamma < cfg["delta_e"]):
        warns.append(f"{SEPARATION_WARNING} (omega_B = {omega_b:.6g}, Gamma = {gamma:.6g}, "
                     f"Delta E = {cfg['delta_e']:.6g})")
    lo = cfg["level_energy"] - cfg["delta_e"] / 2.0
    hi = cfg["level_energy"] + cfg["delta_e"] / 2.0
    if "grid_points" in cfg:
        cfg["grid_lo"] = lo if cfg["grid_lo"] is None else cfg["grid_lo"]
        cfg["grid_hi"] = hi if cfg["grid_hi"] is None else cfg["grid_hi"]
    if command == "survival":
        w_lo, w_hi = default_rate_window(cfg["delta_e"], gamma, rho * gamma)
        cfg["window_lo"] = w_lo if cfg["window_lo"] is None else cfg["window_lo"]
        cfg["window_hi"] = w_hi if cfg["window_hi"] is None else cfg["window_hi"]
        if cfg["t_max"] is None:
            cfg["t_max"] = max(4.0 / gamma, cfg["window_hi"])
        if not 0 <= cfg["window_lo"] < cfg["window_hi"] <= cfg["t_max"]:
            errors.append("need 0 <= window_lo < window_hi <= t_max")
    if command == "ensemble":
        if cfg["x"] is None:
            cfg["x"] = cfg["level_energy"]
        if cfg["delta"] is None:
            cfg["delta"] = gamma / 2.0
        _positive(cfg, "delta", errors)
        if not isinstance(cfg["members"], int) or cfg["members"] < 2:
            errors.append("members must be an integer >= 2")
        ne = cfg["n_epsilon"]
        if not isinstance(ne, list) or not ne or any(not isinstance(v, (int, float)) or v <= 0 for v in ne):
            errors.append("n_epsilon must be a nonempty list of positive numbers")
    if command == "rg-flow":
        if not isinstance(cfg["steps"], int) or cfg["steps"] < 0:
            errors.append("steps must be a nonnegative integer")
    return {"gamma": gamma, "n_gamma": rho * gamma, "omega_b": omega_b, "rho_b": rho,
            "v2": cfg["v2"], "epsilon": cfg["epsilon"], "kappa": kappa(rho, cfg["epsilon"]),
            "default_epsilon": math.sqrt(omega_b * gamma)}


def _matrix(value, name, errors):
    try:
        m = np.array([[complex(v) if isinstance(v, str) else v for v in row] for row in value],
                     dtype=complex)
    except (TypeError, ValueError):
        errors.append(f"{name} must be a square matrix given as nested lists")
        return None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        errors.append(f"{name} must be square")
        return None
    if not np.allclose(m, m.conj().T, rtol=0, atol=1e-12):
        errors.append(f"{name} must be Hermitian")
        return None
    return m


def validate(command: str, cfg: Dict[str, Any]) -> Tuple[Dict[str, Any], List[str], List[str], Dict[str, Any]]:
    """Fill defaults and collect every violation.

    Returns (normalized config, errors, warnings, derived parameters).
    """
    cfg = dict(cfg)
    errors: List[str] = []
    warns: List[str] = []
    derived: Dict[str, Any] = {}
    if not isinstance(cfg["seed"], int) or not 0 <= cfg["seed"] < 2**64:
        errors.append("seed must be an integer in [0, 2^64)")
    if not isinstance(cfg["threads"], int) or cfg["threads"] < 1:
        errors.append("threads must be a positive integer")
    if cfg["backend"] not in ("auto", "compiled", "python"):
        errors.append("backend must be auto, compiled or python")
    elif cfg["backend"] == "compiled" and "compiled" not in kernels.available_backends():
        errors.append("compiled backend requested but the extension is not built")
    if "grid_points" in cfg and (not isinstance(cfg["grid_points"], int) or cfg["grid_points"] < 2):
        errors.append("grid_points must be an integer >= 2")
    if command in ("spectrum-density", "figure1", "survival", "ensemble", "rg-flow"):
        d = _rank1_validate(command, cfg, errors, warns)
        if d:
            derived = d
    elif command == "fano":
        _positive(cfg, "delta_e", errors)
        _positive(cfg, "epsilon", errors)
        if not isinstance(cfg["n"], int) or cfg["n"] < 1:
            errors.append("n must be a positive integer")
        h = _matrix(cfg["h_a"], "h_a", errors)
        g = _matrix(cfg["gamma_matrix"], "gamma_matrix", errors)
        if h is not None and g is not None:
            if h.shape != g.shape:
                errors.append("h_a and gamma_matrix must have the same shape")
            elif np.linalg.eigvalsh(g).min() < -1e-10 * max(1.0, np.abs(g).max()):
                errors.append("gamma_matrix must be positive semidefinite")
            th = np.asarray([complex(v) if isinstance(v, str) else v for v in cfg["theta"]], dtype=complex)
            if th.shape != (h.shape[0],):
                errors.append("theta must have one entry per level")
            elif np.linalg.norm(th) == 0:
                errors.append("theta must be nonzero")
        if not errors:
            rho = cfg["n"] / cfg["delta_e"]
            widths = np.linalg.eigvalsh(g)
            if widths.max() >= cfg["delta_e"] or widths.max() <= 1.0 / rho:
                warns.append(f"{SEPARATION_WARNING} (largest golden-rule width {widths.max():.6g})")
            derived = {"rho_b": rho, "omega_b": 1.0 / rho, "golden_rule_widths": widths.tolist(),
                       "n_gamma": (rho * widths).tolist(), "epsilon": cfg["epsilon"],
                       "kappa": kappa(rho, cfg["epsilon"])}
    elif command == "cauchy-limit":
        _positive(cfg, "v", errors)
        _positive(cfg, "omega", errors)
        if not isinstance(cfg["k_max"], int) or cfg["k_max"] < 1:
            errors.append("k_max must be a positive integer")
        nl = cfg["n_list"]
        if not isinstance(nl, list) or not nl or any(not float(v).is_integer() or v < 1 for v in nl):
            errors.append("n_list must be a nonempty list of positive integers")
        else:
            cfg["n_list"] = [int(v) for v in nl]
        if not errors:
            if cfg["v"] ** 2 > 3.0 * cfg["omega"] ** 2 / math.pi ** 2:
                errors.append("need v^2 <= 3 omega^2 / pi^2 so that p_0 >= 0")
            if cfg["tail_x"] is None:
                cfg["tail_x"] = 100.0 * cfg["omega"]
            gamma = 2.0 * math.pi * cfg["v"] ** 2 / cfg["omega"]
            derived = {"gamma": gamma, "tail_constant": cfg["v"] ** 2 / cfg["omega"],
                       "p0": 1.0 - (math.pi ** 2 / 3.0) * (cfg["v"] / cfg["omega"]) ** 2}
    elif command == "fullrandom":
        _positive(cfg, "rho0", errors)
        if not isinstance(cfg["n"], int) or cfg["n"] < 2:
            errors.append("n must be an integer >= 2")
        if cfg["gamma"] is not None and cfg["v2"] is not None:
            errors.append("give only one of gamma and v2; the other is derived")
        _positive(cfg, "gamma", errors, allow_none=True)
        _positive(cfg, "v2", errors, allow_none=True)
        if not isinstance(cfg["n_states"], int) or cfg["n_states"] < 1:
            errors.append("n_states must be a positive integer")
        if not errors:
            if cfg["gamma"] is None and cfg["v2"] is None:
                cfg["gamma"] = DEFAULT_GAMMA["fullrandom"]
            if cfg["gamma"] is None:
                cfg["gamma"] = 2.0 * math.pi * cfg["rho0"] * cfg["v2"]
            else:
                cfg["v2"] = cfg["gamma"] / (2.0 * math.pi * cfg["rho0"])
            width = cfg["n"] / cfg["rho0"]
            if not (1.0 / cfg["rho0"] < cfg["gamma"] < width):
                warns.append(f"{SEPARATION_WARNING} (Gamma = {cfg['gamma']:.6g}, Delta E = {width:.6g})")
            n_gamma = cfg["rho0"] * cfg["gamma"]
            half = cfg["n"] // 2
            if half - cfg["n_states"] // 2 < math.ceil(n_gamma):
                errors.append("central basis states lie within N_Gamma levels of the spectral edge; "
                              "increase n or reduce gamma / n_states")
            derived = {"gamma": cfg["gamma"], "v2": cfg["v2"], "n_gamma": n_gamma,
                       "omega_b": 1.0 / cfg["rho0"], "rho_b": cfg["rho0"], "delta_e": width}
    if cfg.get("name") is None:
        cfg["name"] = command
    return cfg, errors, warns, derived


# ---------------------------------------------------------------------------
# subcommand bodies: each returns (columns, metrics)


def _rank1(cfg):
    return rank1_model(cfg["n"], cfg["delta_e"], v2=cfg["v2"], level_energy=cfg["level_energy"],
                       kind=cfg["kind"], seed=RandomSeed(cfg["seed"]))


def _grid(cfg):
    return np.linspace(cfg["grid_lo"], cfg["grid_hi"], cfg["grid_points"])


def run_spectrum_density(cfg, derived):
    m = _rank1(cfg)
    x = _grid(cfg)
    eps = cfg["epsilon"]
    schur = spectral_density_schur(m, x, eps)
    eig = spectral_density_eigen(eigensystem(m), x, eps)
    avg = averaged_density(x, eps, m.level_energy, derived["gamma"], m.spectrum.interval)
    lor = CauchyParams(m.level_energy, derived["gamma"]).pdf(x)
    cols = {"x": x, "phi_schur": schur, "phi_eigen": eig, "phi_averaged": avg, "cauchy_pdf": lor}
    metrics = {
        "integral_schur": float(np.trapezoid(schur, x)),
        "max_rel_diff_schur_eigen": float(np.max(np.abs(schur - eig) / np.maximum(eig, 1e-300))),
        "sup_dist_to_averaged_over_peak": float(np.max(np.abs(schur - avg)) / avg.max()),
        "sup_dist_to_cauchy_over_peak": float(np.max(np.abs(schur - lor)) / lor.max()),
    }
    return cols, metrics


def run_figure1(cfg, derived):
    m = _rank1(cfg)
    es = eigensystem(m)
    x = _grid(cfg)
    p = CauchyParams(m.level_energy, derived["gamma"])
    cols = {"x": x, "phi_step": distribution_function(es, x), "cauchy_cdf": cauchy_cdf(x, p)}
    lo, hi = m.spectrum.interval
    q = 0.25 * (hi - lo)
    metrics = {"ks_distance": ks_distance(es, p, interval=m.spectrum.interval),
               "ks_range": [lo + q, hi - q], "n_gamma": derived["n_gamma"],
               "weight_sum": float(es.weights.sum())}
    return cols, metrics


def run_survival(cfg, derived):
    m = _rank1(cfg)
    es = eigensystem(m)
    t = np.linspace(0.0, cfg["t_max"], cfg["t_points"])
    window = (cfg["window_lo"], cfg["window_hi"])
    # make sure the window edges are sampled exactly
    t = np.unique(np.concatenate([t, window]))
    chi = survival_amplitude(es, t)
    sq = np.abs(chi) ** 2
    fit = fit_decay_rate(t, sq, window)
    plateau = ergodic_plateau(es)
    cols = {"t": t, "survival_sq": sq, "chi_re": chi.real, "chi_im": chi.imag}
    metrics = {"fitted_rate": fit.rate, "rate_rel_error": abs(fit.rate - derived["gamma"]) / derived["gamma"],
               "rate_window": list(fit.window), "fit_intercept": fit.intercept,
               "fit_residual_rms": fit.residual_rms, "ergodic_plateau": plateau,
               "plateau_times_pi_n_gamma": plateau * math.pi * derived["n_gamma"]}
    return cols, metrics


def run_ensemble(cfg, derived):
    m = _rank1(cfg)
    spec = m.spectrum
    rho = spec.density
    rows = {k: [] for k in ("n_epsilon", "epsilon", "sample_mean", "predicted_mean", "sample_variance",
                            "predicted_variance", "variance_ratio", "relative_fluctuation", "kappa",
                            "chebyshev_bound", "exceedance_frequency")}
    seed = RandomSeed(cfg["seed"])
    for ne in cfg["n_epsilon"]:
        eps = ne / rho
        vals = imh_samples(spec, cfg["v2"], cfg["x"], eps, cfg["members"], seed,
                           redraw_spectrum=cfg["redraw_spectrum"])
        s = summarize_imh(vals, spec, cfg["v2"], cfg["x"], eps)
        rows["n_epsilon"].append(ne)
        rows["epsilon"].append(eps)
        rows["sample_mean"].append(s.sample_mean)
        rows["predicted_mean"].append(s.predicted_mean)
        rows["sample_variance"].append(s.sample_variance)
        rows["predicted_variance"].append(s.predicted_variance)
        rows["variance_ratio"].append(s.sample_variance / s.predicted_variance)
        rows["relative_fluctuation"].append(math.sqrt(s.sample_variance) / s.sample_mean)
        rows["kappa"].append(kappa(rho, eps))
        rows["chebyshev_bound"].append(chebyshev_bound(derived["gamma"], ne, cfg["delta"]))
        rows["exceedance_frequency"].append(exceedance_frequency(vals, s.predicted_mean, cfg["delta"]))
    cols = {k: np.asarray(v, dtype=float) for k, v in rows.items()}
    metrics = {"variance_ratio": rows["variance_ratio"],
               "fluctuation_over_kappa": list(np.asarray(rows["relative_fluctuation"]) / np.asarray(rows["kappa"])),
               "chebyshev_sound": bool(np.all(cols["exceedance_frequency"] <= cols["chebyshev_bound"])),
               "members": cfg["members"]}
    return cols, metrics


def run_rg_flow(cfg, derived):
    m = _rank1(cfg)
    rep = rg_flow(m, cfg["steps"], seed=RandomSeed(cfg["seed"]), level_cap=cfg["level_cap"])
    g = np.asarray(rep.gamma_estimates)
    cols = {"step": np.asarray(rep.steps, dtype=float), "n_levels": np.asarray(rep.n_levels, dtype=float),
            "ks_distance": np.asarray(rep.ks_distances), "gamma_estimate": g}
    metrics = {"ks_distances": list(rep.ks_distances), "gamma_estimates": list(rep.gamma_estimates),
               "max_gamma_rel_error": float(np.max(np.abs(g - derived["gamma"]) / derived["gamma"])),
               "notes": list(rep.notes)}
    return cols, metrics


def run_fano(cfg, derived):
    na = len(cfg["h_a"])
    h = np.array([[complex(v) for v in row] for row in cfg["h_a"]])
    gm = np.array([[complex(v) for v in row] for row in cfg["gamma_matrix"]])
    lo, hi = -cfg["delta_e"] / 2.0, cfg["delta_e"] / 2.0
    spec = make_spectrum(cfg["kind"], cfg["n"], (lo, hi), seed=RandomSeed(cfg["seed"]))
    gamma_cov = gm / (2.0 * math.pi * spec.density)
    model = sample_multimodel(h, gamma_cov, spec, seed=RandomSeed(cfg["seed"]))
    th = np.array([complex(v) for v in cfg["theta"]])
    th = th / np.linalg.norm(th)
    x = _grid(cfg)
    phi = multilevel_density(model, x, cfg["epsilon"])
    curve = lineshape(model, th, x, cfg["epsilon"])
    cols = {"x": x, "f_theta": curve.values}
    for j in range(na):
        cols[f"phi_{j}{j}"] = phi[:, j, j].real
    res = np.sort(np.linalg.eigvals(h + 0.5j * gm).real)
    dip_x, depth = fano_dip(curve, res[0], res[-1]) if na > 1 else (float("nan"), 0.0)
    metrics = {"trace_integral": trace_integral(model, cfg["epsilon"], n_points=20001),
               "min_eigenvalue": float(min(np.linalg.eigvalsh(p).min() for p in phi)),
               "resonance_energies": res.tolist(), "dip_position": dip_x, "dip_depth": depth,
               "golden_rule_matrix_real": golden_rule_matrix(gamma_cov, spec.density).matrix.real.tolist()}
    return cols, metrics


def run_cauchy_limit(cfg, derived):
    F = example3_distribution(cfg["v"], cfg["omega"], k_max=cfg["k_max"])
    gamma = derived["gamma"]
    dist = []
    betas = []
    for n in cfg["n_list"]:
        betas.append(centering_constant(F, n))
        dist.append(cf_sup_distance(iterate_cf_limit(F, n), gamma, 5.0 / gamma, cfg["t_points"]))
    up, low = tail_limit(F, cfg["tail_x"])
    cols = {"n": np.asarray(cfg["n_list"], dtype=float), "cf_sup_distance": np.asarray(dist),
            "beta": np.asarray(betas)}
    metrics = {"cf_sup_distance": dist,
               "monotone_decreasing": bool(all(b < a for a, b in zip(dist, dist[1:]))),
               "tail_upper_x_T": up, "tail_lower_x_F": low,
               "tail_rel_error": abs(up - derived["tail_constant"]) / derived["tail_constant"]}
    return cols, metrics


def run_fullrandom(cfg, derived):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ScaleSeparationWarning)
        m = build_full_model(cfg["n"], cfg["rho0"], cfg["v2"], seed=RandomSeed(cfg["seed"]),
                             size_cap=cfg["size_cap"])
        F = central_distribution(m, cfg["n_states"])
        rep = added_interaction_convolution_check(m, seed2=RandomSeed(cfg["seed"], 1),
                                                  n_states=cfg["n_states"])
    half = 0.5 * m.n / m.rho0
    x = np.linspace(-half / 2.0, half / 2.0, cfg["grid_points"])
    p = CauchyParams(0.0, m.gamma)
    k = m.n // 2
    cols = {"x": x, "phi_step": F.cdf(x), "cauchy_cdf": cauchy_cdf(x, p)}
    metrics = {"ks_distance": ks_distance(F, p, range=(x[0], x[-1])),
               "ks_distance_single_state": ks_distance(basis_state_distribution(m, k),
                                                       CauchyParams(m.h0_energies[k], m.gamma),
                                                       range=(x[0], x[-1])),
               "iqr_width": iqr_width(F), "gamma1_fit": rep.gamma1_fit,
               "gamma_sum_fit": rep.gamma_sum_fit, "gamma_sum_over_gamma": rep.ratio,
               "states": list(rep.states)}
    return cols, metrics


RUNNERS = {
    "spectrum-density": run_spectrum_density,
    "figure1": run_figure1,
    "survival": run_survival,
    "ensemble": run_ensemble,
    "rg-flow": run_rg_flow,
    "fano": run_fano,
    "cauchy-limit": run_cauchy_limit,
    "fullrandom": run_fullrandom,
}


# ---------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_csv(path: str, columns: Dict[str, np.ndarray]) -> None:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for row in data:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def make_manifest(command, raw_cfg, cfg, derived, warns, wall, argv, outputs, columns=()):
    return {
        "tool": "qcdecay",
        "version": __version__,
        "subcommand": command,
        # ``config`` reruns as a config file; ``resolved_config`` has every default filled in
        "config": raw_cfg,
        "resolved_config": cfg,
        "derived_params": derived,
        "seed": cfg["seed"],
        "backend": kernels.BACKEND,
        "threads": cfg["threads"],
        "warnings": warns,
        "wall_time_s": wall,
        "argv": argv,
        "outputs": outputs,
        "csv_units": {k: UNITS.get(k, "dimensionless") for k in columns},
        "platform": {"python": platform.python_version(), "numpy": np.__version__},
    }


def summary_schema() -> Dict[str, Any]:
    """The JSON schema every ``<name>.json`` summary validates against."""
    text = importlib.resources.files("qcdecay").joinpath("schemas/summary.schema.json").read_text("utf-8")
    return json.loads(text)


def _error_record(kind: str, messages) -> str:
    return json.dumps({"error": kind, "messages": list(messages)})


def run(command: str, cfg: Dict[str, Any], argv: Optional[List[str]] = None) -> int:
    raw_cfg = dict(cfg)
    cfg, errors, warns, derived = validate(command, cfg)
    if errors:
        raise ConfigError(errors)
    for w in warns:
        print(f"warning: {w}", file=sys.stderr)
    kernels.use_backend(cfg["backend"])
    kernels.set_num_threads(cfg["threads"])
    os.makedirs(cfg["out_dir"], exist_ok=True)
    start = time.perf_counter()
    with np.errstate(invalid="raise", divide="raise", over="raise"):
        try:
            cols, metrics = RUNNERS[command](cfg, derived)
        except FloatingPointError as exc:
            raise NumericalError(str(exc)) from exc
        except np.linalg.LinAlgError as exc:
            raise NumericalError(str(exc)) from exc
        except ValueError as exc:
            # inputs passed validation, so a failure here comes from the realization
            raise NumericalError(str(exc)) from exc
    wall = time.perf_counter() - start
    csv_path = os.path.join(cfg["out_dir"], cfg["name"] + ".csv")
    json_path = os.path.join(cfg["out_dir"], cfg["name"] + ".json")
    write_csv(csv_path, cols)
    manifest = make_manifest(command, raw_cfg, cfg, derived, warns, wall, argv or [],
                             {"csv": os.path.basename(csv_path), "summary": os.path.basename(json_path)},
                             list(cols))
    summary = _jsonable({"manifest": manifest, "derived_params": derived, "metrics": metrics})
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which is our config code too
        return int(exc.code) if exc.code is not None else EXIT_OK
    flags = vars(ns)
    command = flags.pop("command")
    try:
        cfg = merge_config(command, load_config(flags.pop("config")), flags)
        return run(command, cfg, argv)
    except ConfigError as exc:
        print(_error_record("config", exc.errors), file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapError as exc:
        print(_error_record("resource_cap", [str(exc)]), file=sys.stderr)
        return EXIT_RESOURCE
    except (NumericalError, ArithmeticError) as exc:
        print(_error_record("numerical", [str(exc)]), file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

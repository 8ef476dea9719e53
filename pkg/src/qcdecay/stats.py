"""Ensemble statistics, uniformity diagnostics, KS distances and rate fits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .cauchy import CauchyParams, StepDistribution, cauchy_cdf
from .model import DecayModel, Spectrum, _as_seed, derived_params, make_spectrum
from .resolvent import Eigensystem, eigensystem, survival_amplitude, window_j

__all__ = [
    "EnsembleSummary",
    "RateFit",
    "ensemble_imh_stats",
    "imh_samples",
    "summarize_imh",
    "kappa",
    "chebyshev_bound",
    "uniformity_spectrum",
    "uniformity_couplings",
    "ks_distance",
    "fit_decay_rate",
    "default_rate_window",
    "golden_rule_fit",
    "poisson_count_stats",
    "exceedance_frequency",
]


@dataclass(frozen=True)
class EnsembleSummary:
    sample_mean: float
    sample_variance: float
    n_members: int
    predicted_mean: float
    predicted_variance: float
    gamma: float = float("nan")

    @property
    def relative_fluctuation(self) -> float:
        """Sample standard deviation over the golden-rule value Gamma / 2."""
        return math.sqrt(self.sample_variance) / (0.5 * self.gamma)


@dataclass(frozen=True)
class RateFit:
    rate: float
    intercept: float
    window: Tuple[float, float]
    residual_rms: float


def _lorentz_weights(energies, x, epsilon):
    return epsilon / ((x - energies) ** 2 + epsilon ** 2)


def imh_samples(spectrum: Spectrum, variance_v2: float, x: float, epsilon: float,
                n_members: int, seed=None, redraw_spectrum: bool = False) -> np.ndarray:
    """Im H~_A(x - i eps) for ensemble members k = 0..n_members-1 (stream k)."""
    seed = _as_seed(seed)
    out = np.empty(n_members)
    lw = _lorentz_weights(spectrum.energies, x, epsilon)
    scale = math.sqrt(variance_v2 / 2.0)
    for k in range(n_members):
        member = seed.member(k)
        if redraw_spectrum:
            spec = make_spectrum(spectrum.kind, spectrum.n_levels, spectrum.interval, seed=member)
            lw = _lorentz_weights(spec.energies, x, epsilon)
        z = member.rng(1).normal(0.0, scale, size=(spectrum.n_levels, 2))
        out[k] = math.fsum((z[:, 0] ** 2 + z[:, 1] ** 2) * lw)
    return out


def ensemble_imh_stats(spectrum: Spectrum, variance_v2: float, x: float, epsilon: float,
                       n_members: int, seed=None, redraw_spectrum: bool = False) -> EnsembleSummary:
    """Sample mean/variance of Im H~_A against (Gamma/2) J and pi v^4 / (2 eps omega_B).

    The spectrum is held fixed and couplings redrawn per member unless
    ``redraw_spectrum`` is set.
    """
    if n_members < 2:
        raise ValueError("n_members must be >= 2")
    vals = imh_samples(spectrum, variance_v2, x, epsilon, n_members, seed, redraw_spectrum)
    return summarize_imh(vals, spectrum, variance_v2, x, epsilon)


def summarize_imh(samples, spectrum: Spectrum, variance_v2: float, x: float,
                  epsilon: float) -> EnsembleSummary:
    """EnsembleSummary of precomputed Im H~_A samples (fsum reductions)."""
    vals = np.asarray(samples, dtype=float)
    n = vals.size
    if n < 2:
        raise ValueError("need at least two samples")
    mean = math.fsum(vals) / n
    var = math.fsum((vals - mean) ** 2) / (n - 1)
    gamma = 2.0 * math.pi * spectrum.density * variance_v2
    pred_mean = 0.5 * gamma * float(window_j(x, epsilon, spectrum.interval))
    pred_var = math.pi * variance_v2 ** 2 / (2.0 * epsilon * spectrum.mean_spacing)
    return EnsembleSummary(mean, var, n, pred_mean, pred_var, gamma)


def kappa(rho_b: float, epsilon: float) -> float:
    """Relative fluctuation scale 1 / sqrt(2 pi rho_B eps)."""
    if not (rho_b > 0 and epsilon > 0):
        raise ValueError("inputs must be positive")
    return 1.0 / math.sqrt(2.0 * math.pi * rho_b * epsilon)


def chebyshev_bound(gamma: float, n_epsilon: float, delta: float) -> float:
    if not (gamma > 0 and n_epsilon > 0 and delta > 0):
        raise ValueError("inputs must be positive")
    return min(1.0, (gamma / (2.0 * delta)) ** 2 / (2.0 * math.pi * n_epsilon))


def exceedance_frequency(samples, center: float, delta: float) -> float:
    return float(np.mean(np.abs(np.asarray(samples) - center) >= delta))


def _probes(spectrum: Spectrum, epsilon: float, probe_grid):
    if probe_grid is None:
        lo, hi = spectrum.interval
        probe_grid = np.linspace(lo, hi, 401)
    probe_grid = np.asarray(probe_grid, dtype=float)
    lo, hi = spectrum.interval
    inside = (probe_grid >= lo + epsilon) & (probe_grid <= hi - epsilon)
    return probe_grid[inside]


def uniformity_spectrum(spectrum: Spectrum, epsilon: float, probe_grid=None) -> float:
    """max_x |(omega_B eps / pi) sum_j 1/((x - E_j)^2 + eps^2) / J(x) - 1|, eps away from the ends.

    J(x) is the continuum value of the sum, so only discreteness errors
    remain; it is 1 deep inside the interval and 3/4 at eps from an end.
    """
    x = _probes(spectrum, epsilon, probe_grid)
    e = spectrum.energies
    s = (epsilon / ((x[:, None] - e[None, :]) ** 2 + epsilon ** 2)).sum(axis=1)
    j = window_j(x, epsilon, spectrum.interval)
    return float(np.max(np.abs(spectrum.mean_spacing * s / (math.pi * j) - 1.0)))


def uniformity_couplings(model: DecayModel, epsilon: float, probe_grid=None) -> float:
    """As ``uniformity_spectrum`` with weights |xi_j|^2 / v^2."""
    spectrum = model.spectrum
    x = _probes(spectrum, epsilon, probe_grid)
    c = model.couplings.strengths
    e = spectrum.energies
    s = (c * epsilon / ((x[:, None] - e[None, :]) ** 2 + epsilon ** 2)).sum(axis=1)
    v2 = model.couplings.variance_v2
    j = window_j(x, epsilon, spectrum.interval)
    return float(np.max(np.abs(spectrum.mean_spacing * s / (math.pi * v2 * j) - 1.0)))


def poisson_count_stats(spectrum_kind: str, n_levels: int, interval, window: Tuple[float, float],
                        n_realizations: int, seed=None):
    """Sample mean and variance of the level count inside ``window``."""
    seed = _as_seed(seed)
    counts = np.empty(n_realizations)
    for k in range(n_realizations):
        s = make_spectrum(spectrum_kind, n_levels, interval, seed=seed.member(k))
        counts[k] = np.count_nonzero((s.energies >= window[0]) & (s.energies < window[1]))
    return float(counts.mean()), float(counts.var(ddof=1))


def _step_arrays(F):
    if isinstance(F, Eigensystem):
        return F.eigenvalues, np.concatenate([[0.0], np.cumsum(F.weights)])
    if isinstance(F, StepDistribution):
        return F.points, F._cum
    return None


def _cdf_callable(G):
    if isinstance(G, CauchyParams):
        return lambda x: cauchy_cdf(x, G)
    steps = _step_arrays(G)
    if steps is not None:
        pts, cum = steps
        return lambda x: cum[np.searchsorted(pts, x, side="right")]
    if hasattr(G, "cdf"):
        return G.cdf
    return G


def ks_distance(F, p, range: Optional[Tuple[float, float]] = None, n_grid: int = 20001,
                interval: Optional[Tuple[float, float]] = None) -> float:
    """sup |F(x) - G(x)| over ``range``.

    Exact for a step ``F`` (Eigensystem or StepDistribution) against a
    continuous ``p``: both one-sided limits are checked at every jump.
    Otherwise the supremum is taken on a uniform grid of ``n_grid`` points.
    Without ``range`` the central half of ``interval`` is used.
    """
    if range is None:
        if interval is None:
            raise ValueError("give either range or interval")
        lo, hi = interval
        q = 0.25 * (hi - lo)
        range = (lo + q, hi - q)
    lo, hi = float(range[0]), float(range[1])
    if not hi > lo:
        raise ValueError("range must be nonempty")
    G = _cdf_callable(p)
    steps = _step_arrays(F)
    if steps is not None and (isinstance(p, CauchyParams) or _step_arrays(p) is None):
        pts, cum = steps
        inside = pts[(pts >= lo) & (pts <= hi)]
        xs = np.concatenate([[lo, hi], inside])
        right = cum[np.searchsorted(pts, xs, side="right")]
        left = cum[np.searchsorted(pts, inside, side="left")]
        g = np.asarray(G(xs), dtype=float)
        d = np.max(np.abs(right - g))
        if inside.size:
            d = max(d, np.max(np.abs(left - g[2:])))
        return float(d)
    x = np.linspace(lo, hi, n_grid)
    Fc = _cdf_callable(F)
    return float(np.max(np.abs(np.asarray(Fc(x), dtype=float) - np.asarray(G(x), dtype=float))))


def default_rate_window(delta_e: float, gamma: float, n_gamma: float) -> Tuple[float, float]:
    """[3/Delta E, min(2/Gamma, ln(N_Gamma)/Gamma)]."""
    hi = 2.0 / gamma
    if n_gamma > 1:
        hi = min(hi, math.log(n_gamma) / gamma)
    return 3.0 / delta_e, hi


def fit_decay_rate(times, survival_sq, window: Tuple[float, float]) -> RateFit:
    """Least-squares line through log |chi|^2 on ``window``; rate = -slope."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(survival_sq, dtype=float)
    lo, hi = window
    if lo < t.min() or hi > t.max() or not hi > lo:
        raise ValueError("window must lie inside the sampled times")
    sel = (t >= lo) & (t <= hi)
    if np.count_nonzero(sel) < 2:
        raise ValueError("need at least two samples in the window")
    if np.any(y[sel] <= 0):
        raise ValueError("survival probability must be positive inside the window")
    ly = np.log(y[sel])
    slope, intercept = np.polyfit(t[sel], ly, 1)
    resid = ly - (slope * t[sel] + intercept)
    return RateFit(float(-slope), float(intercept), (float(lo), float(hi)),
                   float(np.sqrt(np.mean(resid ** 2))))


def golden_rule_fit(model: DecayModel, window=None, n_times: int = 201,
                    es: Optional[Eigensystem] = None) -> RateFit:
    """Fit the decay rate of |chi(t)|^2 for ``model`` on the default window."""
    p = derived_params(model)
    if window is None:
        window = default_rate_window(model.spectrum.width, p.gamma, p.n_gamma)
    if es is None:
        es = eigensystem(model)
    t = np.linspace(window[0], window[1], n_times)
    chi = survival_amplitude(es, t)
    return fit_decay_rate(t, np.abs(chi) ** 2, window)

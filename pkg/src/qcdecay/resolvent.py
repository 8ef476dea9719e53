"""Effective Hamiltonian, spectral densities and survival amplitudes of rank-1 models.

Two independent routes give the projected spectral density: the
Schur-complement closed form (``spectral_density_schur``) and the exact
eigendecomposition of the bordered matrix (``spectral_density_eigen``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NumericalError
from .model import DecayModel, derived_params

__all__ = [
    "Eigensystem",
    "DensityCurve",
    "effective_hamiltonian",
    "spectral_density_schur",
    "eigensystem",
    "spectral_density_eigen",
    "distribution_function",
    "survival_amplitude",
    "window_j",
    "window_k",
    "averaged_density",
    "ergodic_plateau",
    "default_epsilon",
    "make_grid",
    "density_curve",
    "interlacing_counts",
]

DECOUPLED = 1e-300
DEGENERATE_GAP = 1e-10


@dataclass(frozen=True, eq=False)
class Eigensystem:
    """Eigenvalues omega_nu with overlaps w_nu = |<psi_s|omega_nu>|^2."""

    eigenvalues: np.ndarray
    weights: np.ndarray
    method: str = "secular"

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if ev.shape != w.shape or ev.ndim != 1:
            raise ValueError("eigenvalues and weights must be 1-d of equal length")
        order = np.argsort(ev, kind="stable")
        ev, w = ev[order], w[order]
        ev.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_cumulative", np.cumsum(w))

    def __len__(self):
        return int(self.eigenvalues.size)


@dataclass(frozen=True, eq=False)
class DensityCurve:
    grid: np.ndarray
    values: np.ndarray
    epsilon: float

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.grid))


def _scalar_or_array(x, out):
    return out[0] if np.ndim(x) == 0 else out


def effective_hamiltonian(model: DecayModel, x, epsilon: float):
    """H~_A(x - i eps) for a rank-1 model; complex scalar or array."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    c = model.couplings.strengths
    re, im = kernels.resolvent_sums(np.atleast_1d(x), model.spectrum.energies, c, float(epsilon))
    out = (model.level_energy + re) + 1j * (epsilon * im)
    return _scalar_or_array(x, out)


def spectral_density_schur(model: DecayModel, x, epsilon: float):
    h = np.atleast_1d(effective_hamiltonian(model, np.atleast_1d(x), epsilon))
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    g = epsilon + h.imag
    out = g / (math.pi * ((xx - h.real) ** 2 + g * g))
    return _scalar_or_array(x, out)


def _dense_eigensystem(model: DecayModel) -> Eigensystem:
    ev, vec = np.linalg.eigh(model.hamiltonian())
    return Eigensystem(ev, np.abs(vec[0]) ** 2, method="dense")


def eigensystem(model: DecayModel, method: str = "auto") -> Eigensystem:
    """Exact spectrum of the bordered-diagonal Hamiltonian.

    ``auto`` uses the secular-equation solver unless reservoir levels are
    nearly degenerate, in which case the dense (N_B + 1)^2 matrix is
    diagonalized.  Decoupled levels (|xi|^2 < 1e-300) pass through with
    zero weight.
    """
    energies = model.spectrum.energies
    if method == "dense":
        return _dense_eigensystem(model)
    if method not in ("auto", "secular"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and energies.size > 1:
        if np.min(np.diff(energies)) < DEGENERATE_GAP * model.spectrum.width:
            return _dense_eigensystem(model)
    c = model.couplings.strengths
    coupled = c >= DECOUPLED
    roots, weights = kernels.secular_roots(energies[coupled], c[coupled], model.level_energy)
    if not np.all(np.isfinite(roots)):
        raise NumericalError("secular solver produced non-finite roots")
    if not coupled.all():
        roots = np.concatenate([roots, energies[~coupled]])
        weights = np.concatenate([weights, np.zeros(int((~coupled).sum()))])
    return Eigensystem(roots, weights, method="secular")


def spectral_density_eigen(es: Eigensystem, x, epsilon: float):
    """(eps / pi) sum_nu w_nu / ((x - omega_nu)^2 + eps^2)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive; use distribution_function for eps = 0")
    s = kernels.lorentz_sum(np.atleast_1d(x), es.eigenvalues, es.weights, float(epsilon))
    return _scalar_or_array(x, epsilon / math.pi * s)


def distribution_function(es: Eigensystem, x):
    """Right-continuous step function sum_{omega_nu <= x} w_nu."""
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    k = np.searchsorted(es.eigenvalues, xx, side="right")
    cum = np.concatenate([[0.0], es._cumulative])
    return _scalar_or_array(x, cum[k])


def survival_amplitude(es: Eigensystem, t):
    """chi(t) = sum_nu w_nu exp(-i t omega_nu)."""
    re, im = kernels.survival_sum(np.atleast_1d(t), es.eigenvalues, es.weights)
    return _scalar_or_array(t, re + 1j * im)


def window_j(x, epsilon: float, interval):
    """Smoothed indicator of the interval (tends to 1 inside, 1/2 at an edge)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    lo, hi = interval
    x = np.asarray(x, dtype=float)
    return (np.arctan((hi - x) / epsilon) - np.arctan((lo - x) / epsilon)) / math.pi


def window_k(x, epsilon: float, interval):
    """Level-shift window (1/4pi) ln[((E+ - x)^2 + eps^2) / ((E- - x)^2 + eps^2)]."""
    lo, hi = interval
    x = np.asarray(x, dtype=float)
    e2 = float(epsilon) ** 2
    num = (hi - x) ** 2 + e2
    den = (lo - x) ** 2 + e2
    if np.any(num == 0) or np.any(den == 0):
        raise NumericalError("window_k is singular at an interval endpoint when epsilon = 0")
    return np.log(num / den) / (4.0 * math.pi)


def averaged_density(x, epsilon: float, e_s: float, gamma: float, interval):
    """Ensemble-averaged, integral-approximated spectral density.

    With J = 1, K = 0 and eps = 0 this is the Lorentzian of width gamma.
    The mean level shift is <Re H~_A> = E_s - gamma K, since the sum
    over (x - E_j) turns into minus the integral defining K.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    x = np.asarray(x, dtype=float)
    if epsilon > 0:
        j = window_j(x, epsilon, interval)
    else:
        lo, hi = interval
        j = np.where((x > lo) & (x < hi), 1.0, np.where((x == lo) | (x == hi), 0.5, 0.0))
    k = window_k(x, epsilon, interval)
    g = 2.0 * epsilon + gamma * j
    return g / (2.0 * math.pi * ((x - e_s + gamma * k) ** 2 + g * g / 4.0))


def ergodic_plateau(es: Eigensystem) -> float:
    """Long-time mean of |chi(t)|^2 for a nondegenerate spectrum: sum w_nu^2."""
    return float(np.sum(es.weights ** 2))


def default_epsilon(model: DecayModel) -> float:
    """Geometric mean sqrt(omega_B * Gamma) of the level spacing and the width."""
    p = derived_params(model)
    return math.sqrt(p.omega_b * p.gamma)


def make_grid(lo: float, hi: float, resolution: float, points_per: int = 8) -> np.ndarray:
    """Uniform grid with at least ``points_per`` points per ``resolution``."""
    if not hi > lo:
        raise ValueError("empty grid range")
    n = int(math.ceil((hi - lo) * points_per / resolution)) + 1
    return np.linspace(lo, hi, max(n, 2))


def density_curve(model: DecayModel, grid=None, epsilon=None, route: str = "schur") -> DensityCurve:
    if epsilon is None:
        epsilon = default_epsilon(model)
    if grid is None:
        lo, hi = model.spectrum.interval
        grid = make_grid(lo, hi, min(epsilon, model.gamma))
    grid = np.asarray(grid, dtype=float)
    if route == "schur":
        values = spectral_density_schur(model, grid, epsilon)
    elif route == "eigen":
        values = spectral_density_eigen(eigensystem(model), grid, epsilon)
    elif route == "averaged":
        values = averaged_density(grid, epsilon, model.level_energy, model.gamma, model.spectrum.interval)
    else:
        raise ValueError(f"unknown route {route!r}")
    return DensityCurve(grid, np.asarray(values), float(epsilon))


def interlacing_counts(es: Eigensystem, poles) -> np.ndarray:
    """Number of eigenvalues in each of the len(poles) + 1 open gaps."""
    poles = np.asarray(poles, dtype=float)
    if np.isin(es.eigenvalues, poles).any():
        raise ValueError("an eigenvalue coincides with an unperturbed level")
    gap = np.searchsorted(poles, es.eigenvalues)
    return np.bincount(gap, minlength=poles.size + 1)

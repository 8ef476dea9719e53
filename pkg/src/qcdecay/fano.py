"""Multilevel decaying subspaces: golden-rule matrix, matrix densities and Fano lineshapes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import NumericalError
from .model import Spectrum, _as_seed
from .resolvent import DensityCurve

__all__ = [
    "MultiModel",
    "GoldenRuleMatrix",
    "golden_rule_matrix",
    "sample_multimodel",
    "effective_hamiltonian_matrix",
    "multilevel_density",
    "multilevel_density_dense",
    "lineshape",
    "matrix_cf",
    "density_cf",
    "trace_integral",
    "fano_dip",
]

_HERMITIAN_TOL = 1e-12
_PSD_TOL = 1e-10
_GRID_CHUNK = 4096


def _check_hermitian(m: np.ndarray, what: str) -> None:
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be a square matrix")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > _HERMITIAN_TOL * scale:
        raise ValueError(f"{what} must be Hermitian")


def _psd_sqrt(g: np.ndarray) -> np.ndarray:
    """L with L L^dagger = g, via the eigendecomposition."""
    vals, vecs = np.linalg.eigh(g)
    norm = max(float(np.max(np.abs(vals), initial=0.0)), 1e-300)
    if vals.min(initial=0.0) < -_PSD_TOL * norm:
        raise NumericalError(f"covariance is indefinite (min eigenvalue {vals.min():.3e})")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


@dataclass(frozen=True, eq=False)
class GoldenRuleMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        _check_hermitian(m, "golden-rule matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def widths(self) -> np.ndarray:
        """Eigenvalues, the decay rates when H_A commutes with the matrix."""
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True, eq=False)
class MultiModel:
    """N_A levels ``h_a`` coupled through columns ``couplings[:, r]`` to reservoir level r."""

    h_a: np.ndarray
    gamma_cov: np.ndarray
    spectrum: Spectrum
    couplings: np.ndarray

    def __post_init__(self):
        h = np.array(self.h_a, dtype=complex)
        g = np.array(self.gamma_cov, dtype=complex)
        xi = np.array(self.couplings, dtype=complex)
        _check_hermitian(h, "h_a")
        _check_hermitian(g, "gamma_cov")
        if g.shape != h.shape:
            raise ValueError("h_a and gamma_cov must have the same shape")
        if xi.shape != (h.shape[0], self.spectrum.n_levels):
            raise ValueError(f"couplings must have shape {(h.shape[0], self.spectrum.n_levels)}")
        for arr in (h, g, xi):
            arr.setflags(write=False)
        object.__setattr__(self, "h_a", h)
        object.__setattr__(self, "gamma_cov", g)
        object.__setattr__(self, "couplings", xi)

    @property
    def n_a(self) -> int:
        return int(self.h_a.shape[0])

    def golden_rule(self) -> GoldenRuleMatrix:
        return golden_rule_matrix(self.gamma_cov, self.spectrum.density)

    def hamiltonian(self) -> np.ndarray:
        """Dense block matrix [[H_A, V], [V^dagger, H_B]]."""
        na, nb = self.n_a, self.spectrum.n_levels
        h = np.zeros((na + nb, na + nb), dtype=complex)
        h[:na, :na] = self.h_a
        h[:na, na:] = self.couplings
        h[na:, :na] = self.couplings.conj().T
        h[np.arange(na, na + nb), np.arange(na, na + nb)] = self.spectrum.energies
        return h


def golden_rule_matrix(gamma_cov, rho_b: float) -> GoldenRuleMatrix:
    """Gamma_jk = 2 pi rho_B gamma_jk."""
    if not rho_b > 0:
        raise ValueError("rho_b must be positive")
    g = np.atleast_2d(np.asarray(gamma_cov, dtype=complex))
    _check_hermitian(g, "gamma_cov")
    return GoldenRuleMatrix(2.0 * math.pi * rho_b * g)


def sample_multimodel(h_a, gamma_cov, spectrum: Spectrum, seed=None) -> MultiModel:
    """Columns xi_{.r} ~ complex normal with covariance gamma_cov, independent in r."""
    h = np.atleast_2d(np.asarray(h_a, dtype=complex))
    g = np.atleast_2d(np.asarray(gamma_cov, dtype=complex))
    _check_hermitian(g, "gamma_cov")
    root = _psd_sqrt(g)
    rng = _as_seed(seed).rng(1)
    z = rng.normal(0.0, math.sqrt(0.5), size=(2, g.shape[0], spectrum.n_levels))
    xi = root @ (z[0] + 1j * z[1])
    return MultiModel(h, g, spectrum, xi)


def _h_eff_batch(model: MultiModel, x: np.ndarray, epsilon: float) -> np.ndarray:
    # 1/(x - i eps - E_r) has positive imaginary part
    g = 1.0 / (x[:, None] - 1j * epsilon - model.spectrum.energies[None, :])
    xi = model.couplings
    return model.h_a[None] + np.einsum("ir,xr,jr->xij", xi, g, xi.conj(), optimize=True)


def effective_hamiltonian_matrix(model: MultiModel, x, epsilon: float) -> np.ndarray:
    """H~_A(x - i eps) = H_A + sum_r xi_r xi_r^dagger / (x - i eps - E_r)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    out = _h_eff_batch(model, xx, float(epsilon))
    return out[0] if np.ndim(x) == 0 else out


def multilevel_density(model: MultiModel, x, epsilon: float) -> np.ndarray:
    """(1/pi) R_A (eps + Im H~_A) R_A^dagger with R_A = (x - i eps - H~_A)^-1.

    Returns an (N_A, N_A) matrix for scalar ``x`` and a stack otherwise.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    na = model.n_a
    eye = np.eye(na)
    out = np.empty((xx.size, na, na), dtype=complex)
    for s in range(0, xx.size, _GRID_CHUNK):
        xs = xx[s:s + _GRID_CHUNK]
        h = _h_eff_batch(model, xs, float(epsilon))
        im = (h - np.conj(np.swapaxes(h, 1, 2))) / 2j + epsilon * eye
        a = (xs[:, None, None] - 1j * epsilon) * eye - h
        try:
            r = np.linalg.inv(a)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - needs eps = 0
            raise NumericalError("singular resolvent") from exc
        phi = r @ im @ np.conj(np.swapaxes(r, 1, 2)) / math.pi
        out[s:s + _GRID_CHUNK] = 0.5 * (phi + np.conj(np.swapaxes(phi, 1, 2)))
    return out[0] if np.ndim(x) == 0 else out


def multilevel_density_dense(model: MultiModel, x, epsilon: float) -> np.ndarray:
    """Oracle: (eps/pi) sum_nu P_A|nu><nu|P_A / ((x - omega_nu)^2 + eps^2) by dense eigh."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    w, u = np.linalg.eigh(model.hamiltonian())
    ua = u[:model.n_a]
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    lor = (epsilon / math.pi) / ((xx[:, None] - w[None, :]) ** 2 + epsilon ** 2)
    out = np.einsum("iv,xv,jv->xij", ua, lor, ua.conj(), optimize=True)
    return out[0] if np.ndim(x) == 0 else out


def lineshape(model: MultiModel, theta, grid, epsilon: float) -> DensityCurve:
    """f(theta, x) = theta^dagger phi_A(x) theta on ``grid``."""
    th = np.asarray(theta, dtype=complex).ravel()
    if th.size != model.n_a:
        raise ValueError("theta has the wrong length")
    if abs(np.linalg.norm(th) - 1.0) > 1e-10:
        raise ValueError("theta must be a unit vector")
    grid = np.asarray(grid, dtype=float)
    phi = multilevel_density(model, grid, epsilon)
    vals = np.einsum("i,xij,j->x", th.conj(), phi, th).real
    return DensityCurve(grid, np.clip(vals, 0.0, None), float(epsilon))


def matrix_cf(h_eff_const, t, epsilon: float = 0.0) -> np.ndarray:
    """exp(-i t Re H - |t| (Im H + eps)) for a constant H with PSD Hermitian imaginary part."""
    h = np.atleast_2d(np.asarray(h_eff_const, dtype=complex))
    re = 0.5 * (h + h.conj().T)
    im = (h - h.conj().T) / 2j
    vals = np.linalg.eigvalsh(im)
    if vals.min() < -_PSD_TOL * max(1.0, float(np.abs(vals).max())):
        raise ValueError("imaginary part must be positive semidefinite")
    damp = im + epsilon * np.eye(h.shape[0])
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.stack([expm(-1j * tt * re - abs(tt) * damp) for tt in ts])
    return out[0] if np.ndim(t) == 0 else out


def _tan_grid(center: float, scale: float, n_points: int):
    u = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n_points + 2)[1:-1]
    x = center + scale * np.tan(u)
    jac = scale / np.cos(u) ** 2
    return u, x, jac


def trace_integral(model: MultiModel, epsilon: float, n_points: int = 200001) -> float:
    """int tr phi_A dx over the real line (tan-mapped trapezoid rule)."""
    lo, hi = model.spectrum.interval
    u, x, jac = _tan_grid(0.5 * (lo + hi), 0.5 * (hi - lo), n_points)
    phi = multilevel_density(model, x, epsilon)
    tr = np.trace(phi, axis1=1, axis2=2).real
    return float(np.trapezoid(tr * jac, u))


def density_cf(model: MultiModel, t, epsilon: float, n_points: int = 200001) -> np.ndarray:
    """int phi_A(x) exp(-i x t) dx by tan-mapped quadrature."""
    lo, hi = model.spectrum.interval
    u, x, jac = _tan_grid(0.5 * (lo + hi), 0.5 * (hi - lo), n_points)
    phi = multilevel_density(model, x, epsilon) * jac[:, None, None]
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.stack([np.trapezoid(phi * np.exp(-1j * x * tt)[:, None, None], u, axis=0) for tt in ts])
    return out[0] if np.ndim(t) == 0 else out


def fano_dip(curve: DensityCurve, lo: float, hi: float):
    """Deepest point of ``curve`` strictly inside (lo, hi) and its relative depth.

    Depth is 1 - f_min / min(max f left of it, max f right of it) with the
    maxima taken over [lo, hi]; it is 0 when the minimum sits on the edge.
    """
    g = curve.grid
    sel = np.flatnonzero((g >= lo) & (g <= hi))
    if sel.size < 3:
        raise ValueError("need at least three grid points inside (lo, hi)")
    v = curve.values[sel]
    k = int(np.argmin(v))
    if k == 0 or k == v.size - 1:
        return float(g[sel[k]]), 0.0
    shoulder = min(v[:k].max(), v[k + 1:].max())
    return float(g[sel[k]]), float(1.0 - v[k] / shoulder)

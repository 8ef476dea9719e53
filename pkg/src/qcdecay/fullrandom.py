"""Dense random interactions: basis-state decay and the convolution of added perturbations."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cauchy import StepDistribution
from .errors import ResourceCapError
from .model import _as_seed

__all__ = [
    "FullModel",
    "ConvolutionReport",
    "ScaleSeparationWarning",
    "build_full_model",
    "random_interaction",
    "basis_state_distribution",
    "iqr_width",
    "central_distribution",
    "added_interaction_convolution_check",
    "DEFAULT_SIZE_CAP",
]

DEFAULT_SIZE_CAP = 2000


class ScaleSeparationWarning(UserWarning):
    """Gamma is not small against the spectral width."""


def _check_scales(gamma: float, width: float) -> None:
    if gamma >= width:
        warnings.warn(f"separation of scales violated: Gamma = {gamma:.6g} >= Delta E = {width:.6g}",
                      ScaleSeparationWarning, stacklevel=3)


@dataclass(frozen=True, eq=False)
class FullModel:
    """H_1 = diag(h0_energies) + interaction, with interaction variance v2."""

    h0_energies: np.ndarray
    interaction: np.ndarray
    rho0: float
    v2: float
    _eig: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        e = np.array(self.h0_energies, dtype=float)
        v = np.array(self.interaction, dtype=complex)
        if e.ndim != 1 or e.size < 2:
            raise ValueError("need at least two unperturbed levels")
        if np.any(np.diff(e) <= 0):
            raise ValueError("h0_energies must be strictly increasing")
        if v.shape != (e.size, e.size):
            raise ValueError("interaction shape does not match h0_energies")
        if not np.array_equal(v, v.conj().T):
            raise ValueError("interaction must be Hermitian")
        e.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "h0_energies", e)
        object.__setattr__(self, "interaction", v)

    @property
    def n(self) -> int:
        return int(self.h0_energies.size)

    @property
    def gamma(self) -> float:
        return 2.0 * math.pi * self.rho0 * self.v2

    @property
    def n_gamma(self) -> float:
        return self.rho0 * self.gamma

    @property
    def interval(self):
        half = 0.5 * self.n / self.rho0
        return (-half, half)

    def hamiltonian(self) -> np.ndarray:
        return np.diag(self.h0_energies).astype(complex) + self.interaction

    def eigh(self):
        """Cached (eigenvalues, eigenvectors) of the full Hamiltonian."""
        if "w" not in self._eig:
            w, u = np.linalg.eigh(self.hamiltonian())
            self._eig["w"], self._eig["u"] = w, u
        return self._eig["w"], self._eig["u"]

    def with_interaction(self, extra: np.ndarray, extra_v2: float) -> "FullModel":
        return FullModel(self.h0_energies, self.interaction + extra, self.rho0, self.v2 + extra_v2)


def random_interaction(n: int, v2: float, rng: np.random.Generator) -> np.ndarray:
    """Hermitian matrix: complex normal off-diagonal (variance v2), real normal diagonal (variance v2)."""
    s = math.sqrt(v2 / 2.0)
    z = rng.normal(0.0, s, size=(n, n)) + 1j * rng.normal(0.0, s, size=(n, n))
    upper = np.triu(z, 1)
    v = upper + upper.conj().T
    v[np.diag_indices(n)] = rng.normal(0.0, math.sqrt(v2), size=n)
    return v


def build_full_model(n: int, rho0: float, v2: float, seed=None,
                     size_cap: int = DEFAULT_SIZE_CAP) -> FullModel:
    """Equidistant H_0 of density rho0 centred on 0 plus a full random interaction.

    Warns with ScaleSeparationWarning when Gamma = 2 pi rho0 v2 >= Delta E.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if n > size_cap:
        raise ResourceCapError(f"dense model of size {n} exceeds cap {size_cap}")
    if not rho0 > 0:
        raise ValueError("rho0 must be positive")
    if v2 < 0:
        raise ValueError("v2 must be nonnegative")
    width = n / rho0
    energies = -0.5 * width + (np.arange(n) + 0.5) / rho0
    if v2 > 0:
        _check_scales(2.0 * math.pi * rho0 * v2, width)
        v = random_interaction(n, v2, _as_seed(seed).rng(5))
    else:
        v = np.zeros((n, n), dtype=complex)
    return FullModel(energies, v, float(rho0), float(v2))


def _edge_check(model: FullModel, k: int) -> None:
    if not 0 <= k < model.n:
        raise IndexError(f"basis index {k} out of range")
    margin = int(math.ceil(model.n_gamma))
    if min(k, model.n - 1 - k) < margin:
        raise ValueError(f"basis state {k} is within N_Gamma = {margin} levels of the spectral edge")


def basis_state_distribution(model: FullModel, k: int) -> StepDistribution:
    """Masses |<k|omega_nu>|^2 at the eigenvalues of H_0 + V."""
    _edge_check(model, k)
    w, u = model.eigh()
    m = np.abs(u[k]) ** 2
    return StepDistribution(w, m / m.sum())


def iqr_width(F: StepDistribution) -> float:
    """Q3 - Q1, which equals the full width Gamma for a Cauchy law."""
    cum = F._cum[1:]
    q1 = F.points[min(np.searchsorted(cum, 0.25), cum.size - 1)]
    q3 = F.points[min(np.searchsorted(cum, 0.75), cum.size - 1)]
    return float(q3 - q1)


def _central_states(model: FullModel, n_states: int):
    c = model.n // 2
    ks = [c + d for d in range(-(n_states // 2), n_states - n_states // 2)]
    for k in ks:
        _edge_check(model, k)
    return ks


def central_distribution(model: FullModel, n_states: int = 9) -> StepDistribution:
    """Equal-weight mixture of the central basis-state distributions, each shifted by -E_k."""
    ks = _central_states(model, n_states)
    pts, ms = [], []
    for k in ks:
        F = basis_state_distribution(model, k)
        pts.append(F.points - model.h0_energies[k])
        ms.append(F.masses / len(ks))
    u, inv = np.unique(np.concatenate(pts), return_inverse=True)
    w = np.bincount(inv, weights=np.concatenate(ms))
    return StepDistribution(u, w / w.sum())


@dataclass(frozen=True)
class ConvolutionReport:
    gamma1: float
    gamma2: float
    gamma_sum_fit: float
    gamma1_fit: float
    states: tuple

    @property
    def ratio(self) -> float:
        """Fitted width after both perturbations over the nominal Gamma_1."""
        return self.gamma_sum_fit / self.gamma1


def added_interaction_convolution_check(model: FullModel, seed2=None, n_states: int = 1,
                                        v2_prime: Optional[float] = None) -> ConvolutionReport:
    """Add an independent V' and fit the Cauchy width of central basis states by IQR.

    Widths are averaged over the ``n_states`` central basis states.  With
    V' ~ V the fitted width should be close to 2 Gamma.
    """
    if v2_prime is None:
        v2_prime = model.v2
    ks = _central_states(model, n_states)
    if v2_prime > 0:
        extra = random_interaction(model.n, v2_prime, _as_seed(seed2).rng(6))
    else:
        extra = np.zeros_like(model.interaction)
    _check_scales(2.0 * math.pi * model.rho0 * (model.v2 + v2_prime), model.n / model.rho0)
    h2 = model.with_interaction(extra, v2_prime)
    w1 = np.mean([iqr_width(basis_state_distribution(model, k)) for k in ks])
    w2 = np.mean([iqr_width(basis_state_distribution(h2, k)) for k in ks])
    gamma2 = 2.0 * math.pi * model.rho0 * v2_prime
    return ConvolutionReport(model.gamma, gamma2, float(w2), float(w1), tuple(ks))

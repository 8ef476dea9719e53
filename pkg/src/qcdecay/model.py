"""Reservoir spectra, random couplings and rank-1 decay models.

Energies are dimensionless working units with hbar = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "RandomSeed",
    "Spectrum",
    "Couplings",
    "DecayModel",
    "DerivedParams",
    "make_spectrum",
    "sample_couplings",
    "derived_params",
    "build_rank1_model",
    "rank1_model",
]

SPECTRUM_KINDS = ("equidistant", "poisson", "custom")


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RandomSeed:
    """Seed plus stream index; ``(seed, k)`` is the k-th ensemble member."""

    seed: int = 0
    stream_index: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")

    def rng(self, *purpose: int) -> np.random.Generator:
        # purpose words keep independent draws of one member apart
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index, *purpose))
        return np.random.default_rng(seq)

    def member(self, k: int) -> "RandomSeed":
        return RandomSeed(self.seed, k)


def _as_seed(seed) -> RandomSeed:
    if seed is None:
        return RandomSeed()
    if isinstance(seed, RandomSeed):
        return seed
    return RandomSeed(int(seed))


@dataclass(frozen=True, eq=False)
class Spectrum:
    energies: np.ndarray
    interval: Tuple[float, float]
    kind: str = "custom"

    def __post_init__(self):
        e = _frozen(self.energies, float)
        lo, hi = (float(self.interval[0]), float(self.interval[1]))
        if not hi > lo:
            raise ValueError("interval must be nonempty")
        if e.ndim != 1 or e.size < 1:
            raise ValueError("a spectrum needs at least one level")
        if np.any(np.diff(e) <= 0):
            raise ValueError("energies must be strictly increasing (degenerate levels not allowed)")
        if e[0] < lo or e[-1] > hi:
            raise ValueError("energies must lie inside the interval")
        if self.kind not in SPECTRUM_KINDS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "interval", (lo, hi))

    @property
    def n_levels(self) -> int:
        return int(self.energies.size)

    @property
    def width(self) -> float:
        return self.interval[1] - self.interval[0]

    @property
    def density(self) -> float:
        """Mean density of states rho_B = N_B / Delta E."""
        return self.n_levels / self.width

    @property
    def mean_spacing(self) -> float:
        return self.width / self.n_levels

    @property
    def center(self) -> float:
        return 0.5 * (self.interval[0] + self.interval[1])

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return (self.kind == other.kind and self.interval == other.interval
                and np.array_equal(self.energies, other.energies))


@dataclass(frozen=True, eq=False)
class Couplings:
    values: np.ndarray
    variance_v2: float

    def __post_init__(self):
        if not self.variance_v2 > 0:
            raise ValueError("variance_v2 must be positive")
        object.__setattr__(self, "values", _frozen(self.values, complex))
        object.__setattr__(self, "variance_v2", float(self.variance_v2))

    def __len__(self):
        return int(self.values.size)

    @property
    def strengths(self) -> np.ndarray:
        """|xi_j|^2."""
        return np.abs(self.values) ** 2

    def __eq__(self, other):
        if not isinstance(other, Couplings):
            return NotImplemented
        return self.variance_v2 == other.variance_v2 and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class DecayModel:
    """Single level ``level_energy`` coupled to a discrete reservoir."""

    level_energy: float
    spectrum: Spectrum
    couplings: Couplings
    notes: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.couplings) != self.spectrum.n_levels:
            raise ValueError(
                f"coupling count {len(self.couplings)} != reservoir size {self.spectrum.n_levels}")
        object.__setattr__(self, "level_energy", float(self.level_energy))

    @property
    def n_levels(self) -> int:
        return self.spectrum.n_levels

    @property
    def gamma(self) -> float:
        return derived_params(self).gamma

    def hamiltonian(self) -> np.ndarray:
        """Dense (N_B + 1)^2 arrowhead matrix, decaying level first."""
        n = self.n_levels
        h = np.zeros((n + 1, n + 1), dtype=complex)
        h[0, 0] = self.level_energy
        h[0, 1:] = self.couplings.values
        h[1:, 0] = np.conj(self.couplings.values)
        h[np.arange(1, n + 1), np.arange(1, n + 1)] = self.spectrum.energies
        return h


@dataclass(frozen=True)
class DerivedParams:
    gamma: float
    n_gamma: float
    omega_b: float
    rho_b: float


def make_spectrum(kind: str, n_levels: int, interval: Sequence[float],
                  seed=None, energies: Optional[Sequence[float]] = None) -> Spectrum:
    """Build a reservoir spectrum on ``interval``.

    ``equidistant`` puts levels at cell midpoints, ``poisson`` draws
    exponential gaps and rescales them affinely onto the interval, and
    ``custom`` validates user-supplied ``energies``.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise ValueError("interval must be nonempty")
    if kind == "custom":
        if energies is None:
            raise ValueError("custom spectrum needs energies")
        return Spectrum(np.asarray(energies, dtype=float), (lo, hi), "custom")
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    width = hi - lo
    if kind == "equidistant":
        e = lo + (np.arange(n_levels) + 0.5) * (width / n_levels)
    elif kind == "poisson":
        rng = _as_seed(seed).rng(0)
        gaps = rng.exponential(width / n_levels, size=n_levels + 1)
        e = lo + width * np.cumsum(gaps)[:-1] / gaps.sum()
    else:
        raise ValueError(f"unknown spectrum kind {kind!r}")
    return Spectrum(e, (lo, hi), kind)


def sample_couplings(variance_v2: float, n: int, seed=None) -> Couplings:
    """Complex normal couplings with <xi> = 0, <|xi|^2> = v2, <xi^2> = 0."""
    if not variance_v2 > 0:
        raise ValueError("variance_v2 must be positive")
    rng = _as_seed(seed).rng(1)
    scale = math.sqrt(variance_v2 / 2.0)
    z = rng.normal(0.0, scale, size=(max(n, 0), 2))
    return Couplings(z[:, 0] + 1j * z[:, 1], variance_v2)


def derived_params(model: DecayModel) -> DerivedParams:
    rho = model.spectrum.density
    gamma = 2.0 * math.pi * rho * model.couplings.variance_v2
    return DerivedParams(gamma=gamma, n_gamma=rho * gamma,
                         omega_b=model.spectrum.mean_spacing, rho_b=rho)


def build_rank1_model(level_energy: float, spectrum: Spectrum, couplings: Couplings) -> DecayModel:
    return DecayModel(level_energy, spectrum, couplings)


def rank1_model(n_levels: int, delta_e: float, *, gamma: Optional[float] = None,
                v2: Optional[float] = None, level_energy: float = 0.0,
                kind: str = "equidistant", seed=None) -> DecayModel:
    """Convenience constructor: interval centred on ``level_energy``.

    Exactly one of ``gamma`` and ``v2`` must be given.
    """
    if (gamma is None) == (v2 is None):
        raise ValueError("give exactly one of gamma and v2")
    seed = _as_seed(seed)
    interval = (level_energy - delta_e / 2.0, level_energy + delta_e / 2.0)
    spectrum = make_spectrum(kind, n_levels, interval, seed=seed)
    if v2 is None:
        v2 = gamma / (2.0 * math.pi * spectrum.density)
    couplings = sample_couplings(v2, n_levels, seed=seed)
    return DecayModel(level_energy, spectrum, couplings)

"""Renormalization-group transformations of rank-1 models and flow diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .cauchy import CauchyParams
from .errors import ResourceCapError
from .model import Couplings, DecayModel, Spectrum, _as_seed, derived_params
from .resolvent import Eigensystem, eigensystem
from .stats import golden_rule_fit, ks_distance

__all__ = [
    "RgFlowReport",
    "scale_model",
    "double_model",
    "rg_flow",
    "tail_function",
    "DEFAULT_LEVEL_CAP",
]

DEFAULT_LEVEL_CAP = 20000
COLLISION_GAP = 1e-10


@dataclass(frozen=True)
class RgFlowReport:
    steps: Tuple[int, ...]
    ks_distances: Tuple[float, ...]
    gamma_estimates: Tuple[float, ...]
    n_levels: Tuple[int, ...] = ()
    notes: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not (len(self.steps) == len(self.ks_distances) == len(self.gamma_estimates)):
            raise ValueError("report sequences must have equal lengths")


def scale_model(model: DecayModel, lam: float) -> DecayModel:
    """xi -> lam xi, E_j -> lam^2 E_j (interval too); E_s is kept."""
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    if lam == 1:
        return model
    s = model.spectrum
    l2 = lam * lam
    spec = Spectrum(s.energies * l2, (s.interval[0] * l2, s.interval[1] * l2), s.kind)
    c = model.couplings
    return DecayModel(model.level_energy, spec, Couplings(c.values * lam, c.variance_v2 * l2),
                      model.notes)


def _resolve_collisions(e: np.ndarray, width: float) -> Tuple[np.ndarray, int]:
    """Push levels closer than COLLISION_GAP * width apart, left to right."""
    tol = COLLISION_GAP * width
    e = e.copy()
    moved = 0
    for i in np.flatnonzero(np.diff(e) < tol):
        # earlier pushes may cascade, so recheck against the current neighbour
        if e[i + 1] - e[i] < tol:
            e[i + 1] = e[i] + tol
            moved += 1
    if moved:
        # a cascade can leave later gaps too small; one sweep fixes them in order
        for i in range(e.size - 1):
            if e[i + 1] - e[i] < tol:
                e[i + 1] = e[i] + tol
    return e, moved


def _companion_spectrum(s: Spectrum, rng: np.random.Generator) -> np.ndarray:
    lo, hi = s.interval
    n = s.n_levels
    if s.kind == "equidistant":
        # same lattice, rigidly shifted by a random fraction of a spacing
        step = s.width / n
        shift = rng.uniform(0.0, step)
        return np.sort(lo + np.mod(np.arange(n) * step + shift, s.width))
    gaps = rng.exponential(s.width / n, size=n + 1)
    return lo + s.width * np.cumsum(gaps)[:-1] / gaps.sum()


def double_model(model: DecayModel, seed=None, tag: int = 0) -> DecayModel:
    """Merge an independent same-density spectrum; V -> [V, V'] / sqrt(2).

    Equidistant reservoirs get a randomly shifted copy of their lattice,
    all others a Poisson companion.  ``tag`` separates successive
    doublings drawn from one seed.
    """
    seed = _as_seed(seed)
    s = model.spectrum
    c = model.couplings
    extra = _companion_spectrum(s, seed.rng(3, tag))
    scale = math.sqrt(c.variance_v2 / 2.0)
    z = seed.rng(4, tag).normal(0.0, scale, size=(s.n_levels, 2))
    energies = np.concatenate([s.energies, extra])
    values = np.concatenate([c.values, z[:, 0] + 1j * z[:, 1]]) / math.sqrt(2.0)
    order = np.argsort(energies, kind="stable")
    energies, values = energies[order], values[order]
    energies, moved = _resolve_collisions(energies, s.width)
    notes = model.notes
    if moved:
        notes = notes + (f"doubling {tag}: {moved} near-collisions jittered",)
    kind = s.kind if s.kind in ("equidistant", "poisson") else "custom"
    return DecayModel(model.level_energy, Spectrum(energies, s.interval, kind),
                      Couplings(values, c.variance_v2 / 2.0), notes)


def _evaluate(model: DecayModel) -> Tuple[float, float]:
    es = eigensystem(model)
    p = derived_params(model)
    ks = ks_distance(es, CauchyParams(model.level_energy, p.gamma), interval=model.spectrum.interval)
    rate = golden_rule_fit(model, es=es).rate
    return ks, rate


def rg_flow(model: DecayModel, k_steps: int, seed=None,
            level_cap: int = DEFAULT_LEVEL_CAP) -> RgFlowReport:
    """Step 0 is the input model; each further step doubles the reservoir."""
    if k_steps < 0:
        raise ValueError("k_steps must be >= 0")
    final = model.n_levels * 2 ** k_steps
    if final > level_cap:
        raise ResourceCapError(f"{k_steps} doublings reach N_B = {final} > cap {level_cap}")
    seed = _as_seed(seed)
    steps: List[int] = []
    ks: List[float] = []
    rates: List[float] = []
    sizes: List[int] = []
    current = model
    for k in range(k_steps + 1):
        if k > 0:
            current = double_model(current, seed, tag=k)
        d, r = _evaluate(current)
        steps.append(k)
        ks.append(d)
        rates.append(r)
        sizes.append(current.n_levels)
    return RgFlowReport(tuple(steps), tuple(ks), tuple(rates), tuple(sizes), current.notes)


def tail_function(es: Eigensystem, x):
    """T(x) = 1 - Phi_A(x, 0), the weight strictly above x."""
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    k = np.searchsorted(es.eigenvalues, xx, side="right")
    tail = np.concatenate([np.cumsum(es.weights[::-1])[::-1], [0.0]])
    out = np.clip(tail[k], 0.0, None)
    return out[0] if np.ndim(x) == 0 else out

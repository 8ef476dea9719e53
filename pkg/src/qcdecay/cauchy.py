"""Cauchy (Lorentz) law: kernel, semigroup, tails, centering and the CF limit.

Characteristic functions use the convention chi(t) = E[exp(-i X t)].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .model import _as_seed

__all__ = [
    "CauchyParams",
    "StepDistribution",
    "CharacteristicFn",
    "cauchy_pdf",
    "cauchy_cdf",
    "cauchy_cf",
    "convolve_cauchy",
    "numeric_convolution_error",
    "centering_constant",
    "iterate_cf_limit",
    "tail_limit",
    "example3_distribution",
    "example3_tail_variance",
    "step_cf",
    "cf_sup_distance",
    "discretize_cauchy",
]


@dataclass(frozen=True)
class CauchyParams:
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be nonnegative (0 flags the step-function limit)")

    def cdf(self, y):
        return cauchy_cdf(y, self)

    def pdf(self, x):
        return cauchy_pdf(x, self)


@dataclass(frozen=True, eq=False)
class StepDistribution:
    """Point masses ``masses`` at increasing ``points``."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        if p.shape != m.shape or p.ndim != 1:
            raise ValueError("points and masses must be 1-d of equal length")
        if np.any(np.diff(p) <= 0):
            raise ValueError("points must be strictly increasing")
        if np.any(m < 0):
            raise ValueError("masses must be nonnegative")
        if abs(m.sum() - 1.0) > 1e-10:
            raise ValueError(f"masses sum to {m.sum()!r}, not 1")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(m)]))

    def cdf(self, x):
        """Right-continuous F(x) = mass at points <= x."""
        k = np.searchsorted(self.points, np.asarray(x, dtype=float), side="right")
        return self._cum[k]

    def mass_below(self, x):
        """Mass at points strictly below x (left limit of the cdf)."""
        k = np.searchsorted(self.points, np.asarray(x, dtype=float), side="left")
        return self._cum[k]

    def cf(self, t):
        return step_cf(self, t)


class CharacteristicFn:
    """Lazy evaluator t -> complex with a description tag."""

    def __init__(self, evaluator: Callable, description: str = ""):
        self._f = evaluator
        self.description = description

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.asarray(self._f(t), dtype=complex)

    def __repr__(self):
        return f"CharacteristicFn({self.description!r})"


def cauchy_pdf(x, p: CauchyParams):
    if not p.width > 0:
        raise ValueError("pdf needs a positive width")
    x = np.asarray(x, dtype=float)
    return (p.width / (2.0 * math.pi)) / ((x - p.center) ** 2 + p.width ** 2 / 4.0)


def cauchy_cdf(y, p: CauchyParams):
    y = np.asarray(y, dtype=float)
    if p.width == 0:
        return np.where(y < p.center, 0.0, np.where(y > p.center, 1.0, 0.5))
    return 0.5 + np.arctan(2.0 * (y - p.center) / p.width) / math.pi


def cauchy_cf(t, p: CauchyParams):
    t = np.asarray(t, dtype=float)
    return np.exp(-1j * p.center * t - 0.5 * p.width * np.abs(t))


def cauchy_cf_fn(p: CauchyParams) -> CharacteristicFn:
    return CharacteristicFn(lambda t: cauchy_cf(t, p), f"cauchy(a={p.center}, width={p.width})")


def convolve_cauchy(p1: CauchyParams, p2: CauchyParams) -> CauchyParams:
    if not (p1.width > 0 and p2.width > 0):
        raise ValueError("widths must be positive")
    return CauchyParams(p1.center + p2.center, p1.width + p2.width)


def numeric_convolution_error(p1: CauchyParams, p2: CauchyParams,
                              step_fraction: float = 1 / 50, span: float = 50.0) -> float:
    """Sup-error of a grid convolution of two pdfs against the semigroup result.

    Grid step ``step_fraction * min width`` over ``+-span * max width``
    around each centre; the error is taken where the result is supported
    by both truncated factors.
    """
    h = step_fraction * min(p1.width, p2.width)
    big = span * max(p1.width, p2.width)
    n = int(math.ceil(big / h))
    x = (np.arange(-n, n + 1) * h)
    f1 = cauchy_pdf(x + p1.center, CauchyParams(p1.center, p1.width))
    f2 = cauchy_pdf(x + p2.center, CauchyParams(p2.center, p2.width))
    # trapezoid rule on a uniform grid via full discrete convolution
    conv = np.convolve(f1, f2) * h
    y = np.arange(-2 * n, 2 * n + 1) * h + p1.center + p2.center
    ref = cauchy_pdf(y, convolve_cauchy(p1, p2))
    keep = np.abs(y - p1.center - p2.center) <= big
    return float(np.max(np.abs(conv[keep] - ref[keep])))


def step_cf(F: StepDistribution, t, chunk: int = 1 << 20):
    """sum_k m_k exp(-i x_k t), evaluated in chunks."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t.size, dtype=complex)
    step = max(1, chunk // max(F.points.size, 1))
    for s in range(0, t.size, step):
        ph = np.outer(t[s:s + step], F.points)
        out[s:s + step] = (np.cos(ph) - 1j * np.sin(ph)) @ F.masses
    return out


def centering_constant(F: Union[StepDistribution, CharacteristicFn, CauchyParams], k: int,
                       gamma_scale: float = 1.0) -> float:
    """beta_k = gamma * int sin(x / (k gamma)) dF(x).

    For a CF-backed distribution this is gamma * Im chi(-1/(k gamma)).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    u = 1.0 / (k * gamma_scale)
    if isinstance(F, StepDistribution):
        return float(gamma_scale * np.dot(F.masses, np.sin(F.points * u)))
    if isinstance(F, CauchyParams):
        F = cauchy_cf_fn(F)
    return float(gamma_scale * np.imag(F(-u)))


def iterate_cf_limit(chi, n: int, gamma_scale: float = 1.0, beta=None) -> CharacteristicFn:
    """t -> [chi(t/n) exp(i beta_n t)]^n, composed lazily.

    ``chi`` may be a CharacteristicFn, a StepDistribution or CauchyParams;
    ``beta`` overrides the computed centering constant.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(chi, StepDistribution):
        dist = chi
        base = CharacteristicFn(lambda t: step_cf(dist, t), "step distribution")
    elif isinstance(chi, CauchyParams):
        dist = chi
        base = cauchy_cf_fn(chi)
    else:
        dist = chi
        base = chi
    if beta is None:
        beta = centering_constant(dist, n, gamma_scale)

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        return (base(t / n) * np.exp(1j * beta * t)) ** n

    return CharacteristicFn(evaluate, f"[{getattr(base, 'description', 'cf')}](t/{n}) centred, ^{n}")


def cf_sup_distance(chi: CharacteristicFn, gamma: float, t_max: float, n_points: int = 401) -> float:
    """sup_{|t| <= t_max} |chi(t) - exp(-gamma |t| / 2)|."""
    t = np.linspace(-t_max, t_max, n_points)
    return float(np.max(np.abs(chi(t) - np.exp(-0.5 * gamma * np.abs(t)))))


def tail_limit(F, x_probe: float):
    """(x [1 - F(x)], x F(-x)) with 1 - F(x) the mass at or above x.

    ``F`` is a StepDistribution or anything with a ``cdf`` method.
    """
    if not x_probe > 0:
        raise ValueError("x_probe must be positive")
    x = float(x_probe)
    if isinstance(F, StepDistribution):
        upper = 1.0 - F.mass_below(x)
        lower = F.cdf(-x)
    else:
        upper = 1.0 - F.cdf(x)
        lower = F.cdf(-x)
    return float(x * upper), float(x * lower)


def example3_distribution(v: float, omega: float, k_max: int = 10**6, randomized: bool = False,
                          seed=None) -> StepDistribution:
    """Lowest-order occupation numbers p_k = v^2 / (k omega)^2 on the lattice k omega.

    The tail mass beyond ``k_max`` is put on the outermost points.  With
    ``randomized`` each v^2 is replaced by |xi_k|^2, complex normal.
    """
    if not (v > 0 and omega > 0):
        raise ValueError("v and omega must be positive")
    if v * v > 3.0 * omega * omega / math.pi ** 2:
        raise ValueError("v^2 <= 3 omega^2 / pi^2 is required so that p_0 >= 0")
    k = np.arange(1, k_max + 1, dtype=float)
    inv_k2 = 1.0 / (k * k)
    if randomized:
        rng = _as_seed(seed).rng(2)
        z = rng.normal(0.0, v / math.sqrt(2.0), size=(2, 2, k_max))
        s_pos = z[0, 0] ** 2 + z[0, 1] ** 2
        s_neg = z[1, 0] ** 2 + z[1, 1] ** 2
        # the truncated tail carries its mean weight
        tail = v * v * (math.pi ** 2 / 6.0 - inv_k2.sum())
    else:
        s_pos = s_neg = np.full(k_max, v * v)
        tail = v * v * (math.pi ** 2 / 6.0 - inv_k2.sum())
    p_pos = s_pos * inv_k2 / omega ** 2
    p_neg = s_neg * inv_k2 / omega ** 2
    p_pos[-1] += tail / omega ** 2
    p_neg[-1] += tail / omega ** 2
    p0 = 1.0 - p_pos.sum() - p_neg.sum()
    if p0 < 0:
        raise ValueError("realization has negative p_0; reduce v")
    points = np.concatenate([-k[::-1] * omega, [0.0], k * omega])
    masses = np.concatenate([p_neg[::-1], [p0], p_pos])
    return StepDistribution(points, masses)


def example3_tail_variance(v: float, omega: float, x_values, n_realizations: int = 2000,
                           k_max: int = 4000, seed=None):
    """Monte Carlo ensemble variance of the random tail T(x) = sum_{k omega >= x} |xi_k|^2 / (k omega)^2.

    Returns (variance, mean) arrays over ``x_values``.
    """
    seed = _as_seed(seed)
    x_values = np.asarray(x_values, dtype=float)
    k = np.arange(1, k_max + 1, dtype=float)
    inv = 1.0 / (k * omega) ** 2
    first = np.ceil(x_values / omega - 1e-12).astype(int)  # smallest k with k omega >= x
    samples = np.empty((n_realizations, x_values.size))
    for r in range(n_realizations):
        rng = seed.member(r).rng(2)
        z = rng.normal(0.0, v / math.sqrt(2.0), size=(2, k_max))
        terms = (z[0] ** 2 + z[1] ** 2) * inv
        tail_sums = np.cumsum(terms[::-1])[::-1]
        samples[r] = tail_sums[first - 1]
    return samples.var(axis=0, ddof=1), samples.mean(axis=0)


def discretize_cauchy(p: CauchyParams, half_span: float, n_points: int = 200001) -> StepDistribution:
    """Cauchy law truncated to +-half_span around its centre, as point masses.

    Points sit on an arcsinh-spaced grid; cell masses come from the exact
    cdf and the truncated tails are renormalized away.
    """
    u = np.linspace(-1.0, 1.0, n_points)
    scale = p.width
    s = np.arcsinh(half_span / scale)
    edges = p.center + scale * np.sinh(u * s)
    cdf = cauchy_cdf(edges, p)
    cell = np.diff(cdf)
    mids = 0.5 * (edges[1:] + edges[:-1])
    return StepDistribution(mids, cell / cell.sum())

import math

import numpy as np
import pytest

from qcdecay.cauchy import CauchyParams, StepDistribution, cauchy_cdf
from qcdecay.model import Couplings, DecayModel, RandomSeed, make_spectrum, rank1_model
from qcdecay.resolvent import eigensystem
from qcdecay.stats import (chebyshev_bound, default_rate_window, ensemble_imh_stats,
                           exceedance_frequency, fit_decay_rate, golden_rule_fit, imh_samples, kappa,
                           ks_distance, uniformity_couplings, uniformity_spectrum)


def test_kappa_and_chebyshev():
    assert kappa(15.0, 1.0) == pytest.approx(1 / math.sqrt(30 * math.pi))
    assert chebyshev_bound(1.0, 100.0, 0.5) == pytest.approx(1 / (200 * math.pi))
    assert chebyshev_bound(1.0, 0.01, 0.01) == 1.0
    with pytest.raises(ValueError):
        kappa(0.0, 1.0)


def test_ensemble_mean_and_variance():
    spec = make_spectrum("equidistant", 2000, (-10.0, 10.0))
    v2 = 1.0 / (2 * math.pi * spec.density)
    eps = 30 / spec.density
    s = ensemble_imh_stats(spec, v2, 0.0, eps, 400, seed=1)
    assert s.sample_mean == pytest.approx(s.predicted_mean, rel=4 * kappa(spec.density, eps) / 20)
    assert 0.7 < s.sample_variance / s.predicted_variance < 1.4
    assert s.relative_fluctuation == pytest.approx(kappa(spec.density, eps), rel=0.3)


def test_imh_samples_deterministic_and_member_independent():
    spec = make_spectrum("equidistant", 100, (-5.0, 5.0))
    a = imh_samples(spec, 0.01, 0.0, 0.5, 5, seed=2)
    b = imh_samples(spec, 0.01, 0.0, 0.5, 5, seed=2)
    np.testing.assert_array_equal(a, b)
    assert np.unique(a).size == 5
    c = imh_samples(spec, 0.01, 0.0, 0.5, 5, seed=2, redraw_spectrum=True)
    assert c.shape == (5,)


def test_chebyshev_bound_holds_empirically():
    spec = make_spectrum("equidistant", 2000, (-10.0, 10.0))
    gamma = 1.0
    v2 = gamma / (2 * math.pi * spec.density)
    n_eps = 20
    eps = n_eps / spec.density
    samples = imh_samples(spec, v2, 0.0, eps, 400, seed=5)
    delta = 0.1
    freq = exceedance_frequency(samples, 0.5 * gamma, delta)
    assert freq <= chebyshev_bound(gamma, n_eps, delta) + 0.05


def test_uniformity():
    spec = make_spectrum("equidistant", 2000, (-10.0, 10.0))
    assert uniformity_spectrum(spec, 50 / spec.density) <= 0.02
    k = kappa(spec.density, 50 / spec.density)
    poi = [uniformity_spectrum(make_spectrum("poisson", 2000, (-10.0, 10.0), seed=s), 50 / spec.density)
           for s in range(5)]
    # max over ~400 probes of an O(kappa) deviation
    assert all(0.5 * k < u < 4 * k for u in poi)
    # uniform couplings reduce to the spectrum diagnostic
    v2 = 0.01
    flat = DecayModel(0.0, spec, Couplings(np.full(2000, math.sqrt(v2)), v2))
    assert uniformity_couplings(flat, 0.5) == pytest.approx(uniformity_spectrum(spec, 0.5), abs=1e-12)
    # random couplings: shrinks like lambda under densification
    dev = []
    for lam in (1.0, 0.5, 0.25):
        n = int(500 / lam ** 2)
        m = rank1_model(n, 20.0, v2=0.01 * lam ** 2, seed=1)
        dev.append(uniformity_couplings(m, 0.5))
    assert dev[0] > dev[1] > dev[2]


def test_ks_exact_for_steps():
    F = StepDistribution([0.0], [1.0])
    p = CauchyParams(0.0, 1.0)
    # the jump at 0 goes from 0 to 1 against G(0) = 1/2
    assert ks_distance(F, p, range=(-1.0, 1.0)) == pytest.approx(0.5)
    # grid fallback for two continuous laws
    q = CauchyParams(0.5, 1.0)
    grid = np.linspace(-5, 5, 20001)
    ref = np.max(np.abs(cauchy_cdf(grid, p) - cauchy_cdf(grid, q)))
    assert ks_distance(p, q, range=(-5, 5)) == pytest.approx(ref)
    with pytest.raises(ValueError):
        ks_distance(F, p)


def test_ks_step_matches_dense_grid():
    m = rank1_model(300, 20.0, gamma=1.41, seed=3)
    es = eigensystem(m)
    p = CauchyParams(0.0, 1.41)
    exact = ks_distance(es, p, interval=m.spectrum.interval)
    x = np.linspace(-5, 5, 400001)
    cum = np.concatenate([[0.0], np.cumsum(es.weights)])
    grid = np.max(np.abs(cum[np.searchsorted(es.eigenvalues, x, side="right")] - cauchy_cdf(x, p)))
    assert grid <= exact + 1e-12
    assert exact - grid < 1e-3


def test_fit_decay_rate_on_exact_exponential():
    t = np.linspace(0, 3, 301)
    fit = fit_decay_rate(t, 2.0 * np.exp(-1.3 * t), (0.5, 2.5))
    assert fit.rate == pytest.approx(1.3, rel=1e-12)
    assert fit.intercept == pytest.approx(math.log(2.0))
    with pytest.raises(ValueError):
        fit_decay_rate(t, np.exp(-t), (0.5, 4.0))
    with pytest.raises(ValueError):
        fit_decay_rate(t, np.zeros_like(t), (0.5, 2.5))


def test_default_window():
    lo, hi = default_rate_window(20.0, 1.41, 21.15)
    assert lo == pytest.approx(0.15)
    assert hi == pytest.approx(2 / 1.41)
    assert default_rate_window(20.0, 1.0, 3.0)[1] == pytest.approx(math.log(3.0))


def test_golden_rule_fit_median():
    rates = [golden_rule_fit(rank1_model(300, 20.0, gamma=1.41, seed=s)).rate for s in range(10)]
    assert np.median(rates) == pytest.approx(1.41, rel=0.15)


def test_fit_deterministic_by_seed():
    a = golden_rule_fit(rank1_model(300, 20.0, gamma=1.41, seed=RandomSeed(4))).rate
    b = golden_rule_fit(rank1_model(300, 20.0, gamma=1.41, seed=4)).rate
    assert a == b

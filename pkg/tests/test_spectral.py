import numpy as np
import pytest

from bifbm import BifBmParams
from bifbm.errors import ParameterError, QuadratureError
from bifbm.estimators import fit_scaling
from bifbm.spectral import (
    second_moment,
    spectral_density,
    spectral_density_filon,
    spectral_table,
    tail_mass,
    truncation_point,
)

BM = BifBmParams(0.5, 1.0)

# max over u in {2, 4, ..., 64} of the scaled masses, frozen from a scan
TAIL_C = {(0.5, 0.8): 0.40485, (0.75, 0.4): 0.58126, (0.25, 1.0): 0.39894}
MOMENT_C = {(0.5, 0.8): 0.26856, (0.75, 0.4): 0.24846, (0.25, 1.0): 0.13287}
U = 2.0 ** np.arange(1, 7)


def ou_density(lam):
    # Lamperti transform of Brownian motion is OU with r(t) = exp(-|t|/2)
    return (0.5 / np.pi) / (0.25 + lam**2)


@pytest.mark.parametrize("lam", [0.0, 0.3, 2.0, 17.0, 250.0, 4000.0])
def test_bm_closed_form_both_routes(lam):
    ref = ou_density(lam)
    assert spectral_density(lam, BM, tol=1e-14) == pytest.approx(ref, rel=1e-9)
    assert spectral_density_filon([lam], BM)[0] == pytest.approx(ref, rel=1e-8)


def test_bm_tail_mass_closed_form():
    for u in (0.5, 2.0, 10.0):
        assert tail_mass(u, BM) == pytest.approx(1 - 2 / np.pi * np.arctan(2 * u), abs=1e-9)


def test_even_and_positive():
    p = BifBmParams(0.6, 0.7)
    for lam in (0.5, 3.0, 40.0):
        assert spectral_density(-lam, p) == spectral_density(lam, p) > 0


def test_routes_agree_off_bm():
    p = BifBmParams(0.625, 0.8)
    lams = np.array([0.1, 1.0, 10.0, 100.0, 1000.0])
    a = np.array([spectral_density(x, p, tol=1e-14) for x in lams])
    b = spectral_density_filon(lams, p)
    np.testing.assert_allclose(a, b, rtol=1e-6)


@pytest.mark.parametrize("h,k", [(0.5, 0.5), (0.625, 0.8), (0.9375, 0.8)])
def test_tail_slope(h, k):
    p = BifBmParams(h, k)
    lams = np.geomspace(1e2, 1e4, 7)
    f = spectral_density_filon(lams, p)
    assert fit_scaling(np.log(lams), np.log(f)).slope == pytest.approx(-(1 + 2 * p.hk), abs=0.05)


@pytest.mark.parametrize("hk_pair", sorted(TAIL_C))
def test_truncated_mass_bounds(hk_pair):
    p = BifBmParams(*hk_pair)
    tm = np.array([tail_mass(u, p) for u in U])
    sm = np.array([second_moment(u, p) for u in U])
    assert np.all(tm <= TAIL_C[hk_pair] * U ** (-2 * p.hk) * (1 + 1e-4))
    assert np.all(sm <= MOMENT_C[hk_pair] * U ** (2 * (1 - p.hk)) * (1 + 1e-4))
    # the constants are attained, not loose
    assert np.max(tm * U ** (2 * p.hk)) == pytest.approx(TAIL_C[hk_pair], rel=1e-3)


def test_truncation_point():
    p = BifBmParams(0.75, 1.0)  # decay 1 - HK = 0.25 is below beta = 0.75
    T = truncation_point(p, 1e-12)
    assert np.exp(-p.decay_rate * T) <= 1e-12 * (1 + 1e-9)
    assert truncation_point(BifBmParams(0.5, 0.5), 0.5) == 20.0
    with pytest.raises(ParameterError):
        truncation_point(p, 0.0)


def test_nonconvergence_raises():
    with pytest.raises(QuadratureError):
        spectral_density(3.0, BifBmParams(0.3, 0.6), tol=1e-300, order=2, max_order=4)


def test_table():
    p = BifBmParams(0.6, 0.5)
    tab = spectral_table(p, [0.5, 1.0, 2.0])
    assert np.all(tab.values > 0) and tab.beta_decay == p.beta_decay
    with pytest.raises(ParameterError):
        spectral_table(p, [2.0, 1.0])

"""Direct scattering: transfer products, circle identities, continuation,
spectrum search, and norming constants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.lattice import LatticeState, gaussian_pulse
from artifact.scattering import (
    CircleGrid,
    DiscreteSpectrum,
    PoleData,
    SpectralSingularityError,
    continue_a,
    find_spectrum,
    norming_constants,
    refined_scattering,
    transfer_scattering,
)

RNG = np.random.default_rng(715)


def _single_site(c, half=4):
    q = np.zeros(2 * half + 1, dtype=complex)
    q[half] = c
    return LatticeState(-half, q)


# ----------------------------------------------------------------------------
# grid and data types
# ----------------------------------------------------------------------------

def test_grid_uniform_basics():
    g = CircleGrid.uniform(64)
    assert len(g) == 64
    assert np.max(np.abs(np.abs(g.points) - 1.0)) <= 1e-15
    assert not g.adaptive


def test_grid_validation():
    with pytest.raises(ValueError):
        CircleGrid(thetas=np.array([0.0, 0.0]), points=np.array([1.0, 1.0 + 0j]))
    with pytest.raises(ValueError):
        CircleGrid(thetas=np.array([0.0, 7.0]), points=np.exp(1j * np.array([0.0, 7.0])))
    with pytest.raises(ValueError):
        CircleGrid(thetas=np.array([0.1]), points=np.array([1.01 * np.exp(0.1j)]))


def test_spectrum_type_validation():
    with pytest.raises(ValueError):
        DiscreteSpectrum([PoleData(lam=0.5 + 0.1j, order=1)])
    with pytest.raises(ValueError):
        DiscreteSpectrum([PoleData(lam=1.5j, order=0)])
    with pytest.raises(ValueError):
        DiscreteSpectrum([PoleData(lam=1.5j, order=1), PoleData(lam=1.5j, order=1)])
    s = DiscreteSpectrum([PoleData(lam=1.5j, order=1), PoleData(lam=2.0, order=2)])
    assert s.total_order == 3


# ----------------------------------------------------------------------------
# circle data
# ----------------------------------------------------------------------------

def test_zero_potential_trivial():
    st0 = LatticeState(-8, np.zeros(17, dtype=complex))
    d = transfer_scattering(st0, CircleGrid.uniform(128))
    assert np.all(d.a_vals == 1.0)
    assert np.all(d.b_vals == 0.0)
    assert np.all(d.r_vals == 0.0)
    assert d.c_inf == 1.0


def test_single_site_unit():
    d = transfer_scattering(_single_site(1.0), CircleGrid.uniform(256))
    lam = d.grid.points
    assert np.max(np.abs(d.a_vals - 1.0)) < 1e-12
    assert np.max(np.abs(d.b_vals + lam)) < 1e-12
    assert np.max(np.abs(d.r_vals + lam)) < 1e-12


def test_single_site_generic_amplitude():
    c = (0.6 - 1.1j) * np.exp(0.3j)
    d = transfer_scattering(_single_site(c), CircleGrid.uniform(128))
    lam = d.grid.points
    assert np.max(np.abs(d.a_vals - 1.0)) < 1e-12
    assert np.max(np.abs(d.b_vals + np.conj(c) * lam)) < 1e-12
    dev = np.abs(np.abs(d.a_vals) ** 2 + np.abs(d.b_vals) ** 2 - (1 + abs(c) ** 2))
    assert np.max(dev) < 1e-12


def test_unitarity_identity_gaussian():
    st = gaussian_pulse(0.4, 6.0, 40)
    d = transfer_scattering(st, CircleGrid.uniform(2 ** 10))
    dev = np.abs(np.abs(d.a_vals) ** 2 + np.abs(d.b_vals) ** 2 - d.c_inf)
    assert np.max(dev) < 1e-10


def test_branch_independence():
    # recompute the product with the negated square root; a and b must not move
    st = gaussian_pulse(0.7, 4.0, 20)
    g = CircleGrid.uniform(64)
    d = transfer_scattering(st, g)
    sites = st.sites
    amps = st.q
    keep = np.abs(amps) > 1e-12
    sites, amps = sites[keep.argmax():len(keep) - keep[::-1].argmax()], \
        amps[keep.argmax():len(keep) - keep[::-1].argmax()]
    z = -np.sqrt(g.points)
    m = np.tile(np.eye(2, dtype=complex)[None], (len(g), 1, 1))
    for qn in amps:
        f = np.zeros_like(m)
        f[:, 0, 0] = z
        f[:, 0, 1] = qn
        f[:, 1, 0] = -np.conj(qn)
        f[:, 1, 1] = 1.0 / z
        m = f @ m
    n_min, n_max = int(sites[0]), int(sites[-1])
    a_neg = m[:, 0, 0] * z ** (n_min - n_max - 1)
    b_neg = m[:, 1, 0] * z ** (n_min + n_max + 2)
    assert np.max(np.abs(a_neg - d.a_vals)) < 1e-12
    assert np.max(np.abs(b_neg - d.b_vals)) < 1e-12


def test_spectral_singularity_detected():
    # two equal sites of unit modulus put the zero of a right on the circle
    q = np.zeros(5, dtype=complex)
    q[2] = np.exp(0.4j)
    q[3] = np.exp(0.4j)
    with pytest.raises(SpectralSingularityError):
        transfer_scattering(LatticeState(-2, q), CircleGrid.uniform(64))


def test_truncation_bound_recorded():
    st = gaussian_pulse(0.5, 3.0, 60)  # tails far below 1e-12
    d = transfer_scattering(st, CircleGrid.uniform(64))
    assert 0.0 < d.truncation_bound < 1e-10
    hard = st.copy()
    hard.q[np.abs(hard.q) <= 1e-12] = 0.0
    d2 = transfer_scattering(hard, CircleGrid.uniform(64))
    assert np.max(np.abs(d.a_vals - d2.a_vals)) < 1e-11


def test_r_smoothness_proxy():
    # weighted Fourier mass of r stabilizes under refinement
    st = gaussian_pulse(0.8, 5.0, 30)

    def h1_mass(m):
        d = transfer_scattering(st, CircleGrid.uniform(m))
        rhat = np.fft.fft(d.r_vals) / m
        k = np.fft.fftfreq(m, d=1.0 / m)
        return float(np.sum((k ** 2) * np.abs(rhat) ** 2))

    m1, m2 = h1_mass(2 ** 9), h1_mass(2 ** 10)
    assert abs(m2 - m1) < 0.01 * abs(m1)


def test_refined_scattering_stabilizes():
    st = gaussian_pulse(0.4, 4.0, 20)
    d = refined_scattering(st, start=256, tol=1e-9)
    finer = transfer_scattering(st, CircleGrid.uniform(2 * len(d.grid)))
    assert np.max(np.abs(finer.a_vals[::2] - d.a_vals)) < 1e-9


@given(st.floats(0.05, 0.9), st.floats(-np.pi, np.pi), st.floats(0.05, 0.9))
@settings(max_examples=25, deadline=None)
def test_unitarity_random_two_site(m1, ph, m2):
    q = np.zeros(7, dtype=complex)
    q[3] = m1 * np.exp(1j * ph)
    q[4] = m2
    state = LatticeState(-3, q)
    d = transfer_scattering(state, CircleGrid.uniform(64))
    dev = np.abs(np.abs(d.a_vals) ** 2 + np.abs(d.b_vals) ** 2 - d.c_inf)
    assert np.max(dev) < 1e-12


# ----------------------------------------------------------------------------
# continuation
# ----------------------------------------------------------------------------

def test_continue_a_trivial_and_single_site():
    st0 = LatticeState(-8, np.zeros(17, dtype=complex))
    assert continue_a(st0, 3.7 + 0.2j) == 1.0
    assert abs(continue_a(_single_site(1.0), 4.0) - 1.0) < 1e-14


def test_continue_a_large_lambda_decay():
    st = gaussian_pulse(0.4, 6.0, 40)
    d3 = abs(continue_a(st, 1e3) - 1.0)
    d4 = abs(continue_a(st, 1e4) - 1.0)
    assert d3 < 1e-2
    assert d4 < 0.2 * d3


def test_continue_a_matches_circle_limit():
    st = gaussian_pulse(0.6, 4.0, 24)
    g = CircleGrid.uniform(64)
    d = transfer_scattering(st, g)
    off = continue_a(st, (1.0 + 1e-7) * g.points)
    assert np.max(np.abs(off - d.a_vals)) < 1e-4


# ----------------------------------------------------------------------------
# spectrum search and norming constants
# ----------------------------------------------------------------------------

def _laurent_zero_oracle(state, r_min=1.02):
    """All zeros of a with |lambda| > r_min via the Laurent-polynomial roots."""
    m = 4096
    lam = np.exp(2j * np.pi * np.arange(m) / m)
    av = continue_a(state, lam)
    ck = np.fft.ifft(av)
    mag = np.abs(ck)
    deg = max(k for k in range(m // 2) if mag[k] > 1e-10)
    roots_mu = np.roots(ck[: deg + 1][::-1])
    roots = 1.0 / roots_mu[np.abs(roots_mu) > 1e-12]
    return np.sort_complex(roots[np.abs(roots) > r_min])


def test_find_spectrum_empty():
    assert find_spectrum(LatticeState(-4, np.zeros(9, complex)), (1.05, 3.0)).poles == []
    small = gaussian_pulse(0.05, 3.0, 16)
    assert find_spectrum(small, (1.05, 3.0)).poles == []


def test_find_spectrum_matches_root_oracle():
    state = gaussian_pulse(1.2, 3.0, 24)
    oracle = _laurent_zero_oracle(state)
    inside = oracle[(np.abs(oracle) > 1.05) & (np.abs(oracle) < 5.0)]
    spec = find_spectrum(state, (1.05, 5.0))
    found = np.sort_complex(np.array([p.lam for p in spec.poles]))
    assert len(found) == len(inside)
    assert np.max(np.abs(found - inside)) < 1e-8
    # winding count equals the zero count
    assert spec.total_order == len(inside)
    for p in spec.poles:
        assert abs(continue_a(state, p.lam)) < 1e-10


def test_norming_constants_selfconsistent():
    state = gaussian_pulse(1.2, 3.0, 24)
    spec = find_spectrum(state, (1.05, 5.0))
    assert spec.poles
    for p in spec.poles:
        betas, cond = norming_constants(state, (p.lam, p.order), return_cond=True)
        assert betas.shape == (p.order,)
        assert abs(betas[0]) > 1e-10
        assert cond < 1e6


def test_norming_mirror_symmetry():
    state = gaussian_pulse(1.2, 3.0, 24)
    spec = find_spectrum(state, (1.05, 5.0))
    for p in spec.poles:
        b = norming_constants(state, (p.lam, p.order))
        bm = norming_constants(state, (1.0 / np.conj(p.lam), p.order))
        assert abs(bm[0] + np.conj(b[0])) < 1e-8 * max(1.0, abs(b[0]))


def test_norming_rejects_vanishing_leading_coefficient():
    # a regular point is not a zero of a; the stacked system then has no
    # consistent solution with a nonzero leading coefficient
    state = gaussian_pulse(0.3, 3.0, 16)
    with pytest.raises(ValueError):
        norming_constants(state, (2.0 + 2.0j, 1))

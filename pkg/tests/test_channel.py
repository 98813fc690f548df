import math

import numpy as np
import pytest

from omnistbc.channel import (
    ChannelSpec,
    CovarianceModel,
    PasSpec,
    covariance_factor,
    covariance_for,
    dft_domain_leakage,
    draw_channel,
    effective_channel,
    isotropy_deviation,
    one_ring_covariance,
    steering_vector,
)
from omnistbc.precoding import precoder_for_code

SIGMA5 = math.radians(5.0)


def test_steering_vector():
    np.testing.assert_allclose(steering_vector(4, 0.5, 0.0), np.ones(4))
    np.testing.assert_allclose(
        steering_vector(2, 0.5, math.pi / 2), [1, -1], atol=1e-12
    )
    v = steering_vector(16, 1 / math.sqrt(3), 0.42)
    np.testing.assert_allclose(np.abs(v), 1.0, atol=1e-14)


def test_pas_spec_validation():
    with pytest.raises(ValueError):
        PasSpec(0.0, 0.0)
    with pytest.raises(ValueError):
        PasSpec(2.0, SIGMA5)
    with pytest.raises(ValueError):
        ChannelSpec(0)


@pytest.mark.parametrize("theta0_deg", np.linspace(-60, 60, 13))
@pytest.mark.parametrize("sigma_deg", [2.0, 5.0, 10.0])
def test_covariance_invariants_grid(theta0_deg, sigma_deg):
    model = covariance_for(32, 1 / math.sqrt(3), math.radians(theta0_deg), math.radians(sigma_deg))
    r = model.matrix
    assert np.abs(r - r.conj().T).max() < 1e-12
    assert np.abs(np.diagonal(r) - 1).max() < 1e-9
    assert abs(np.trace(r).real - 32) < 1e-9
    assert np.linalg.eigvalsh(r).min() > -1e-9
    # Toeplitz: constant along diagonals
    assert np.abs(r[1:, 1:] - r[:-1, :-1]).max() < 1e-9


def test_covariance_point_source_limit():
    spec = ChannelSpec(8, pas=PasSpec(0.0, 1e-4))
    r = one_ring_covariance(spec).matrix
    assert np.abs(r - np.ones((8, 8))).max() < 1e-4


def test_leakage_identity_and_range():
    assert dft_domain_leakage(CovarianceModel(np.eye(16))) == 0.0
    model = covariance_for(32, 1 / math.sqrt(3), 0.0, SIGMA5)
    leak = dft_domain_leakage(model)
    assert 0.0 <= leak <= 1.0


def test_leakage_decreases_with_array_size():
    leaks = [
        dft_domain_leakage(covariance_for(m, 1 / math.sqrt(3), 0.0, SIGMA5))
        for m in (16, 64, 256, 1024)
    ]
    for small, big in zip(leaks, leaks[1:]):
        assert big <= 1.1 * small  # monotone within quadrature slack


def test_isotropy_deviation_decreases_with_array_size():
    devs = []
    for m in (16, 64, 256, 1024):
        prec = precoder_for_code("qostbc", m)
        devs.append(isotropy_deviation(prec, covariance_for(m, 1 / math.sqrt(3), 0.0, SIGMA5)))
    for small, big in zip(devs, devs[1:]):
        assert big <= 1.1 * small
    assert devs[-1] <= 0.5 * devs[0]


def test_isotropy_identity_covariance_is_exact():
    for m in (16, 64, 256):
        prec = precoder_for_code("qostbc", m)
        assert isotropy_deviation(prec, np.eye(m)) < 1e-10


def test_draw_channel_statistics():
    model = covariance_for(8, 1 / math.sqrt(3), 0.2, SIGMA5)
    factor = covariance_factor(model)
    rng = np.random.default_rng(11)
    draws = np.stack([draw_channel(model, rng, factor=factor) for _ in range(20000)])
    sample = np.einsum("bm,bn->mn", draws, draws.conj()) / len(draws)
    peak = np.abs(model.matrix).max()
    assert np.abs(sample - model.matrix).max() < 0.05 * peak
    energy = float(np.mean(np.sum(np.abs(draws) ** 2, axis=1)))
    assert energy == pytest.approx(8.0, rel=0.05)


def test_draw_channel_reproducible():
    model = covariance_for(8, 1 / math.sqrt(3), 0.0, SIGMA5)
    h1 = draw_channel(model, np.random.default_rng(123))
    h2 = draw_channel(model, np.random.default_rng(123))
    np.testing.assert_array_equal(h1, h2)


def test_effective_channel():
    prec = precoder_for_code("ac", 8)
    np.testing.assert_allclose(effective_channel(prec, np.zeros(8)), np.zeros(2))
    rng = np.random.default_rng(4)
    h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    g = effective_channel(prec, h)
    np.testing.assert_allclose(g, prec.w_matrix.conj().T @ h)
    # conjugate scaling: g(a h) = a g(h) is linear in h
    np.testing.assert_allclose(effective_channel(prec, 2j * h), 2j * g)
    with pytest.raises(ValueError):
        effective_channel(prec, np.zeros(7))


def test_effective_channel_energy_approaches_unit():
    rng = np.random.default_rng(5)
    energies = {}
    for m in (16, 256):
        prec = precoder_for_code("qostbc", m)
        model = covariance_for(m, 1 / math.sqrt(3), 0.0, SIGMA5)
        sigma = prec.w_matrix.conj().T @ model.matrix @ prec.w_matrix
        energies[m] = float(np.trace(sigma).real)
    assert abs(energies[256] - 1.0) < abs(energies[16] - 1.0) + 0.05
    assert energies[256] == pytest.approx(1.0, abs=0.1)

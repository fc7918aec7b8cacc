import math

import numpy as np
import pytest

from wickfield.dnls import (
    CorrelationSeries,
    DnlsConfig,
    FieldState,
    correlation_series,
    duhamel_residual,
    evolve,
    fit_residual_constant,
    gibbs_spectral_density,
    hopping_symbol,
    initial_covariance,
    sample_initial,
)


def small(**kw):
    base = dict(length=16, n_samples=400, seed=9)
    base.update(kw)
    return DnlsConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        DnlsConfig(coupling=-1.0)
    with pytest.raises(ValueError):
        DnlsConfig(beta=0.0)
    with pytest.raises(ValueError):
        DnlsConfig(mu=-0.5)
    with pytest.raises(ValueError):
        DnlsConfig(length=0)


def test_run_hash_stable_and_sensitive():
    a, b = DnlsConfig(seed=1), DnlsConfig(seed=1)
    assert a.run_hash() == b.run_hash()
    assert a.run_hash() != DnlsConfig(seed=2).run_hash()


def test_hopping_symbol_properties():
    cfg = small()
    sym = hopping_symbol(cfg)
    assert sym.shape == cfg.shape
    assert sym[0] == pytest.approx(0.0)
    assert np.all(sym >= 0)
    assert np.max(sym) <= 4 * cfg.dimension + 1e-12
    cfg2 = small(dimension=2, length=8)
    sym2 = hopping_symbol(cfg2)
    assert sym2.shape == (8, 8)
    assert sym2[0, 0] == pytest.approx(0.0)


def test_gibbs_density_positive():
    cfg = small(beta=2.0, mu=0.3)
    dens = gibbs_spectral_density(cfg)
    assert np.all(dens > 0)
    assert dens[0] == pytest.approx(1 / (2.0 * 0.3))


def test_initial_covariance_matches_samples():
    cfg = small(n_samples=20000)
    cov = initial_covariance(cfg)
    state = sample_initial(cfg)
    emp = np.mean(np.conj(state.psi[:, :1]) * state.psi, axis=0)
    assert np.allclose(emp, cov, atol=5 / math.sqrt(cfg.n_samples))


def test_sample_initial_deterministic():
    a = sample_initial(small())
    b = sample_initial(small())
    assert np.array_equal(a.psi, b.psi)


def test_l2_conservation():
    for lam in (0.0, 0.05, 0.5):
        cfg = small(coupling=lam)
        state = sample_initial(cfg)
        n0 = state.l2_norm_sq(cfg.dimension)
        out = evolve(state, 10.0, cfg)
        n1 = out.l2_norm_sq(cfg.dimension)
        assert np.max(np.abs(n1 - n0) / n0) < 1e-10


def test_time_reversibility():
    cfg = small(coupling=0.3)
    state = sample_initial(cfg)
    fwd = evolve(state, 5.0, cfg)
    back = evolve(fwd, 0.0, cfg)
    assert np.max(np.abs(back.psi - state.psi)) < 1e-11


def test_dt_must_divide():
    cfg = small(dt=0.3)
    state = sample_initial(cfg)
    with pytest.raises(ValueError):
        evolve(state, 0.5, cfg)


def test_zero_coupling_exact_transport():
    # lambda = 0: the split flow equals the exact Fourier rotation
    cfg = small(coupling=0.0, n_samples=10)
    state = sample_initial(cfg)
    out = evolve(state, 7.0, cfg)
    sym = hopping_symbol(cfg)
    expected = np.fft.ifft(np.exp(-1j * 7.0 * sym) * np.fft.fft(state.psi,
                                                                axis=1), axis=1)
    assert np.max(np.abs(out.psi - expected)) < 1e-12


def test_strang_convergence_order():
    def final(dt):
        cfg = small(coupling=0.5, n_samples=30, dt=dt)
        return evolve(sample_initial(cfg), 1.0, cfg).psi

    p1, p2, p3 = final(0.1), final(0.05), final(0.025)
    order = math.log2(np.linalg.norm(p1 - p2) / np.linalg.norm(p2 - p3))
    assert 1.7 <= order <= 2.3


def test_zero_coupling_residual_machine_zero():
    cfg = small(coupling=0.0, n_samples=500)
    series = correlation_series(cfg, [0.0, 2.0, 5.0])
    rows = duhamel_residual(series)
    for row in rows:
        assert row["residual"] < 1e-12
        assert row["noise_scale"] > 0


def test_residual_grows_with_coupling():
    cfg = small(coupling=0.1, n_samples=500)
    series = correlation_series(cfg, [0.0, 2.0, 5.0])
    rows = duhamel_residual(series)
    assert rows[0]["residual"] == pytest.approx(0.0, abs=1e-14)
    assert rows[-1]["residual"] > rows[0]["residual"]


def test_fit_residual_constant_exact():
    rows = [{"t": t, "residual": 0.7 * 0.1 * t} for t in (0.0, 1.0, 2.0, 4.0)]
    assert fit_residual_constant(rows, 0.1) == pytest.approx(0.7)
    # t_max filter drops the late points
    rows.append({"t": 10.0, "residual": 99.0})
    assert fit_residual_constant(rows, 0.1, t_max=4.0) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        fit_residual_constant(rows, 0.0)


def test_correlation_series_shapes():
    cfg = small(n_samples=50)
    series = correlation_series(cfg, [0.0, 1.0])
    assert series.f.shape == (2,) + cfg.shape
    assert series.g.shape == (2,) + cfg.shape
    assert series.f_se.shape == (2,) + cfg.shape
    assert series.times[0] == 0.0
    # equal-time covariance at displacement 0 ~ lattice variance
    cov0 = initial_covariance(cfg)[0].real
    assert series.f[0][0].real == pytest.approx(cov0, abs=0.3)


def test_two_dimensional_evolution():
    cfg = DnlsConfig(dimension=2, length=8, coupling=0.2, n_samples=20, seed=2)
    state = sample_initial(cfg)
    out = evolve(state, 1.0, cfg)
    n0 = state.l2_norm_sq(cfg.dimension)
    n1 = out.l2_norm_sq(cfg.dimension)
    assert np.max(np.abs(n1 - n0) / n0) < 1e-10

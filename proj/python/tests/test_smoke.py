import math

import pytest

import fpinv


def test_optics_basics():
    assert fpinv.reflectance_te(0.0, 1.5) == pytest.approx(0.04)
    p = fpinv.DesignParams(0.0, 3.5, 1000.0)
    assert fpinv.delta0_wavelength(p) == pytest.approx(14000.0 * math.pi)
    spec = fpinv.spectrum_lambda(p)
    assert len(spec) == 200
    assert all(0.0 < t <= 1.0 + 1e-12 for t in spec)


def test_oracle_agreement():
    r = fpinv.reflectance_te(40.0, 2.0)
    f = fpinv.finesse(r)
    for delta in (0.3, 2.0, 11.7):
        closed = fpinv.transmission(f, delta / 2.0)
        brute = fpinv.partial_wave_oracle(r, delta, 2000)
        assert brute == pytest.approx(closed, abs=1e-8)


def test_power_spectrum():
    sig = [0.5 + 0.4 * math.cos(2 * math.pi * 3 * j / 200) for j in range(200)]
    ps = fpinv.power_spectrum(sig)
    assert len(ps) == 10
    assert ps[2] == pytest.approx(1.0, abs=1e-9)


def test_training_and_inversion_roundtrip():
    model = fpinv.make_mlp([2, 16, 8], activation="swish", seed=1)
    out = model([0.1, -0.2])
    assert len(out) == 8

    target = model([0.3, 0.4])
    result = fpinv.invert(model, target, max_iters=300, seed=2)
    assert result.final_mse < result.trajectory_mse[0]
    assert len(result.final_params_normalized) == 2


def test_model_io(tmp_path):
    model = fpinv.make_mlp([3, 10, 5], seed=7)
    path = tmp_path / "model.json"
    fpinv.save_model(model, path)
    back = fpinv.load_model(path)
    assert back.layer_dims == model.layer_dims
    assert back([0.1, 0.2, 0.3]) == pytest.approx(model([0.1, 0.2, 0.3]))

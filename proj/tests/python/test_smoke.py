import math

import numpy as np
import pytest

import gmwstn


def test_gmw_peak():
    assert gmwstn.peak_frequency(4.0, 2.0) == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert gmwstn.gmw_spectrum(math.sqrt(2.0)) == pytest.approx(2.0, abs=1e-12)
    assert gmwstn.gmw_spectrum(-1.0) == 0.0


def test_filter_bank_is_analytic():
    bank = gmwstn.filter_bank("gmw", 1024, 8, 32)
    assert bank.shape == (33, 1024)
    assert np.all(bank[:, 513:] == 0.0)
    assert np.all(bank[:, 0] == 0.0)
    morlet = gmwstn.filter_bank("morlet", 1024, 8, 32)
    assert np.all(morlet[:, 513:].max(axis=1) > 0.0)


def test_default_shapes():
    net = gmwstn.ScatteringNetwork()
    assert net.shapes == [[3446], [431, 33], [54, 14, 33], [7, 10, 14, 33]]


def test_scatter_small_network():
    net = gmwstn.ScatteringNetwork(length=8192)
    rng = np.random.default_rng(0)
    layers = net.scatter(rng.standard_normal(8192))
    assert [list(a.shape) for a in layers] == net.shapes
    assert all(np.all(a >= 0.0) for a in layers[1:])
    zero = net.scatter(np.zeros(8192))
    assert all(np.all(a == 0.0) for a in zero)


def test_errors():
    with pytest.raises(gmwstn.ConfigError):
        gmwstn.ScatteringNetwork(length=8192, beta=0.0)
    with pytest.raises(gmwstn.ConfigError):
        gmwstn.ScatteringNetwork(length=8192).scatter(np.zeros(100))
    with pytest.raises(gmwstn.DataError):
        gmwstn.decode_audio("/nonexistent/track.wav")


def test_wav_round_trip(tmp_path):
    x = 0.5 * np.sin(np.linspace(0.0, 100.0, 4000))
    path = tmp_path / "tone.wav"
    gmwstn.write_wav(path, x)
    y, rate = gmwstn.decode_audio(path)
    assert rate == gmwstn.CORPUS_RATE
    assert np.max(np.abs(y - x)) <= 1.5 / 32768.0


def test_stratified_folds():
    labels = [g for g in range(10) for _ in range(100)]
    folds = gmwstn.stratified_folds(labels, 10, 3, 0)
    assert [len(f) for f in folds] == [340, 330, 330]
    assert gmwstn.soft_threshold(3.0, 1.0) == 2.0

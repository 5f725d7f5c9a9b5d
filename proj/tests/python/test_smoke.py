import itertools
import math

import numpy as np
import pytest

import rdu


def test_metrics():
    assert rdu.uer([1, 1, 2], [1, 2]) == 0.0
    assert rdu.uer([], [1, 2, 3, 4]) == 100.0
    d = rdu.edit_distance([1, 9, 3], [1, 2, 3])
    assert d == {"substitutions": 1, "deletions": 0, "insertions": 0, "ref_length": 3}
    assert rdu.binomial_std(0.5, 250000) == pytest.approx(0.1, rel=1e-12)
    assert rdu.deduplicate([3, 3, 1, 1, 3]) == [3, 1, 3]
    with pytest.raises(rdu.Error):
        rdu.uer([1], [])


def test_ctc_against_enumeration():
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(4, 3))
    lp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
    target, blank = [0, 1], 2
    total = []
    for path in itertools.product(range(3), repeat=4):
        collapsed = [k for i, k in enumerate(path) if k != blank and (i == 0 or path[i - 1] != k)]
        if collapsed == target:
            total.append(sum(lp[t, k] for t, k in enumerate(path)))
    expected = -np.logaddexp.reduce(total)
    assert rdu.ctc_nll(lp, target, blank) == pytest.approx(expected, abs=1e-9)


def test_mixing_and_wav_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    clean = 0.05 * rng.normal(size=8000)
    noise = 0.1 * rng.normal(size=16000)
    mix, gain, rescaled = rdu.mix_at_snr(clean, noise, 7.5, seed=3)
    assert not rescaled
    assert rdu.measure_snr(mix, clean) == pytest.approx(7.5, abs=1e-9)
    assert np.array_equal(rdu.convolve_rir(clean, np.array([1.0])), clean)
    path = str(tmp_path / "a.wav")
    rdu.write_wav(clean, path)
    back = rdu.read_wav(path)
    assert back.shape == clean.shape
    assert np.max(np.abs(back - clean)) <= 1.0 / 32768


def test_features_and_kmeans(tmp_path):
    t = np.arange(16000) / rdu.SAMPLE_RATE
    wave = 0.3 * np.sin(2 * math.pi * 440 * t)
    enc = rdu.PseudoEncoder(num_layers=2, dim=8, n_mels=16, seed=5)
    layers = enc.extract(wave)
    assert len(layers) == 3
    assert layers[0].shape == (49, 8)
    path = str(tmp_path / "f.sslf")
    rdu.dump_features(layers, path)
    back = rdu.load_features(path)
    # Stored as float32.
    assert np.allclose(back[1], layers[1], atol=1e-6)

    pts = np.concatenate([np.zeros((5, 2)), np.full((5, 2), 10.0)])
    centroids, trace = rdu.train_kmeans(pts, k=2, seed=1)
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert trace[-1] == 0.0
    units = rdu.assign(pts, centroids)
    assert len(set(units[:5])) == 1 and len(set(units[5:])) == 1 and units[0] != units[5]


def test_config_errors():
    assert "quantizer.k = 4" in rdu.parse_config("run.seed = 1\nquantizer.k = 4\n")
    with pytest.raises(rdu.ConfigError, match="bogus.key"):
        rdu.parse_config("run.seed = 1\nbogus.key = 2\n")
    assert rdu.stage_names()[0] == "synth"


def test_pipeline_stale_input(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("run.seed = 3\n")
    p = rdu.Pipeline(str(cfg), str(tmp_path / "wd"))
    with pytest.raises(rdu.StaleInputError):
        p.run_stage("quantize")

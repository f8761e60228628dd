import math

import numpy as np
import pytest

import hcv


def test_topk_and_softmax():
    scores, idx = hcv.topk(np.array([0.1, 0.9, 0.5, 0.9], dtype=np.float32), 2)
    assert list(idx) == [1, 3]
    assert np.allclose(scores, [0.9, 0.9])
    p = hcv.masked_softmax(np.zeros(4, dtype=np.float32), [True, True, False, True])
    assert np.allclose(p, [1 / 3, 1 / 3, 0, 1 / 3])
    with pytest.raises(ValueError):
        hcv.topk(np.zeros(3, dtype=np.float32), 0)


def test_metrics_and_losses():
    pred = hcv.FlowField(np.full((1, 1), 3.0, np.float32), np.full((1, 1), 4.0, np.float32))
    gt = hcv.FlowField(np.zeros((1, 1), np.float32), np.zeros((1, 1), np.float32))
    r = hcv.evaluate(pred, gt)
    assert r["epe"] == 5.0
    assert r["f1_all"] == 100.0
    seq = [
        hcv.FlowField(np.ones((1, 1), np.float32), np.zeros((1, 1), np.float32), 8),
        hcv.FlowField(np.full((1, 1), 2.0, np.float32), np.zeros((1, 1), np.float32), 8),
    ]
    gt8 = hcv.FlowField(np.zeros((1, 1), np.float32), np.zeros((1, 1), np.float32), 8)
    assert hcv.loss_iter(seq, gt8, gamma=0.8) == pytest.approx(2.8, abs=1e-12)


def test_memory_counts():
    assert hcv.count_allpairs(1080, 1920)["total_elements"] == 1_049_760_000
    assert hcv.count_allpairs(8, 8)["total_elements"] == 1
    cfg = hcv.RunConfig()
    plan = hcv.count_hcv(448, 1024, cfg)
    assert plan["total_bytes"] == sum(nbytes for _, nbytes in plan["buffers"].values())


def test_flo_and_image_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    u = rng.normal(size=(5, 7)).astype(np.float32)
    v = rng.normal(size=(5, 7)).astype(np.float32)
    path = tmp_path / "a.flo"
    hcv.write_flo(str(path), hcv.FlowField(u, v))
    back = hcv.read_flo(str(path))
    assert np.array_equal(back.u, u) and np.array_equal(back.v, v)
    img = rng.integers(0, 256, size=(6, 4, 3), dtype=np.uint8)
    ipath = tmp_path / "a.ppm"
    hcv.write_image(str(ipath), img)
    assert np.array_equal(hcv.read_image(str(ipath)), img)
    with pytest.raises(IOError):
        hcv.read_flo(str(tmp_path / "missing.flo"))


def test_features_and_volumes():
    img1, img2, gt = hcv.make_synthetic_pair(128, 96, 16, 0, 3)
    assert img1.shape == (96, 128)
    f1 = hcv.extract_features(img1, 16)
    f2 = hcv.extract_features(img2, 16)
    assert f1.shape == (11, 6, 8)
    norms = np.linalg.norm(f1.data, axis=0)
    assert np.all((np.abs(norms - 1) < 1e-5) | (norms == 0))
    th = hcv.build_topk_volume(f1, f2, "horizontal", 4, 2)
    tv = hcv.build_topk_volume(f1, f2, "vertical", 3, 2)
    assert th.scores().shape == (6, 8, 8, 2)
    init = hcv.initial_flow(hcv.aggregate(th, hcv.AggWeights.averaging(2)),
                            hcv.aggregate(tv, hcv.AggWeights.averaging(2)))
    assert np.all(init.u >= -4) and np.all(init.u <= 3)
    assert not math.isnan(float(init.v.mean()))


def test_estimate_runs_and_is_deterministic():
    img1, img2, gt = hcv.make_synthetic_pair(128, 128, 3, 2, 7)
    cfg = hcv.RunConfig()
    a = hcv.estimate(img1, img2, cfg)
    b = hcv.estimate(img1, img2, cfg)
    assert a.u.shape == (128, 128)
    assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)
    ok, text = hcv.selfcheck()
    assert ok, text

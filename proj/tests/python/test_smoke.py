import json

import numpy as np
import pytest

import ovmap


def test_projection_round_trip():
    K = ovmap.CameraIntrinsics(500.0, 500.0, 320.0, 240.0, 640, 480)
    p = ovmap.back_project(100, 200, 1500, K)
    u, v, d = ovmap.project(p, K)
    assert (u, v, d) == (100, 200, 1500)
    assert ovmap.back_project(1, 1, 0, K) is None


def test_supplement_truth_table():
    raw = np.array([[0, 0, 800, 800]], dtype=np.uint16)
    synth = np.array([[0, 1200, 1000, 0]], dtype=np.uint16)
    out = ovmap.supplement_depth(raw, synth)
    assert out.tolist() == [[0, 1200, 800, 0]]
    out = ovmap.supplement_depth(raw, synth, prefer_raw_when_synth_missing=True)
    assert out.tolist() == [[0, 1200, 800, 800]]


def test_merge_and_overlap():
    assert ovmap.overlap_ratio(list(range(10)), list(range(7, 17))) == pytest.approx(0.3)
    merged = ovmap.hierarchical_merge([[list(range(10))], [list(range(6, 16))], [[40, 41]]])
    assert merged == [list(range(16)), [40, 41]]


def test_segmentation_and_dbscan():
    segs = ovmap.felzenszwalb_segment(3, [(0, 1, 0.0), (1, 2, 0.9)], k=0.1)
    assert segs == [[0, 1], [2]]
    pts = np.array([[0, 0, 0], [0.01, 0, 0], [5, 5, 5]], dtype=float)
    assert ovmap.dbscan(pts, 0.05, 2).tolist() == [0, 0, -1]


def test_evaluate_perfect():
    report = ovmap.evaluate([1, 1, 2, 2, 0], [3, 3, 4, 4, 0])
    assert report["ap"] == report["ap50"] == report["ap25"] == 1.0
    with pytest.raises(ovmap.UsageError):
        ovmap.instance_iou([], [])


def test_feature_file_round_trip(tmp_path):
    path = tmp_path / "f.ovft"
    ovmap.write_features(path, [3, 9], [[1.0, 0.0], [0.0, 1.0]])
    recs = ovmap.read_features(path)
    assert [r["instance_id"] for r in recs] == [3, 9]
    assert recs[1]["vector"] == [0.0, 1.0]
    (tmp_path / "bad.ovft").write_bytes(b"OVFT")
    with pytest.raises(ovmap.DataError):
        ovmap.read_features(tmp_path / "bad.ovft")


def test_scene_and_pipeline(tmp_path):
    spec = json.dumps({"seed": 2, "frame_count": 6})
    objects, points = ovmap.generate_scene(tmp_path / "scene", spec)
    assert 8 <= objects <= 15 and points > 1000
    manifest = ovmap.run_pipeline(tmp_path / "scene", tmp_path / "out", json.dumps({"stride": 1}))
    assert manifest["config"]["stride"] == 1
    assert (tmp_path / "out" / "instances.ply").exists()
    with pytest.raises(ovmap.UsageError):
        ovmap.run_pipeline(tmp_path / "scene", tmp_path / "out2", json.dumps({"stride": 0}))

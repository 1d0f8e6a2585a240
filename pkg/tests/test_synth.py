import json

import numpy as np
import pytest

from gesturegrasp.gesture import (
    ALIGNMENT_REFS,
    INDEX_FINGER,
    Chirality,
    canonicalize,
)
from gesturegrasp.geometry import CameraIntrinsics, PixelPoint, point_line_distances
from gesturegrasp.pointing import MAX_DEPTH
from gesturegrasp.synth import (
    Box,
    Plane,
    SceneSpec,
    Sphere,
    hand_template,
    oracle_dtm,
    render_depth,
    synth_bank,
    synth_case,
    synth_featmap_pair,
    synth_hand,
    synth_suite,
)

K = CameraIntrinsics(fx=60.0, fy=60.0, cx=8.0, cy=6.0, width=16, height=12)


def test_template_index_is_collinear():
    t = hand_template()
    pts = t[list(INDEX_FINGER)]
    d = pts[-1] - pts[0]
    d /= np.linalg.norm(d)
    assert point_line_distances(pts, pts[0], d).max() < 1e-12


def test_template_mirrors_for_left_hand():
    r = hand_template(Chirality.RIGHT)
    l = hand_template(Chirality.LEFT)
    assert not np.array_equal(r, l)
    # both chiralities canonicalize cleanly
    canonicalize(synth_hand(0, chirality=Chirality.LEFT))


def test_synth_hand_deterministic_and_frozen_refs():
    a = synth_hand(5, amplitude=0.1)
    b = synth_hand(5, amplitude=0.1)
    assert np.array_equal(a.joints, b.joints)
    t = hand_template()
    for i in ALIGNMENT_REFS:
        assert np.array_equal(a.joints[i], t[i])  # reference landmarks untouched
    assert np.array_equal(synth_hand(5, amplitude=0.1, frozen=(8,)).joints[8], t[8])
    with pytest.raises(ValueError):
        synth_hand(0, amplitude=-0.1)


def test_render_plane_analytic():
    # fronto-parallel plane: every valid cell sits exactly at z0
    scene = render_depth(SceneSpec((Plane([0.0, 0.0, 2.0], [0.0, 0.0, 1.0]),), K))
    assert scene.valid_mask().all()
    assert np.allclose(scene.depth, 2.0, atol=1e-12)
    # tilted plane: depth solves n . (t*d - p) = 0 per cell
    n = np.array([0.2, -0.1, 1.0])
    n /= np.linalg.norm(n)
    scene = render_depth(SceneSpec((Plane([0.0, 0.0, 1.5], n),), K))
    u, v = 11, 3
    d = np.array([(u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0])
    want = float(n @ [0.0, 0.0, 1.5]) / float(n @ d)
    assert abs(scene.depth[v, u] - want) < 1e-9


def test_render_sphere_analytic():
    c = np.array([0.0, 0.0, 3.0])
    r = 0.3
    scene = render_depth(SceneSpec((Sphere(c, r),), K))
    # central ray hits the front of the sphere
    assert abs(scene.depth[6, 8] - (3.0 - 0.3)) < 1e-9
    # the corner ray passes 0.49 m from the center, outside the sphere
    assert scene.depth[0, 0] == 0.0


def test_render_box_analytic():
    box = Box([0.0, 0.0, 2.0], [0.3, 0.3, 0.4])
    scene = render_depth(SceneSpec((box,), K))
    # the front face is a constant-depth plane
    assert abs(scene.depth[6, 8] - 1.8) < 1e-12
    d = np.array([(9 - K.cx) / K.fx, (5 - K.cy) / K.fy, 1.0])
    hit = 1.8 * d
    assert abs(hit[0]) <= 0.15 and abs(hit[1]) <= 0.15
    assert abs(scene.depth[5, 9] - 1.8) < 1e-12
    # corner ray exits the 0.15 m half-width at z=1.8 (x=-0.24)
    assert scene.depth[0, 0] == 0.0


def test_render_nearest_primitive_wins():
    scene = render_depth(SceneSpec(
        (Plane([0, 0, 4.0], [0, 0, 1.0]), Sphere([0.0, 0.0, 2.0], 0.3)), K
    ))
    assert abs(scene.depth[6, 8] - 1.7) < 1e-9  # sphere front cap
    assert abs(scene.depth[0, 0] - 4.0) < 1e-9  # plane shows through elsewhere


def test_render_depth_bound():
    scene = render_depth(SceneSpec((Plane([0, 0, MAX_DEPTH + 5.0], [0, 0, 1.0]),), K))
    assert not scene.valid_mask().any()  # beyond the sensor bound


def test_primitive_validation():
    with pytest.raises(ValueError):
        Plane([0, 0, -1.0], [0, 0, 1.0])
    with pytest.raises(ValueError):
        Sphere([0, 0, 1.0], 1.5)  # pokes through the camera
    with pytest.raises(ValueError):
        Box([0, 0, 0.1], [1.0, 1.0, 0.4])


def test_featmap_pair_margin_and_determinism():
    src1, tgt1, planted = synth_featmap_pair(5, 5, 16, seed=2, planted=[((0, 1), (3, 4))])
    src2, tgt2, _ = synth_featmap_pair(5, 5, 16, seed=2, planted=[((0, 1), (3, 4))])
    assert np.array_equal(src1.data, src2.data)
    assert np.array_equal(tgt1.data, tgt2.data)
    anchor = src1.data[0, 1].astype(np.float64)
    for r in range(5):
        for c in range(5):
            if (r, c) == (3, 4):
                continue
            cell = tgt1.data[r, c].astype(np.float64)
            cos = float(anchor @ cell) / float(np.linalg.norm(anchor) * np.linalg.norm(cell))
            assert cos <= 1.0 - 0.2 + 1e-6  # every non-partner misses by the margin
    assert np.allclose(src1.data[0, 1], tgt1.data[3, 4])


def test_featmap_pair_validation():
    with pytest.raises(ValueError):
        synth_featmap_pair(4, 4, 4, seed=0, planted=[((0, 0), (1, 1))])  # d too small
    with pytest.raises(ValueError):
        synth_featmap_pair(4, 4, 16, seed=0, planted=[((0, 9), (1, 1))])


def test_oracle_dtm_frozen():
    mask = np.zeros((6, 8), dtype=bool)
    mask[2, 3] = True
    assert oracle_dtm(PixelPoint(3.0, 2.0), mask) == 0.0
    assert oracle_dtm(PixelPoint(3.4, 2.4), mask) == 0.0  # rounds into the cell
    got = oracle_dtm(PixelPoint(6.0, 6.0), mask)
    want = np.hypot(3.0, 4.0) / np.hypot(8.0, 6.0)
    assert abs(got - want) < 1e-15
    with pytest.raises(ValueError):
        oracle_dtm(PixelPoint(0.0, 0.0), np.zeros((4, 4), dtype=bool))


def test_synth_bank_loadable_and_deterministic(tmp_path):
    b1 = synth_bank(tmp_path / "one", n_entries=4, seed=3)
    synth_bank(tmp_path / "two", n_entries=4, seed=3)
    assert (tmp_path / "one" / "manifest.jsonl").read_bytes() == (
        tmp_path / "two" / "manifest.jsonl"
    ).read_bytes()
    assert len(b1) == 4
    assert b1.ids() == [f"e{i:03d}" for i in range(4)]


def test_synth_case_layout(tmp_path):
    expected = synth_case(tmp_path, seed=123)
    for name in (
        "pipeline.json",
        "pointing.json",
        "grasp.json",
        "scene.json",
        "embedding.json",
        "features.ggt",
        "candidates.jsonl",
        "mask.pgm",
        "expected.json",
    ):
        assert (tmp_path / name).is_file(), name
    assert (tmp_path / "bank" / "manifest.jsonl").is_file()
    on_disk = json.loads((tmp_path / "expected.json").read_text())
    assert on_disk["entry_id"] == expected["entry_id"]
    assert on_disk["target_cell"] == list(expected["target_cell"])
    config = json.loads((tmp_path / "pipeline.json").read_text())
    assert config["seed"] == 123


def test_synth_case_deterministic(tmp_path):
    e1 = synth_case(tmp_path / "a", seed=77)
    e2 = synth_case(tmp_path / "b", seed=77)
    assert e1 == e2
    assert (tmp_path / "a" / "pipeline.json").read_bytes() == (
        tmp_path / "b" / "pipeline.json"
    ).read_bytes()
    assert (tmp_path / "a" / "depth.ggt").read_bytes() == (
        tmp_path / "b" / "depth.ggt"
    ).read_bytes()


def test_synth_suite_writes_cases(tmp_path):
    paths = synth_suite(tmp_path, 3, seed=5)
    assert [p.name for p in paths] == ["case000", "case001", "case002"]
    for p in paths:
        assert (p / "pipeline.json").is_file()

"""End-to-end acceptance checks, one test per shipped guarantee.

Each test prints a single [ACCEPT] line on success so batch logs show
the criteria at a glance even when pytest captures stdout.
"""

import json
import math
import time

import numpy as np
import pytest

from gesturegrasp.fileio import load_keypoints, load_mask, load_scene
from gesturegrasp.geometry import (
    CameraIntrinsics,
    PixelPoint,
    Rotation3,
    fit_line_ransac,
)
from gesturegrasp.gesture import Chirality, HandKeypoints, canonicalize
from gesturegrasp.grasp import (
    GraspCandidate,
    GraspPose,
    SelectionParams,
    frobenius_deviation,
    select_grasp,
)
from gesturegrasp.memory import MemoryBank, entry_from_record, load_bank, save_bank
from gesturegrasp.metrics import compute_dtm
from gesturegrasp.pipeline import PipelineConfig, run_pipeline
from gesturegrasp.pointing import locate_target
from gesturegrasp.retrieval import retrieve_topk_gestures
from gesturegrasp.synth import (
    oracle_dtm,
    oracle_select,
    oracle_topk_ids,
    oracle_transfer_cell,
    random_rotation,
    random_sim3,
    synth_bank,
    synth_case,
    synth_featmap_pair,
    synth_hand,
    synth_suite,
)
from gesturegrasp.transfer import transfer_contact

K_VGA = CameraIntrinsics(fx=525.0, fy=525.0, cx=319.5, cy=239.5, width=640, height=480)


@pytest.fixture
def accept(capfd):
    def _emit(name):
        with capfd.disabled():
            print(f"[ACCEPT] {name}: PASS", flush=True)

    return _emit


def small_hand(seed, amplitude=0.2, chirality=Chirality.RIGHT):
    # scaled to a wrist-index span of ~0.1 m so entries pass ingestion
    kp = synth_hand(seed, amplitude=amplitude, chirality=chirality)
    return HandKeypoints(kp.joints * 0.1, chirality)


def plain_bank(hands, embeddings=None):
    entries = []
    for i, kp in enumerate(hands):
        emb = [1.0, 0.0] if embeddings is None else embeddings[i]
        entries.append(entry_from_record({
            "id": f"e{i:03d}",
            "chirality": kp.chirality.value,
            "joints": [[float(x) for x in row] for row in kp.joints],
            "embedding": [float(x) for x in emb],
            "contact": [1.0, 1.0],
            "image_dims": [8, 8],
            "feature_ref": f"e{i:03d}.ggt",
        }))
    return MemoryBank(tuple(entries), len(entries[0].embedding), None, None)


def test_accept_sim3_canonical_invariance(accept):
    rng = np.random.default_rng(0)
    base = {}
    t0 = time.perf_counter()
    for i in range(1000):
        seed = i % 50
        chir = Chirality.RIGHT if seed % 2 == 0 else Chirality.LEFT
        if seed not in base:
            base[seed] = canonicalize(synth_hand(seed, amplitude=0.12, chirality=chir))
        moved = synth_hand(
            seed, amplitude=0.12, chirality=chir, transform=random_sim3(rng)
        )
        c = canonicalize(moved)
        assert c.chirality == base[seed].chirality
        assert np.allclose(c.joints, base[seed].joints, atol=1e-6)
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    accept("sim3-canonical-invariance (1000 transforms, atol 1e-6)")


def test_accept_stage1_topk_matches_oracle(accept):
    rng = np.random.default_rng(11)
    t0 = time.perf_counter()
    for bi in range(100):
        n = 1000 if bi == 0 else int(rng.integers(2, 36))
        hands = [small_hand(int(rng.integers(100000)), amplitude=0.25) for _ in range(n)]
        if bi % 7 == 0 and n >= 3:
            # exact duplicates force cosine ties, broken by ascending id
            hands[1] = HandKeypoints(hands[0].joints.copy(), hands[0].chirality)
        bank = plain_bank(hands)
        query = small_hand(int(rng.integers(100000)), amplitude=0.25)
        k = int(rng.integers(1, n + 2))
        got = retrieve_topk_gestures(query, bank, k).matches
        ref = oracle_topk_ids(query, bank, k)
        assert [g[0] for g in got] == [r[0] for r in ref]
        for (_, gs), (_, rs) in zip(got, ref):
            assert abs(gs - rs) < 1e-12
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    accept("stage1-topk-oracle (100 banks up to n=1000, 1e-12)")


def test_accept_self_retrieval(accept):
    hands = [small_hand(j, amplitude=0.22) for j in range(40)]
    bank = plain_bank(hands)
    rng = np.random.default_rng(3)
    for _ in range(500):
        j = int(rng.integers(40))
        moved = synth_hand(
            j, amplitude=0.22, transform=random_sim3(rng, translation_bound=1.0)
        )
        top = retrieve_topk_gestures(moved, bank, 1).matches[0]
        assert top[0] == f"e{j:03d}"
        assert top[1] > 1.0 - 1e-9
    accept("self-retrieval (500 transformed queries, rank 1)")


def test_accept_grasp_selection_matches_oracle(accept):
    rng = np.random.default_rng(7)
    for _ in range(100):
        r0 = random_rotation(rng)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        theta = float(rng.uniform(0.0, math.pi))
        r1 = r0 @ Rotation3.from_axis_angle(axis, theta)
        dev = frobenius_deviation(r0, r1)
        assert abs(dev - 2.0 * math.sqrt(2.0) * math.sin(theta / 2.0)) < 1e-9

    grids = [
        SelectionParams(lam=0.0, sigma=30.0, attention="off"),
        SelectionParams(lam=0.1, sigma=30.0, attention="off"),
        SelectionParams(lam=0.35, sigma=10.0, attention="weight"),
        SelectionParams(lam=0.2, sigma=45.0, attention="weight"),
    ]
    for trial in range(100):
        n = int(rng.integers(2, 13))
        cands = []
        for _ in range(n):
            t = np.array([
                rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.4, 2.5),
            ])
            cands.append(GraspCandidate(
                GraspPose(t, random_rotation(rng), int(rng.integers(0, 2))),
                float(rng.uniform(0.0, 1.0)),
            ))
        r_h = random_rotation(rng)
        c_t = PixelPoint(float(rng.uniform(0, 639)), float(rng.uniform(0, 479)))
        params = grids[trial % len(grids)]
        sel = select_grasp(cands, r_h, c_t, K_VGA, params)
        assert sel.index == oracle_select(cands, r_h, c_t, K_VGA, params)
    accept("grasp-selection-oracle (closed form 1e-9, 100 fixtures)")


def test_accept_pointing_geometry(accept, tmp_path):
    # the generator places the plane so the ray lands on a known point
    for i in range(20):
        d = tmp_path / f"g{i:02d}"
        expected = synth_case(d, seed=7100 + i)
        params = json.loads((d / "pipeline.json").read_text())["params"]
        result, _ = locate_target(
            load_keypoints(d / "pointing.json"),
            load_scene(d / "scene.json"),
            epsilon=params["epsilon"],
            crop_size=params["crop_size"],
            ransac_threshold=params["ransac_threshold"],
            ransac_iterations=params["ransac_iterations"],
            min_ray_t=params["min_ray_t"],
        )
        err = np.linalg.norm(result.target3d - np.array(expected["intersection"]))
        assert err < 2.0 * params["epsilon"]
    accept("pointing-geometry (20 scenes, |p - p*| < 2 epsilon)")


def test_accept_ransac_outlier_rejection(accept):
    rng = np.random.default_rng(17)
    for _ in range(100):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        origin = rng.normal(size=3) * 0.2
        ts = np.array([0.0, 0.05, 0.10, 0.15, 0.20])
        pts = origin + ts[:, None] * d + rng.normal(size=(5, 3)) * 1e-4
        perp = np.cross(d, [0.0, 0.0, 1.0] if abs(d[2]) < 0.9 else [1.0, 0.0, 0.0])
        perp /= np.linalg.norm(perp)
        pts[2] += 0.3 * perp
        ray, flags = fit_line_ransac(pts, inlier_threshold=0.01)
        angle = math.degrees(math.acos(min(1.0, abs(float(ray.direction @ d)))))
        assert angle < 1.0
        assert not flags[2]
        assert flags.sum() == 4
    accept("ransac-outlier-rejection (100 corrupted fits, < 1 deg)")


def test_accept_transfer_planted_recovery(accept):
    rng = np.random.default_rng(23)
    for i in range(1000):
        h, w = (int(x) for x in rng.integers(3, 33, size=2))
        sc = (int(rng.integers(h)), int(rng.integers(w)))
        tc = (int(rng.integers(h)), int(rng.integers(w)))
        src, tgt, _ = synth_featmap_pair(h, w, 8, seed=i, planted=[(sc, tc)])
        c_src = src.cell_center_pixel(*sc)
        corr = transfer_contact(src, c_src, tgt)
        assert corr.target_cell == tc
        assert corr.target_cell == oracle_transfer_cell(src, c_src, tgt)
    accept("transfer-planted-recovery (1000 grids, exact cell)")


def test_accept_dtm_matches_oracle(accept):
    mask = np.zeros((480, 640), dtype=bool)
    mask[100, 200] = True
    assert compute_dtm(PixelPoint(230.0, 100.0), mask) == 0.0375

    rng = np.random.default_rng(29)
    for _ in range(100):
        h, w = (int(x) for x in rng.integers(5, 200, size=2))
        m = rng.random((h, w)) < 0.02
        if not m.any():
            m[int(rng.integers(h)), int(rng.integers(w))] = True
        pred = PixelPoint(float(rng.uniform(-0.5, w - 0.5)), float(rng.uniform(-0.5, h - 0.5)))
        assert compute_dtm(pred, m) == oracle_dtm(pred, m)
    accept("dtm-oracle (frozen 0.0375 plus 100 exact matches)")


def test_accept_e2e_synthetic_cases(accept, tmp_path):
    t0 = time.perf_counter()
    dirs = synth_suite(tmp_path, 50, seed=0)
    hits = 0
    for d in dirs:
        expected = json.loads((d / "expected.json").read_text())
        cfg = PipelineConfig.from_dict(json.loads((d / "pipeline.json").read_text()), d)
        report = run_pipeline(cfg)
        again = run_pipeline(cfg)
        assert report.to_json() == again.to_json()
        data = report.data
        mask = load_mask(d / "mask.pgm")
        in_cell = compute_dtm(PixelPoint(*data["contact"]), mask) == 0.0
        if data["retrieval"]["entry_id"] == expected["entry_id"] and in_cell:
            hits += 1
    elapsed = time.perf_counter() - t0
    assert hits >= 49  # 98 percent of 50
    assert elapsed < 60.0
    accept(f"e2e-synthetic-cases ({hits}/50 in-cell, deterministic, {elapsed:.1f}s)")


def test_accept_lambda_monotonicity(accept):
    rng = np.random.default_rng(41)
    c_t = PixelPoint(320.0, 240.0)
    for _ in range(50):
        cands = []
        for _ in range(10):
            t = np.array([0.0, 0.0, float(rng.uniform(0.5, 2.0))])
            cands.append(GraspCandidate(
                GraspPose(t, random_rotation(rng), 1), float(rng.uniform(0.0, 1.0))
            ))
        r_h = random_rotation(rng)
        prev = None
        for lam in np.arange(0.0, 1.0001, 0.05):
            sel = select_grasp(
                cands, r_h, c_t, K_VGA, SelectionParams(lam=float(lam))
            )
            dev = frobenius_deviation(r_h, sel.candidate.pose.R)
            if prev is not None:
                assert dev <= prev + 1e-12
            prev = dev
    accept("lambda-monotonicity (50 sets, deviation non-increasing)")


def test_accept_bank_persistence_bitexact(accept, tmp_path):
    d1 = tmp_path / "a"
    d2 = tmp_path / "b"
    synth_bank(d1, n_entries=100, seed=5)
    bank = load_bank(d1)
    assert len(bank.entries) == 100
    save_bank(bank, d2)
    assert (d1 / "manifest.jsonl").read_bytes() == (d2 / "manifest.jsonl").read_bytes()
    for entry in bank.entries:
        ref = entry.feature_ref
        assert (d1 / ref).read_bytes() == (d2 / ref).read_bytes()
    reloaded = load_bank(d2)
    for a, b in zip(bank.entries, reloaded.entries):
        assert a.id == b.id
        assert np.array_equal(a.embedding, b.embedding)
        assert np.array_equal(a.gesture.joints, b.gesture.joints)
    accept("bank-persistence-bitexact (100 entries round trip)")

import numpy as np
import pytest

from gesturegrasp.errors import DegenerateHand
from gesturegrasp.gesture import (
    ALIGNMENT_REFS,
    INDEX_MCP,
    MAX_HAND_SPAN,
    NUM_JOINTS,
    PINKY_MCP,
    WRIST,
    CanonicalGesture,
    Chirality,
    HandKeypoints,
    alignment_rotation,
    canonicalize,
    gesture_similarity,
    max_pairwise_distance,
)
from gesturegrasp.synth import hand_template, random_sim3, synth_hand


def test_hand_keypoints_shape_checks():
    with pytest.raises(ValueError):
        HandKeypoints(np.zeros((20, 3)), Chirality.RIGHT)
    with pytest.raises(ValueError):
        HandKeypoints(np.full((NUM_JOINTS, 3), np.nan), Chirality.RIGHT)


def test_max_pairwise_distance_frozen():
    joints = np.zeros((NUM_JOINTS, 3))
    joints[5] = [3.0, 4.0, 0.0]
    assert max_pairwise_distance(joints) == 5.0


def test_alignment_rotation_is_orthonormal():
    for seed in range(10):
        kp = synth_hand(seed, amplitude=0.05)
        r, span = alignment_rotation(kp.joints)
        assert np.allclose(r @ r.T, np.eye(3), atol=1e-7)
        assert span > 0


def test_canonical_frame_invariants():
    for seed in range(20):
        kp = synth_hand(seed, amplitude=0.08)
        c = canonicalize(kp)
        assert np.all(c.joints[WRIST] == 0.0)
        assert np.allclose(c.joints[INDEX_MCP], [1.0, 0.0, 0.0], atol=1e-7)
        assert abs(c.joints[PINKY_MCP][2]) < 1e-7
        assert c.joints[PINKY_MCP][1] > 0
        assert c.chirality == kp.chirality


def test_canonical_frame_invariants_left_hand():
    for seed in range(10):
        kp = synth_hand(seed, amplitude=0.05, chirality=Chirality.LEFT)
        c = canonicalize(kp)
        assert np.allclose(c.joints[INDEX_MCP], [1.0, 0.0, 0.0], atol=1e-7)
        assert c.joints[PINKY_MCP][1] > 0


def test_canonicalize_sim3_invariant():
    # same hand under rotation + uniform scale + translation maps to the
    # same canonical joints
    rng = np.random.default_rng(123)
    for seed in range(30):
        kp = synth_hand(seed, amplitude=0.06)
        ref = canonicalize(kp)
        s = random_sim3(rng, scale_range=(0.2, 5.0), translation_bound=2.0)
        moved = HandKeypoints(s.apply(kp.joints), kp.chirality)
        got = canonicalize(moved)
        assert np.max(np.abs(got.joints - ref.joints)) < 1e-6


def test_canonicalize_idempotent():
    kp = synth_hand(3, amplitude=0.05)
    c1 = canonicalize(kp)
    c2 = canonicalize(HandKeypoints(c1.joints.copy(), c1.chirality))
    assert np.max(np.abs(c2.joints - c1.joints)) < 1e-6


def test_degenerate_hand_collinear_refs():
    joints = np.random.default_rng(0).normal(size=(NUM_JOINTS, 3))
    w, i, p = ALIGNMENT_REFS
    joints[w] = [0.0, 0.0, 0.0]
    joints[i] = [1.0, 0.0, 0.0]
    joints[p] = [2.0, 0.0, 0.0]  # collinear with wrist and index MCP
    with pytest.raises(DegenerateHand):
        canonicalize(HandKeypoints(joints, Chirality.RIGHT))


def test_degenerate_hand_tiny_span():
    joints = hand_template() * 1e-4  # wrist-to-index span below 1 mm
    with pytest.raises(DegenerateHand):
        canonicalize(HandKeypoints(joints, Chirality.RIGHT))


def test_canonical_gesture_validates_frame():
    shifted = hand_template() + np.array([0.2, 0.0, 0.0])
    with pytest.raises(ValueError):
        CanonicalGesture(shifted, Chirality.RIGHT)  # wrist off origin
    scaled = hand_template() * 2.0
    with pytest.raises(ValueError):
        CanonicalGesture(scaled, Chirality.RIGHT)  # index MCP off (1, 0, 0)


def test_similarity_identical_is_exactly_one():
    c = canonicalize(synth_hand(5, amplitude=0.03))
    other = CanonicalGesture(c.joints.copy(), c.chirality)
    assert gesture_similarity(c, other) == 1.0


def test_similarity_symmetric_and_bounded():
    rng = np.random.default_rng(9)
    for _ in range(20):
        a = canonicalize(synth_hand(int(rng.integers(1000)), amplitude=0.1))
        b = canonicalize(synth_hand(int(rng.integers(1000)), amplitude=0.1))
        s_ab = gesture_similarity(a, b)
        s_ba = gesture_similarity(b, a)
        assert s_ab == s_ba
        assert -1.0 <= s_ab <= 1.0


def test_similarity_orders_by_perturbation():
    base = synth_hand(7, amplitude=0.0)
    near = synth_hand(7, amplitude=0.01)
    far = synth_hand(7, amplitude=0.3)
    c0, c1, c2 = (canonicalize(k) for k in (base, near, far))
    assert gesture_similarity(c0, c1) > gesture_similarity(c0, c2)


def test_max_hand_span_constant():
    # ingestion rejects implausible hands against this bound
    assert MAX_HAND_SPAN == 0.5

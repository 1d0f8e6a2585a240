"""Synthetic fixtures and independent oracles for desk-scale testing.

Everything here is seed-driven and deterministic. The hand template is
a hand-authored set of plausible proportions (NOT measured data); scene
rendering is closed-form ray casting against analytic primitives; the
oracles re-implement scoring with naive loops so tests can compare the
library against structurally independent arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fileio
from .errors import MarginUnsatisfiable
from .gesture import (
    ALIGNMENT_REFS,
    INDEX_FINGER,
    INDEX_MCP,
    NUM_JOINTS,
    WRIST,
    Chirality,
    HandKeypoints,
)
from .geometry import (
    CameraIntrinsics,
    PixelPoint,
    Rotation3,
    Sim3,
    as_vec3,
    backproject,
    project,
    unit,
)
from .grasp import GraspCandidate, GraspPose, SelectionParams, save_candidates
from .memory import MemoryBank, ingest_entry, save_bank
from .pointing import MAX_DEPTH, DepthScene
from .tensorio import write_tensor
from .transfer import FeatureMap

# Direction of the (straight) template index finger, wrist frame.
_INDEX_DIR = np.array([0.80, -0.04, 0.05])
_INDEX_DIR = _INDEX_DIR / np.linalg.norm(_INDEX_DIR)


def _template() -> np.ndarray:
    u = _INDEX_DIR
    t = np.zeros((NUM_JOINTS, 3))
    # thumb
    t[1] = (0.30, -0.18, 0.06)
    t[2] = (0.55, -0.32, 0.12)
    t[3] = (0.75, -0.42, 0.16)
    t[4] = (0.92, -0.50, 0.18)
    # index: exactly collinear so the pointing line is analytic
    t[5] = (1.00, 0.00, 0.00)
    t[6] = t[5] + 0.38 * u
    t[7] = t[5] + 0.62 * u
    t[8] = t[5] + 0.80 * u
    # middle
    t[9] = (0.98, 0.14, 0.01)
    t[10] = (1.36, 0.16, 0.04)
    t[11] = (1.60, 0.17, 0.07)
    t[12] = (1.82, 0.18, 0.09)
    # ring
    t[13] = (0.88, 0.27, 0.01)
    t[14] = (1.22, 0.30, 0.05)
    t[15] = (1.44, 0.32, 0.08)
    t[16] = (1.63, 0.33, 0.10)
    # pinky (MCP pinned to z=0: the canonical-frame anchor)
    t[17] = (0.72, 0.38, 0.00)
    t[18] = (0.98, 0.44, 0.03)
    t[19] = (1.14, 0.47, 0.05)
    t[20] = (1.28, 0.49, 0.07)
    t.flags.writeable = False
    return t


# Fixture constant in canonical-frame units (wrist at origin, index MCP
# at distance 1). Plausible proportions only, not measured anatomy.
HAND_TEMPLATE = _template()


def hand_template(chirality: Chirality = Chirality.RIGHT) -> np.ndarray:
    """Template joints; left hands are the y-mirrored right template."""
    if Chirality(chirality) == Chirality.RIGHT:
        return HAND_TEMPLATE.copy()
    mirrored = HAND_TEMPLATE.copy()
    mirrored[:, 1] *= -1.0
    return mirrored


def synth_hand(
    seed: int,
    amplitude: float = 0.0,
    transform: Sim3 | None = None,
    chirality: Chirality = Chirality.RIGHT,
    frozen: tuple[int, ...] = (),
) -> HandKeypoints:
    """Template plus per-joint articulation noise, then optional SIM(3).

    The canonical-frame reference landmarks (and any extra `frozen`
    joints) are never perturbed, so canonicalization stays well-posed.
    """
    if amplitude < 0:
        raise ValueError("amplitude must be >= 0")
    rng = np.random.default_rng(seed)
    joints = hand_template(chirality)
    noise = rng.normal(0.0, amplitude, joints.shape) if amplitude > 0 else 0.0
    joints = joints + noise
    keep = set(ALIGNMENT_REFS) | set(frozen)
    template = hand_template(chirality)
    for i in keep:
        joints[i] = template[i]
    if transform is not None:
        joints = transform.apply(joints)
    return HandKeypoints(joints, chirality)


def random_rotation(rng: np.random.Generator) -> Rotation3:
    """Uniform rotation via a normalized Gaussian quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return Rotation3.from_quaternion(*q)


def random_sim3(
    rng: np.random.Generator,
    scale_range: tuple[float, float] = (0.2, 5.0),
    translation_bound: float = 1.0,
) -> Sim3:
    return Sim3(
        rotation=random_rotation(rng),
        scale=float(rng.uniform(*scale_range)),
        translation=rng.uniform(-translation_bound, translation_bound, 3),
    )


# ------------------------------------------------------------- scene rendering
@dataclass(frozen=True)
class Plane:
    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", as_vec3(self.point))
        object.__setattr__(self, "normal", unit(as_vec3(self.normal)))
        if self.point[2] <= 0:
            raise ValueError("plane anchor must be in front of the camera")

    def hit_depths(self, dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
        n = self.normal
        denom = n[0] * dx + n[1] * dy + n[2]
        num = float(n @ self.point)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = num / denom
        t = np.where(np.abs(denom) > 1e-12, t, np.inf)
        return np.where(t > 1e-9, t, np.inf)


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center))
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.center[2] - self.radius <= 0:
            raise ValueError("sphere must be in front of the camera")

    def hit_depths(self, dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
        c = self.center
        a = dx * dx + dy * dy + 1.0
        b = -2.0 * (dx * c[0] + dy * c[1] + c[2])
        cc = float(c @ c) - self.radius * self.radius
        disc = b * b - 4.0 * a * cc
        with np.errstate(invalid="ignore"):
            root = np.sqrt(disc)
        near = (-b - root) / (2.0 * a)
        far = (-b + root) / (2.0 * a)
        t = np.where(near > 1e-9, near, far)
        return np.where((disc >= 0) & (t > 1e-9), t, np.inf)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by center and full extents."""

    center: np.ndarray
    extents: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center))
        e = as_vec3(self.extents)
        if np.any(e <= 0):
            raise ValueError("extents must be positive")
        object.__setattr__(self, "extents", e)
        if self.center[2] - e[2] / 2.0 <= 0:
            raise ValueError("box must be in front of the camera")

    def hit_depths(self, dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
        lo = self.center - self.extents / 2.0
        hi = self.center + self.extents / 2.0
        tmin = np.full(dx.shape, -np.inf)
        tmax = np.full(dx.shape, np.inf)
        for axis, d in enumerate((dx, dy, np.ones_like(dx))):
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = lo[axis] / d
                t2 = hi[axis] / d
            near = np.minimum(t1, t2)
            far = np.maximum(t1, t2)
            parallel = np.abs(d) < 1e-15
            inside = lo[axis] <= 0.0 <= hi[axis]
            near = np.where(parallel, -np.inf if inside else np.inf, near)
            far = np.where(parallel, np.inf if inside else -np.inf, far)
            tmin = np.maximum(tmin, near)
            tmax = np.minimum(tmax, far)
        t = np.where(tmin > 1e-9, tmin, tmax)
        return np.where((tmax >= tmin) & (t > 1e-9), t, np.inf)


Primitive = Plane | Sphere | Box


@dataclass(frozen=True)
class SceneSpec:
    primitives: tuple
    intrinsics: CameraIntrinsics
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))


def render_depth(spec: SceneSpec) -> DepthScene:
    """Ray-cast through every cell center; depth = z of the nearest hit.

    With ray directions ((u-cx)/fx, (v-cy)/fy, 1) the ray parameter of a
    hit equals its z coordinate, so depth falls straight out of the
    intersection. Cells with no hit, or hits at or beyond the sensor
    bound, are invalid (0).
    """
    k = spec.intrinsics
    dx = (np.arange(k.width) - k.cx) / k.fx
    dy = (np.arange(k.height) - k.cy) / k.fy
    dxg, dyg = np.meshgrid(dx, dy)
    depth = np.full((k.height, k.width), np.inf)
    for prim in spec.primitives:
        depth = np.minimum(depth, prim.hit_depths(dxg, dyg))
    valid = np.isfinite(depth) & (depth < MAX_DEPTH)
    return DepthScene(np.where(valid, depth, 0.0), k)


# --------------------------------------------------------- feature-map planting
_MARGIN = 0.2
_MAX_REDRAWS = 200


def _unit_rows(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    v = rng.normal(size=shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def synth_featmap_pair(
    h: int,
    w: int,
    d: int,
    seed: int,
    planted: list[tuple[tuple[int, int], tuple[int, int]]],
    src_dims: tuple[int, int] = (224, 224),
    tgt_dims: tuple[int, int] = (224, 224),
) -> tuple[FeatureMap, FeatureMap, tuple]:
    """Random unit-feature maps with planted exact correspondences.

    Each planted (src_cell, tgt_cell) pair shares one feature vector
    that every non-partner cell in either map misses by a cosine margin
    of at least 0.2 (rejection-sampled), so argmax transfer recovers the
    pair exactly.
    """
    if d < 8:
        raise ValueError("need d >= 8 for the margin to be satisfiable")
    for (sr, sc), (tr, tc) in planted:
        if not (0 <= sr < h and 0 <= sc < w and 0 <= tr < h and 0 <= tc < w):
            raise ValueError(f"planted cell out of range for {h}x{w} grid")
    rng = np.random.default_rng(seed)
    limit = 1.0 - _MARGIN

    anchors: list[np.ndarray] = []
    for _ in planted:
        for attempt in range(_MAX_REDRAWS + 1):
            v = _unit_rows(rng, (d,))
            if all(abs(float(v @ a)) <= limit for a in anchors):
                anchors.append(v)
                break
        else:
            raise MarginUnsatisfiable(
                f"could not draw {len(planted)} mutually separated anchors"
            )

    src = _unit_rows(rng, (h, w, d))
    tgt = _unit_rows(rng, (h, w, d))
    for (sr, sc), (tr, tc), v in zip(
        [p[0] for p in planted], [p[1] for p in planted], anchors
    ):
        src[sr, sc] = v
        tgt[tr, tc] = v

    src_planted = {p[0] for p in planted}
    tgt_planted = {p[1] for p in planted}
    for grid, keep in ((src, src_planted), (tgt, tgt_planted)):
        for r in range(h):
            for c in range(w):
                if (r, c) in keep:
                    continue
                for attempt in range(_MAX_REDRAWS + 1):
                    if all(abs(float(grid[r, c] @ a)) <= limit for a in anchors):
                        break
                    grid[r, c] = _unit_rows(rng, (d,))
                else:
                    raise MarginUnsatisfiable(
                        f"cell ({r}, {c}) kept violating the 0.2 margin"
                    )

    return (
        FeatureMap(src.astype(np.float32), src_dims),
        FeatureMap(tgt.astype(np.float32), tgt_dims),
        tuple(planted),
    )


# ------------------------------------------------------------------- oracles
def oracle_select(
    candidates: list[GraspCandidate],
    r_h: Rotation3,
    c_t: PixelPoint,
    intrinsics: CameraIntrinsics,
    params: SelectionParams,
) -> int:
    """Naive-loop re-evaluation of the selection objective.

    Deliberately shares no scoring code with the grasp module: the
    deviation, attention, and argmax are all recomputed with scalar
    arithmetic.
    """
    m = r_h.matrix
    best_idx = 0
    best_val = None
    for idx, cand in enumerate(candidates):
        ri = cand.pose.R.matrix
        acc = 0.0
        for j in range(3):
            for kcol in range(3):
                rel = 0.0
                for a in range(3):
                    rel += m[a, j] * ri[a, kcol]
                ident = 1.0 if j == kcol else 0.0
                acc += (ident - rel) ** 2
        dev = math.sqrt(acc)
        att = 1.0
        if params.attention == "weight":
            x, y, z = (float(v) for v in cand.pose.t)
            u = intrinsics.fx * x / z + intrinsics.cx
            v = intrinsics.fy * y / z + intrinsics.cy
            du, dv = u - c_t.u, v - c_t.v
            att = math.exp(-(du * du + dv * dv) / (2.0 * params.sigma ** 2))
        val = cand.score * att - params.lam * dev
        if best_val is None or val > best_val:
            best_val = val
            best_idx = idx
    return best_idx


def oracle_transfer_cell(
    src: FeatureMap, c_src: PixelPoint, tgt: FeatureMap
) -> tuple[int, int]:
    """Brute-force argmax cell, scalar loops, nearest-cell sampling aside.

    Bilinear sampling is re-implemented locally so the only shared
    surface with the transfer module is the documented grid convention.
    """
    width, height = src.image_dims
    gx = (c_src.u + 0.5) * src.w / width - 0.5
    gy = (c_src.v + 0.5) * src.h / height - 0.5
    gx = min(max(gx, 0.0), src.w - 1.0)
    gy = min(max(gy, 0.0), src.h - 1.0)
    x0, y0 = int(math.floor(gx)), int(math.floor(gy))
    x1, y1 = min(x0 + 1, src.w - 1), min(y0 + 1, src.h - 1)
    tx, ty = gx - x0, gy - y0
    f = [0.0] * src.d
    for ch in range(src.d):
        top = (1 - tx) * float(src.data[y0, x0, ch]) + tx * float(src.data[y0, x1, ch])
        bot = (1 - tx) * float(src.data[y1, x0, ch]) + tx * float(src.data[y1, x1, ch])
        f[ch] = (1 - ty) * top + ty * bot
    fnorm = math.sqrt(sum(x * x for x in f))
    best = None
    best_cell = (0, 0)
    for r in range(tgt.h):
        for c in range(tgt.w):
            cell = [float(v) for v in tgt.data[r, c]]
            cnorm = math.sqrt(sum(x * x for x in cell))
            if cnorm <= 1e-12:
                cos = -1.0
            else:
                cos = sum(a * b for a, b in zip(f, cell)) / (fnorm * cnorm)
            if best is None or cos > best:
                best = cos
                best_cell = (r, c)
    return best_cell


def oracle_topk_ids(
    query: HandKeypoints, bank, k: int
) -> list[tuple[str, float]]:
    """Brute-force stage-1 scan: canonicalize by explicit arithmetic.

    Independent of the gesture module: alignment, scaling, and cosine
    are recomputed with plain numpy expressions here.
    """
    def canon(joints: np.ndarray) -> np.ndarray:
        centered = joints - joints[WRIST]
        l_x = centered[INDEX_MCP]
        v_z = np.cross(l_x, centered[17])
        z_bar = v_z / (np.linalg.norm(v_z) + 1e-8)
        x_bar = l_x / (np.linalg.norm(l_x) + 1e-8)
        y_bar = np.cross(z_bar, x_bar)
        rot = np.stack([x_bar, y_bar, z_bar])
        return (centered @ rot.T) / np.linalg.norm(l_x)

    qv = canon(query.joints).reshape(-1)
    scored = []
    for entry in bank.entries:
        if entry.gesture.chirality != query.chirality:
            continue
        ev = canon(entry.gesture.joints).reshape(-1)
        if np.array_equal(qv, ev):
            cos = 1.0
        else:
            cos = float(qv @ ev / (np.linalg.norm(qv) * np.linalg.norm(ev)))
            cos = min(1.0, max(-1.0, cos))
        scored.append((entry.id, cos))
    scored.sort(key=lambda m: (-m[1], m[0]))
    return scored[:k]


def oracle_dtm(pred: PixelPoint, mask: np.ndarray) -> float:
    """Brute-force scan over every mask pixel."""
    h, w = mask.shape
    col = int(math.floor(pred.u + 0.5))
    row = int(math.floor(pred.v + 0.5))
    if 0 <= row < h and 0 <= col < w and mask[row, col]:
        return 0.0
    best = None
    for r in range(h):
        for c in range(w):
            if not mask[r, c]:
                continue
            du = pred.u - c
            dv = pred.v - r
            # plain mul keeps this bit-comparable with the vectorized path
            dist = math.sqrt(du * du + dv * dv)
            if best is None or dist < best:
                best = dist
    if best is None:
        raise ValueError("mask has no true pixels")
    return best / math.sqrt(w * w + h * h)


# ------------------------------------------------------------ bank generation
_BANK_SCALE = (0.08, 0.12)  # meters per template unit: adult-hand sizes


def _cell_center(cell: tuple[int, int], grid: int, dims: tuple[int, int]) -> PixelPoint:
    width, height = dims
    return PixelPoint(
        (cell[1] + 0.5) * width / grid - 0.5,
        (cell[0] + 0.5) * height / grid - 0.5,
    )


def _bank_hand(rng: np.random.Generator, chirality: Chirality) -> HandKeypoints:
    transform = Sim3(
        rotation=random_rotation(rng),
        scale=float(rng.uniform(*_BANK_SCALE)),
        translation=np.array([
            rng.uniform(-0.05, 0.05),
            rng.uniform(-0.05, 0.05),
            rng.uniform(0.4, 0.7),
        ]),
    )
    return synth_hand(
        int(rng.integers(2**31)), amplitude=0.08, transform=transform,
        chirality=chirality,
    )


def _write_entry(
    bank_dir: Path,
    entry_id: str,
    hand: HandKeypoints,
    embedding: np.ndarray,
    contact_cell: tuple[int, int],
    features: np.ndarray,
    image_dims: tuple[int, int],
    category: str,
) -> dict:
    feature_ref = f"features_{entry_id}.ggt"
    write_tensor(bank_dir / feature_ref, features)
    grid = features.shape[0]
    contact = _cell_center(contact_cell, grid, image_dims)
    return {
        "id": entry_id,
        "chirality": hand.chirality.value,
        "joints": [[float(x) for x in row] for row in hand.joints],
        "embedding": [float(x) for x in embedding],
        "contact": [contact.u, contact.v],
        "image_dims": list(image_dims),
        "feature_ref": feature_ref,
        "category": category,
    }


def synth_bank(
    directory,
    n_entries: int = 6,
    seed: int = 0,
    embedding_dim: int = 32,
    grid: int = 16,
    channels: int = 16,
    image_dims: tuple[int, int] = (224, 224),
) -> MemoryBank:
    """Write a fully random bank (manifest + tensors) and return it."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    bank = MemoryBank(root=directory)
    for i in range(n_entries):
        chirality = Chirality.RIGHT if rng.random() < 0.5 else Chirality.LEFT
        record = _write_entry(
            directory,
            f"e{i:03d}",
            _bank_hand(rng, chirality),
            _unit_rows(rng, (embedding_dim,)),
            (int(rng.integers(grid)), int(rng.integers(grid))),
            _unit_rows(rng, (grid, grid, channels)).astype(np.float32),
            image_dims,
            category=f"cat{i % 4}",
        )
        bank = ingest_entry(bank, record)
    save_bank(bank, directory)
    return bank


# ------------------------------------------------------------ end-to-end cases
_E2E_INTRINSICS = CameraIntrinsics(
    fx=525.0, fy=525.0, cx=319.5, cy=239.5, width=640, height=480
)
# Rendered joints are tiny camera-facing box splats. The front face is a
# constant-depth plane at the joint's exact z, so keypoint refinement
# recovers the joint up to sub-pixel rounding only.
_SPLAT_WIDE = 0.004
_SPLAT_DEPTH = 0.002
_E2E_MIN_RAY_T = 0.32  # past the pointing hand, before any target

# Template wrist (origin) projected onto the straight index line.
_T0 = -float(np.array([1.0, 0.0, 0.0]) @ _INDEX_DIR)
_W_T = np.array([1.0, 0.0, 0.0]) + _T0 * _INDEX_DIR


def _pointing_hand(
    rng: np.random.Generator, target: np.ndarray, wrist_anchor: np.ndarray
) -> tuple[HandKeypoints, np.ndarray]:
    """Hand whose straight index finger points from the anchor at target.

    Returns (keypoints, unit pointing direction). The anchor is where
    the wrist's projection onto the pointing line ends up, so the ideal
    ray is exactly anchor -> target.
    """
    d = unit(target - wrist_anchor)
    axis = np.cross(_INDEX_DIR, d)
    sine = float(np.linalg.norm(axis))
    cosine = float(_INDEX_DIR @ d)
    if sine < 1e-12:
        base = Rotation3.identity()
    else:
        base = Rotation3.from_axis_angle(axis, math.atan2(sine, cosine))
    roll = Rotation3.from_axis_angle(d, float(rng.uniform(0.0, 2.0 * math.pi)))
    rot = roll @ base
    # large hand: a long index baseline keeps the fitted direction stable
    # against sub-pixel refinement noise
    scale = float(rng.uniform(0.12, 0.15))
    translation = wrist_anchor - scale * rot.apply(_W_T)
    hand = synth_hand(
        int(rng.integers(2**31)),
        amplitude=0.03,
        transform=Sim3(rot, scale, translation),
        frozen=INDEX_FINGER,
    )
    return hand, d


def synth_case(
    directory,
    seed: int,
    n_entries: int = 6,
    grid: int = 16,
    channels: int = 16,
    embedding_dim: int = 32,
) -> dict:
    """One complete pipeline fixture with planted ground truth.

    Writes the bank, both gesture files, the rendered scene, query
    embedding and feature map, candidates, the ground-truth mask, a
    pipeline config, and an `expected.json` with the planted answers.
    Returns the expected-values dict.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    k = _E2E_INTRINSICS

    # Redraw scene layout until the finger is side-on enough. Near-axis
    # poses stack the joint splats in projection, so refinement snaps a
    # joint to a nearer splat; the separation bound rules that out.
    # Target stays inside cx +/- 100, cy +/- 80 so the analytic crop
    # never clamps at the image border.
    for _ in range(500):
        u_t = float(rng.uniform(k.cx - 100, k.cx + 100))
        v_t = float(rng.uniform(k.cy - 80, k.cy + 80))
        z_t = float(rng.uniform(1.2, 1.6))
        target = backproject(PixelPoint(u_t, v_t), z_t, k)
        anchor = backproject(
            PixelPoint(
                float(rng.uniform(k.cx - 120, k.cx + 120)),
                float(rng.uniform(k.cy - 100, k.cy + 100)),
            ),
            float(rng.uniform(0.33, 0.45)),
            k,
        )
        pointing, direction = _pointing_hand(rng, target, anchor)
        tip_ray = unit(pointing.joints[INDEX_FINGER[-1]])
        if float(np.linalg.norm(np.cross(tip_ray, direction))) < 0.3:
            continue
        px = [project(pointing.joints[j], k) for j in (WRIST, *INDEX_FINGER)]
        sep = min(
            math.hypot(a.u - b.u, a.v - b.v)
            for i, a in enumerate(px) for b in px[:i]
        )
        if sep >= 4.5:
            break
    else:
        raise MarginUnsatisfiable("pointing hand keeps self-occluding")

    prims: list = [Plane(target, -direction)]
    for j in (WRIST, *INDEX_FINGER):
        c = pointing.joints[j]
        center = np.array([c[0], c[1], c[2] + _SPLAT_DEPTH / 2.0])
        prims.append(Box(center, (_SPLAT_WIDE, _SPLAT_WIDE, _SPLAT_DEPTH)))
    scene = render_depth(SceneSpec(tuple(prims), k, seed=seed))
    fileio.save_scene(directory / "scene.json", scene.depth, k)
    fileio.save_keypoints(directory / "pointing.json", pointing)

    # bank with one designated entry the query is engineered to retrieve
    k_star = int(rng.integers(n_entries))
    star_chir = Chirality.RIGHT if rng.random() < 0.5 else Chirality.LEFT
    src_cell = (int(rng.integers(grid)), int(rng.integers(grid)))
    tgt_cell = (int(rng.integers(3, grid - 3)), int(rng.integers(3, grid - 3)))
    src_map, tgt_map, _ = synth_featmap_pair(
        grid, grid, channels, int(rng.integers(2**31)),
        [(src_cell, tgt_cell)],
    )
    star_embedding = _unit_rows(rng, (embedding_dim,))

    bank_dir = directory / "bank"
    bank_dir.mkdir(exist_ok=True)
    bank = MemoryBank(root=bank_dir)
    star_hand = None
    for i in range(n_entries):
        if i == k_star:
            hand = _bank_hand(rng, star_chir)
            star_hand = hand
            record = _write_entry(
                bank_dir, f"e{i:03d}", hand, star_embedding, src_cell,
                src_map.data, (224, 224), category="target",
            )
        else:
            chirality = Chirality.RIGHT if rng.random() < 0.5 else Chirality.LEFT
            record = _write_entry(
                bank_dir, f"e{i:03d}", _bank_hand(rng, chirality),
                _unit_rows(rng, (embedding_dim,)),
                (int(rng.integers(grid)), int(rng.integers(grid))),
                _unit_rows(rng, (grid, grid, channels)).astype(np.float32),
                (224, 224), category=f"cat{i % 4}",
            )
        bank = ingest_entry(bank, record)
    save_bank(bank, bank_dir)

    # query gesture: a similarity-transformed copy of the target entry
    query_transform = Sim3(
        rotation=random_rotation(rng),
        scale=float(rng.uniform(0.7, 1.4)),
        translation=rng.uniform(-0.3, 0.3, 3),
    )
    grasp_hand = HandKeypoints(
        query_transform.apply(star_hand.joints), star_chir
    )
    fileio.save_keypoints(directory / "grasp.json", grasp_hand)
    fileio.save_embedding(directory / "embedding.json", star_embedding)
    write_tensor(directory / "features.ggt", tgt_map.data)

    # grasp candidates scattered around the 3D target
    cands = []
    for _ in range(12):
        t = target + rng.uniform(-0.03, 0.03, 3)
        cands.append(GraspCandidate(
            GraspPose(t, random_rotation(rng), 1),
            float(rng.uniform(0.2, 0.98)),
        ))
    save_candidates(directory / "candidates.jsonl", cands)

    # analytic crop and planted contact, full-image coordinates
    cell_px = 224 // grid
    u0 = min(max(int(math.floor(u_t + 0.5)) - 224 // 2, 0), k.width - 224)
    v0 = min(max(int(math.floor(v_t + 0.5)) - 224 // 2, 0), k.height - 224)
    contact_full = (
        u0 + (tgt_cell[1] + 0.5) * cell_px - 0.5,
        v0 + (tgt_cell[0] + 0.5) * cell_px - 0.5,
    )
    mask = np.zeros((k.height, k.width), dtype=bool)
    mask[
        v0 + tgt_cell[0] * cell_px : v0 + (tgt_cell[0] + 1) * cell_px,
        u0 + tgt_cell[1] * cell_px : u0 + (tgt_cell[1] + 1) * cell_px,
    ] = True
    fileio.save_mask(directory / "mask.pgm", mask)

    config = {
        "bank": "bank",
        "pointing_keypoints": "pointing.json",
        "grasp_keypoints": "grasp.json",
        "scene": "scene.json",
        "query_embedding": "embedding.json",
        "query_features": "features.ggt",
        "candidates": "candidates.jsonl",
        "mask": "mask.pgm",
        "params": {
            "k": 5,
            "epsilon": 0.01,
            "crop_size": 224,
            "lambda": 0.1,
            "sigma": 30.0,
            "standoff": 0.0,
            "attention": "off",
            "min_ray_t": _E2E_MIN_RAY_T,
            "ransac_threshold": 0.01,
            "ransac_iterations": 100,
        },
        "seed": seed,
    }
    fileio.write_json(directory / "pipeline.json", config)

    expected = {
        "entry_id": f"e{k_star:03d}",
        "source_cell": list(src_cell),
        "target_cell": list(tgt_cell),
        "contact_full": list(contact_full),
        "crop": [u0, v0],
        "intersection": [float(x) for x in target],
    }
    fileio.write_json(directory / "expected.json", expected)
    return expected


def synth_suite(directory, n_cases: int, seed: int = 0) -> list[Path]:
    """Generate n_cases independent pipeline fixtures under directory."""
    directory = Path(directory)
    rng = np.random.default_rng(seed)
    dirs = []
    for i in range(n_cases):
        case_dir = directory / f"case{i:03d}"
        synth_case(case_dir, seed=int(rng.integers(2**31)))
        dirs.append(case_dir)
    return dirs

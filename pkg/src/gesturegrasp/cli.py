"""Command-line surface.

Every subcommand prints a JSON payload (eval prints a table) and exits
0 on success. Package errors exit 1 with a stage-tagged message on
stderr; bad usage exits 2. Subcommands that have an HTTP twin accept
--server URL and become thin clients of a running `serve` instance.
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

from . import __version__, fileio
from .errors import GestureGraspError, ParseError, StageFailure
from .geometry import PixelPoint
from .grasp import (
    SelectionParams,
    direct_grasp,
    load_candidates,
    rotation_to_quaternion_wxyz,
    select_grasp,
)
from .gripper import hand_to_gripper_rotation
from .memory import MANIFEST_NAME, MemoryBank, ingest_entry, load_bank, save_bank
from .metrics import DEFAULT_SR_THRESHOLD, eval_batch
from .pipeline import PipelineConfig, run_pipeline
from .pointing import DEFAULT_MIN_RAY_T, locate_target
from .service import handlers
from .synth import synth_bank, synth_case, synth_suite
from .tensorio import read_tensor
from .transfer import FeatureMap, transfer_contact


def _emit(payload: dict, out=None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _post(server: str, route: str, payload: dict) -> dict:
    import httpx

    url = server.rstrip("/") + route
    resp = httpx.post(url, json=payload, timeout=120.0)
    if resp.status_code != 200:
        try:
            err = resp.json()
        except ValueError:
            raise GestureGraspError(
                f"server returned {resp.status_code}: {resp.text[:200]}"
            ) from None
        stage = err.get("stage")
        tag = f"[{stage}] " if stage else ""
        raise GestureGraspError(
            f"{tag}{err.get('error', 'error')}: {err.get('message', '')}"
        ) from None
    return resp.json()


def _keypoints_record(path) -> dict:
    return fileio.keypoints_to_record(fileio.load_keypoints(path))


# ------------------------------------------------------------------ commands
def cmd_point(args) -> int:
    scene = fileio.load_scene(args.scene)
    kp = fileio.load_keypoints(args.keypoints)
    result, refined = locate_target(
        kp,
        scene,
        epsilon=args.epsilon,
        crop_size=args.crop_size,
        ransac_threshold=args.ransac_threshold,
        ransac_iterations=args.ransac_iterations,
        min_ray_t=args.min_ray_t,
    )
    crop = result.crop
    _emit(
        {
            "origin": [float(x) for x in result.ray.origin],
            "direction": [float(x) for x in result.ray.direction],
            "target3d": [float(x) for x in result.target3d],
            "target2d": [result.target2d.u, result.target2d.v],
            "crop": [crop.u0, crop.v0, crop.w, crop.h],
            "inlier_count": result.inlier_count,
            "refined": [bool(b) for b in refined],
        },
        args.out,
    )
    return 0


def cmd_canon(args) -> int:
    record = _keypoints_record(args.keypoints)
    if args.server:
        payload = _post(args.server, "/v1/canon", {"keypoints": record})
    else:
        payload = handlers.canon_handler(record)
    _emit(payload, args.out)
    return 0


def cmd_ingest(args) -> int:
    bank_dir = Path(args.bank)
    bank_dir.mkdir(parents=True, exist_ok=True)
    if (bank_dir / MANIFEST_NAME).is_file():
        bank = load_bank(bank_dir)
    else:
        bank = MemoryBank(root=bank_dir)

    features = Path(args.features)
    if not features.is_file():
        raise ParseError(f"feature tensor not found: {features}")
    if features.parent.resolve() == bank_dir.resolve():
        feature_ref = features.name
    else:
        feature_ref = features.name
        dst = bank_dir / feature_ref
        if dst.exists() and dst.resolve() != features.resolve():
            raise ParseError(f"refusing to overwrite {dst}")
        shutil.copyfile(features, dst)

    kp_record = _keypoints_record(args.keypoints)
    record = {
        "id": args.id,
        "chirality": kp_record["chirality"],
        "joints": kp_record["joints"],
        "embedding": [float(x) for x in fileio.load_embedding(args.embedding)],
        "contact": [args.contact[0], args.contact[1]],
        "image_dims": [args.image_dims[0], args.image_dims[1]],
        "feature_ref": feature_ref,
    }
    if args.image_ref:
        record["image_ref"] = args.image_ref
    if args.category:
        record["category"] = args.category
    bank = ingest_entry(bank, record)
    save_bank(bank, bank_dir)
    _emit({"bank": str(bank_dir), "entries": len(bank), "ingested": args.id}, None)
    return 0


def cmd_retrieve(args) -> int:
    record = _keypoints_record(args.keypoints)
    embedding = [float(x) for x in fileio.load_embedding(args.embedding)]
    if args.server:
        payload = _post(
            args.server,
            "/v1/retrieve",
            {"bank": str(Path(args.bank).absolute()), "keypoints": record,
             "embedding": embedding, "k": args.k},
        )
    else:
        payload = handlers.retrieve_handler(args.bank, record, embedding, args.k)
    _emit(payload, args.out)
    return 0


def cmd_transfer(args) -> int:
    src = FeatureMap(read_tensor(args.src_features, expected_rank=3),
                     (args.src_dims[0], args.src_dims[1]))
    tgt = FeatureMap(read_tensor(args.tgt_features, expected_rank=3),
                     (args.tgt_dims[0], args.tgt_dims[1]))
    corr = transfer_contact(
        src,
        PixelPoint(args.src_contact[0], args.src_contact[1]),
        tgt,
        window_radius=args.window_radius,
    )
    _emit(
        {
            "target_pixel": [corr.target_pixel.u, corr.target_pixel.v],
            "target_cell": list(corr.target_cell),
            "similarity": corr.similarity,
        },
        args.out,
    )
    return 0


def cmd_rot(args) -> int:
    record = _keypoints_record(args.keypoints)
    if args.server:
        payload = _post(args.server, "/v1/rot", {"keypoints": record})
    else:
        payload = handlers.rot_handler(record)
    _emit(payload, args.out)
    return 0


def cmd_grasp(args) -> int:
    scene = fileio.load_scene(args.scene)
    rotation = hand_to_gripper_rotation(fileio.load_keypoints(args.keypoints))
    contact = PixelPoint(args.contact[0], args.contact[1])
    if args.direct:
        pose = direct_grasp(contact, scene, rotation, args.standoff)
        payload = {
            "mode": "direct",
            "pose": {
                "t": [float(x) for x in pose.t],
                "quat": [float(x) for x in rotation_to_quaternion_wxyz(pose.R)],
                "w": pose.w,
            },
        }
    else:
        if not args.candidates:
            raise ParseError("--candidates required unless --direct")
        candidates = load_candidates(args.candidates)
        params = SelectionParams(lam=args.lam, sigma=args.sigma,
                                 attention=args.attention)
        selection = select_grasp(candidates, rotation, contact,
                                 scene.intrinsics, params)
        pose = selection.candidate.pose
        payload = {
            "mode": "select",
            "index": selection.index,
            "score": selection.candidate.score,
            "pose": {
                "t": [float(x) for x in pose.t],
                "quat": [float(x) for x in rotation_to_quaternion_wxyz(pose.R)],
                "w": pose.w,
            },
            "breakdown": [
                {
                    "index": row.index,
                    "score": row.score,
                    "deviation": row.deviation,
                    "attention": row.attention,
                    "effective": row.effective,
                }
                for row in selection.scores
            ],
        }
    _emit(payload, args.out)
    return 0


_PARAM_KEYS = ("k", "epsilon", "crop_size", "lam", "sigma", "standoff",
               "attention", "min_ray_t", "ransac_threshold", "ransac_iterations")
_PATH_KEYS = ("bank", "pointing_keypoints", "grasp_keypoints", "scene",
              "query_embedding", "query_features", "candidates", "mask")
_FLAG_KEYS = ("no_pointing", "no_transfer", "no_rotation", "no_grasp_model")


def cmd_pipeline(args) -> int:
    config_path = Path(args.config)
    data = fileio._load_json(config_path, "pipeline config")
    for key in _PATH_KEYS:
        value = getattr(args, key)
        if value is not None:
            data[key] = str(Path(value).absolute())
    params = dict(data.get("params", {}))
    for key in _PARAM_KEYS:
        value = getattr(args, key)
        if value is not None:
            params["lambda" if key == "lam" else key] = value
    if params:
        data["params"] = params
    ablations = dict(data.get("ablations", {}))
    for key in _FLAG_KEYS:
        if getattr(args, key):
            ablations[key] = True
            if key == "no_grasp_model":
                data.pop("candidates", None)
    if ablations:
        data["ablations"] = ablations
    if args.seed is not None:
        data["seed"] = args.seed

    base_dir = config_path.absolute().parent
    if args.server:
        resp = _post(
            args.server,
            "/v1/pipeline",
            {"config": data, "base_dir": str(base_dir),
             "include_timings": args.include_timings},
        )
        text = json.dumps(resp["report"], sort_keys=True, indent=2) + "\n"
    else:
        report = run_pipeline(PipelineConfig.from_dict(data, base_dir))
        text = report.to_json(include_timings=args.include_timings)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args) -> int:
    report = eval_batch(args.cases, sr_threshold=args.sr_threshold)
    sys.stdout.write(report.table())
    if args.out:
        fileio.write_json(args.out, report.to_dict())
    return 0


def cmd_synth(args) -> int:
    out = Path(args.out)
    if args.what == "bank":
        bank = synth_bank(
            out,
            n_entries=args.entries,
            seed=args.seed,
            embedding_dim=args.embedding_dim,
            grid=args.grid,
            channels=args.channels,
            image_dims=(args.image_dims[0], args.image_dims[1]),
        )
        _emit({"bank": str(out), "entries": len(bank)}, None)
    elif args.what == "case":
        expected = synth_case(
            out,
            seed=args.seed,
            n_entries=args.entries,
            grid=args.grid,
            channels=args.channels,
            embedding_dim=args.embedding_dim,
        )
        _emit({"case": str(out), "expected": expected}, None)
    else:
        dirs = synth_suite(out, n_cases=args.cases, seed=args.seed)
        _emit({"suite": str(out), "cases": [d.name for d in dirs]}, None)
    return 0


def cmd_validate(args) -> int:
    if args.server:
        payload = _post(args.server, "/v1/validate",
                        {"bank": str(Path(args.bank).absolute())})
    else:
        payload = handlers.validate_handler(args.bank)
    _emit(payload, args.out)
    return 0 if payload["ok"] else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


# -------------------------------------------------------------------- parser
def _add_out(p):
    p.add_argument("--out", help="write the JSON payload here instead of stdout")


def _add_server(p):
    p.add_argument("--server", help="base URL of a running serve instance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gesturegrasp",
        description="Gesture-conditioned grasp selection toolkit",
    )
    parser.add_argument("-V", "--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="pointing ray, depth intersection, crop")
    p.add_argument("--keypoints", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--crop-size", type=int, default=224)
    p.add_argument("--min-ray-t", type=float, default=DEFAULT_MIN_RAY_T)
    p.add_argument("--ransac-threshold", type=float, default=0.01)
    p.add_argument("--ransac-iterations", type=int, default=100)
    _add_out(p)
    p.set_defaults(fn=cmd_point)

    p = sub.add_parser("canon", help="canonicalize a hand gesture")
    p.add_argument("--keypoints", required=True)
    _add_out(p)
    _add_server(p)
    p.set_defaults(fn=cmd_canon)

    p = sub.add_parser("ingest", help="append one entry to a bank")
    p.add_argument("--bank", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--keypoints", required=True)
    p.add_argument("--embedding", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--contact", nargs=2, type=float, required=True,
                   metavar=("U", "V"))
    p.add_argument("--image-dims", nargs=2, type=int, required=True,
                   metavar=("W", "H"))
    p.add_argument("--image-ref")
    p.add_argument("--category")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("retrieve", help="two-stage retrieval from a bank")
    p.add_argument("--bank", required=True)
    p.add_argument("--keypoints", required=True)
    p.add_argument("--embedding", required=True)
    p.add_argument("--k", type=int, default=5)
    _add_out(p)
    _add_server(p)
    p.set_defaults(fn=cmd_retrieve)

    p = sub.add_parser("transfer", help="contact-point feature matching")
    p.add_argument("--src-features", required=True)
    p.add_argument("--src-dims", nargs=2, type=int, required=True,
                   metavar=("W", "H"))
    p.add_argument("--src-contact", nargs=2, type=float, required=True,
                   metavar=("U", "V"))
    p.add_argument("--tgt-features", required=True)
    p.add_argument("--tgt-dims", nargs=2, type=int, required=True,
                   metavar=("W", "H"))
    p.add_argument("--window-radius", type=int, default=None)
    _add_out(p)
    p.set_defaults(fn=cmd_transfer)

    p = sub.add_parser("rot", help="hand pose to gripper rotation")
    p.add_argument("--keypoints", required=True)
    _add_out(p)
    _add_server(p)
    p.set_defaults(fn=cmd_rot)

    p = sub.add_parser("grasp", help="re-rank candidates or back off directly")
    p.add_argument("--scene", required=True)
    p.add_argument("--keypoints", required=True)
    p.add_argument("--contact", nargs=2, type=float, required=True,
                   metavar=("U", "V"))
    p.add_argument("--candidates")
    p.add_argument("--direct", action="store_true")
    p.add_argument("--standoff", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p.add_argument("--sigma", type=float, default=30.0)
    p.add_argument("--attention", choices=("off", "weight"), default="off")
    _add_out(p)
    p.set_defaults(fn=cmd_grasp)

    p = sub.add_parser("pipeline", help="run all stages from a config file")
    p.add_argument("--config", required=True)
    for key in _PATH_KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key)
    p.add_argument("--k", type=int, dest="k")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--crop-size", type=int, dest="crop_size")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--standoff", type=float)
    p.add_argument("--attention", choices=("off", "weight"))
    p.add_argument("--min-ray-t", type=float, dest="min_ray_t")
    p.add_argument("--ransac-threshold", type=float, dest="ransac_threshold")
    p.add_argument("--ransac-iterations", type=int, dest="ransac_iterations")
    for key in _FLAG_KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key,
                       action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--include-timings", action="store_true")
    _add_out(p)
    _add_server(p)
    p.set_defaults(fn=cmd_pipeline)

    p = sub.add_parser("eval", help="batch DTM evaluation over case dirs")
    p.add_argument("--cases", required=True)
    p.add_argument("--sr-threshold", type=float, default=DEFAULT_SR_THRESHOLD)
    _add_out(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("synth", help="generate synthetic fixtures")
    synth_sub = p.add_subparsers(dest="what", required=True)
    for what in ("bank", "case", "suite"):
        q = synth_sub.add_parser(what)
        q.add_argument("--out", required=True)
        q.add_argument("--seed", type=int, default=0)
        if what in ("bank", "case"):
            q.add_argument("--entries", type=int, default=6)
            q.add_argument("--grid", type=int, default=16)
            q.add_argument("--channels", type=int, default=16)
            q.add_argument("--embedding-dim", type=int, default=32)
        if what == "bank":
            q.add_argument("--image-dims", nargs=2, type=int,
                           default=(224, 224), metavar=("W", "H"))
        if what == "suite":
            q.add_argument("--cases", type=int, required=True)
        q.set_defaults(fn=cmd_synth)

    p = sub.add_parser("validate", help="re-check every bank invariant")
    p.add_argument("--bank", required=True)
    _add_out(p)
    _add_server(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except StageFailure as exc:
        print(f"gesturegrasp {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except GestureGraspError as exc:
        print(
            f"gesturegrasp {args.command}: error: [{args.command}] "
            f"{type(exc).__name__}: {exc}",
            file=sys.stderr,
        )
        return 1
    except ValueError as exc:
        print(f"gesturegrasp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"gesturegrasp {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"gesturegrasp {args.command}: error: unknown id {exc}",
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

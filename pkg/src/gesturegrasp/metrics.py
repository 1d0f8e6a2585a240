"""Distance-to-mask metric and the batch evaluation runner."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fileio
from .errors import EmptyMask, GestureGraspError
from .geometry import PixelPoint
from .pipeline import PipelineConfig, run_pipeline

DEFAULT_SR_THRESHOLD = 0.05


def compute_dtm(pred: PixelPoint, mask: np.ndarray, dims=None) -> float:
    """Normalized distance from a predicted pixel to the nearest mask pixel.

    Zero when the prediction rounds into the mask; otherwise the minimum
    Euclidean pixel distance divided by the image diagonal. Distances use
    plain multiply/add/sqrt so results are reproducible bit-for-bit.
    `dims` is (width, height) and must match the mask when given.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-d, got shape {mask.shape}")
    if dims is not None and tuple(dims) != (mask.shape[1], mask.shape[0]):
        raise ValueError(f"dims {tuple(dims)} do not match mask {mask.shape}")
    mask = mask.astype(bool)
    if not mask.any():
        raise EmptyMask("mask has no true pixels")
    h, w = mask.shape
    col = int(math.floor(pred.u + 0.5))
    row = int(math.floor(pred.v + 0.5))
    if 0 <= row < h and 0 <= col < w and mask[row, col]:
        return 0.0
    rows, cols = np.nonzero(mask)
    du = pred.u - cols.astype(np.float64)
    dv = pred.v - rows.astype(np.float64)
    dist = np.sqrt(du * du + dv * dv)
    return float(dist.min()) / math.sqrt(w * w + h * h)


@dataclass(frozen=True)
class CaseResult:
    name: str
    status: str  # "ok" | "error"
    dtm: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class EvalReport:
    cases: tuple[CaseResult, ...]
    sr_threshold: float = DEFAULT_SR_THRESHOLD

    def summary(self) -> dict:
        total = len(self.cases)
        ok = [c for c in self.cases if c.status == "ok"]
        dtms = [c.dtm for c in ok if c.dtm is not None]
        hits = sum(1 for d in dtms if d <= self.sr_threshold)
        return {
            "cases": total,
            "completed": len(ok),
            "failures": total - len(ok),
            "completion_rate": len(ok) / total if total else 0.0,
            "mean_dtm": float(np.mean(dtms)) if dtms else None,
            "median_dtm": float(np.median(dtms)) if dtms else None,
            # completion + DTM threshold; a proxy, not a physical grasp rate
            "proxy_success_rate": hits / total if total else 0.0,
            "sr_threshold": self.sr_threshold,
        }

    def to_dict(self) -> dict:
        return {
            "cases": [
                {"name": c.name, "status": c.status, "dtm": c.dtm, "error": c.error}
                for c in self.cases
            ],
            "summary": self.summary(),
        }

    def table(self) -> str:
        width = max([len(c.name) for c in self.cases] + [4])
        lines = [f"{'case':<{width}}  {'status':<6}  dtm"]
        for c in self.cases:
            dtm = "-" if c.dtm is None else f"{c.dtm:.6f}"
            tail = f"  {c.error}" if c.error else ""
            lines.append(f"{c.name:<{width}}  {c.status:<6}  {dtm}{tail}")
        s = self.summary()
        mean = "-" if s["mean_dtm"] is None else f"{s['mean_dtm']:.6f}"
        median = "-" if s["median_dtm"] is None else f"{s['median_dtm']:.6f}"
        lines.append(
            f"cases {s['cases']}  completed {s['completed']}  "
            f"mean_dtm {mean}  median_dtm {median}"
        )
        lines.append(
            f"proxy success rate {s['proxy_success_rate']:.3f} "
            f"(completion + dtm <= {s['sr_threshold']:g}; not a physical grasp rate)"
        )
        return "\n".join(lines) + "\n"


def _case_dirs(cases_dir: Path) -> list[Path]:
    return sorted(
        p for p in cases_dir.iterdir()
        if p.is_dir() and (p / "pipeline.json").is_file()
    )


def eval_batch(cases_dir, sr_threshold: float = DEFAULT_SR_THRESHOLD) -> EvalReport:
    """Run the pipeline over every case directory, tolerating failures.

    A case is a directory containing pipeline.json; DTM is reported when
    the case config lists a mask. Raises ValueError when no case is found
    so callers can surface a usage error.
    """
    cases_dir = Path(cases_dir)
    if not cases_dir.is_dir():
        raise ValueError(f"not a directory: {cases_dir}")
    dirs = _case_dirs(cases_dir)
    if not dirs:
        raise ValueError(f"no cases with pipeline.json under {cases_dir}")
    results = []
    for case in dirs:
        try:
            config = PipelineConfig.from_file(case / "pipeline.json")
            report = run_pipeline(config)
            dtm = None
            if config.mask is not None:
                mask = fileio.load_mask(config.mask)
                contact = report.data["contact"]
                dtm = compute_dtm(PixelPoint(contact[0], contact[1]), mask)
            results.append(CaseResult(case.name, "ok", dtm=dtm))
        except (GestureGraspError, ValueError, OSError) as exc:
            results.append(
                CaseResult(case.name, "error", error=f"{type(exc).__name__}: {exc}")
            )
    return EvalReport(tuple(results), sr_threshold)

"""Seam quality metrics for comparison and regression tracking."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np

from .core import OverlapRegion, StitchConfig, luma
from .evaluation import EvaluationSignal, extract_patches, fill_outside
from .graphcut import Seam


def zncc_from_patches(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """ZNCC of stacked patches ``(..., k, k)``.

    Flat patches: 1 when both are constant and equal, 0 otherwise.
    """
    n = x.shape[-1] * x.shape[-2]
    x = x.reshape(x.shape[:-2] + (n,))
    y = y.reshape(y.shape[:-2] + (n,))
    dx = x - x.mean(axis=-1, keepdims=True)
    dy = y - y.mean(axis=-1, keepdims=True)
    flat_x = np.ptp(x, axis=-1) == 0
    flat_y = np.ptp(y, axis=-1) == 0
    denom = np.sqrt((dx * dx).sum(axis=-1) * (dy * dy).sum(axis=-1))
    with np.errstate(invalid="ignore", divide="ignore"):
        z = (dx * dy).sum(axis=-1) / denom
    z = np.clip(z, -1.0, 1.0)
    both_equal = flat_x & flat_y & np.all(x == y, axis=-1)
    z = np.where(flat_x | flat_y, np.where(both_equal, 1.0, 0.0), z)
    return z


def zncc_scores(seam: Seam, i0, i1, patch_size: int = 21,
                region: OverlapRegion | None = None) -> np.ndarray:
    y0 = luma(np.asarray(i0, dtype=np.float64))
    y1 = luma(np.asarray(i1, dtype=np.float64))
    if region is not None:
        y0 = fill_outside(y0, region.overlap)
        y1 = fill_outside(y1, region.overlap)
    return zncc_from_patches(extract_patches(y0, seam.p, patch_size),
                             extract_patches(y1, seam.p, patch_size))


def zncc_quality(seam: Seam, i0, i1, patch_size: int = 21,
                 region: OverlapRegion | None = None) -> float:
    """Average of ``(1 - ZNCC) / 2`` over the seam crossings; in [0, 1]."""
    z = zncc_scores(seam, i0, i1, patch_size, region)
    return float(np.mean((1.0 - z) / 2.0))


@dataclass
class SeamReport:
    q_seam: float
    length: int
    mean_eval: float
    max_eval: float
    median_eval: float
    p90_eval: float
    mean_point: float
    max_point: float
    table: dict | None = None

    def to_dict(self, with_table: bool = False) -> dict:
        out = asdict(self)
        if not with_table:
            out.pop("table")
        return out

    def to_json(self, path=None, **kw) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True, **kw)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    def table_csv(self, path) -> None:
        keys = list(self.table)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index"] + keys)
            for i in range(self.length):
                writer.writerow([i] + [repr(float(self.table[k][i])) for k in keys])


def seam_report(seam: Seam, evals: EvaluationSignal, i0, i1,
                cfg: StitchConfig | None = None, region: OverlapRegion | None = None) -> SeamReport:
    cfg = cfg or StitchConfig()
    if len(evals) != len(seam):
        raise ValueError("evaluation signal does not match the seam")
    z = zncc_scores(seam, i0, i1, cfg.patch_size, region)
    e = evals.combined
    return SeamReport(
        q_seam=float(np.mean((1.0 - z) / 2.0)),
        length=len(seam),
        mean_eval=float(e.mean()),
        max_eval=float(e.max()),
        median_eval=float(np.percentile(e, 50)),
        p90_eval=float(np.percentile(e, 90)),
        mean_point=float(evals.point_raw.mean()),
        max_point=float(evals.point_raw.max()),
        table={"zncc": z, "patch_raw": evals.patch_raw, "point_raw": evals.point_raw,
               "patch_smooth": evals.patch_smooth, "point_smooth": evals.point_smooth,
               "combined": e},
    )

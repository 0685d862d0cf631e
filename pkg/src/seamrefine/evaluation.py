"""Patch-point evaluation of seam crossings.

For crossing ``i`` with pixels ``p_i`` (label 0) and ``q_i`` (label 1):

* patch score  ``(1 - SSIM(p_i)) / 2`` on luma patches centred at ``p_i``
* point score  mean of the colour differences at ``p_i`` and ``q_i``
* combined     ``lambda * smooth(patch) * smooth(point)``
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .core import OverlapRegion, StitchConfig, StitchError, luma
from .graphcut import Seam

C1 = 0.01 ** 2
C2 = 0.03 ** 2


class LengthMismatch(StitchError, ValueError):
    pass


@dataclass(frozen=True)
class EvaluationSignal:
    patch_raw: np.ndarray
    point_raw: np.ndarray
    patch_smooth: np.ndarray
    point_smooth: np.ndarray
    combined: np.ndarray

    def __len__(self) -> int:
        return len(self.combined)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "patch_raw", "point_raw", "patch_smooth",
                             "point_smooth", "combined"])
            for i in range(len(self)):
                writer.writerow([i, repr(float(self.patch_raw[i])), repr(float(self.point_raw[i])),
                                 repr(float(self.patch_smooth[i])), repr(float(self.point_smooth[i])),
                                 repr(float(self.combined[i]))])


# ---------------------------------------------------------------------------
# patches

def extract_patches(channel: np.ndarray, centers, patch_size: int) -> np.ndarray:
    """``(n, k, k)`` windows of a 2-D array, edge-replicated at the borders."""
    half = patch_size // 2
    padded = np.pad(channel, half, mode="edge")
    windows = sliding_window_view(padded, (patch_size, patch_size))
    centers = np.asarray(centers, dtype=np.int64).reshape(-1, 2)
    return windows[centers[:, 0], centers[:, 1]]


def ssim_from_patches(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """SSIM of stacked patches ``(..., k, k)`` with uniform weights.

    Variances and covariance use the unbiased ``1/(N-1)`` normalization.
    """
    n = x.shape[-1] * x.shape[-2]
    x = x.reshape(x.shape[:-2] + (n,))
    y = y.reshape(y.shape[:-2] + (n,))
    mx = x.mean(axis=-1)
    my = y.mean(axis=-1)
    dx = x - mx[..., None]
    dy = y - my[..., None]
    vx = (dx * dx).sum(axis=-1) / (n - 1)
    vy = (dy * dy).sum(axis=-1) / (n - 1)
    cxy = (dx * dy).sum(axis=-1) / (n - 1)
    return ((2 * mx * my + C1) * (2 * cxy + C2)) / ((mx * mx + my * my + C1) * (vx + vy + C2))


def ssim_patch(i0, i1, center, patch_size: int = 21) -> float:
    """SSIM between the luma patches of ``i0`` and ``i1`` centred at ``center``."""
    if patch_size % 2 == 0:
        raise ValueError("patch_size must be odd")
    y0 = luma(np.asarray(i0, dtype=np.float64))
    y1 = luma(np.asarray(i1, dtype=np.float64))
    a = extract_patches(y0, [center], patch_size)
    b = extract_patches(y1, [center], patch_size)
    return float(ssim_from_patches(a, b)[0])


def fill_outside(img: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Replace pixels outside ``valid`` by their nearest valid pixel.

    Generalizes edge replication from the canvas border to the overlap
    border so patches never read from the area where one image is missing.
    """
    if valid.all():
        return img
    _, (ri, ci) = ndimage.distance_transform_edt(~valid, return_indices=True)
    return img[ri, ci]


# ---------------------------------------------------------------------------
# per-crossing scores

def patch_eval(seam: Seam, i0, i1, cfg: StitchConfig | int = 21,
               region: OverlapRegion | None = None) -> np.ndarray:
    patch_size = cfg.patch_size if isinstance(cfg, StitchConfig) else int(cfg)
    y0 = luma(np.asarray(i0, dtype=np.float64))
    y1 = luma(np.asarray(i1, dtype=np.float64))
    if region is not None:
        y0 = fill_outside(y0, region.overlap)
        y1 = fill_outside(y1, region.overlap)
    a = extract_patches(y0, seam.p, patch_size)
    b = extract_patches(y1, seam.p, patch_size)
    return np.clip((1.0 - ssim_from_patches(a, b)) / 2.0, 0.0, 1.0)


def point_eval(seam: Seam, i0, i1) -> np.ndarray:
    i0 = np.asarray(i0, dtype=np.float64)
    i1 = np.asarray(i1, dtype=np.float64)
    dp = i0[seam.p[:, 0], seam.p[:, 1]] - i1[seam.p[:, 0], seam.p[:, 1]]
    dq = i0[seam.q[:, 0], seam.q[:, 1]] - i1[seam.q[:, 0], seam.q[:, 1]]
    return (np.linalg.norm(dp, axis=1) + np.linalg.norm(dq, axis=1)) / 2.0


# ---------------------------------------------------------------------------
# smoothing

def _soft(x: np.ndarray, t: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def haar_denoise(signal, depth: int | None = None) -> np.ndarray:
    """Haar wavelet shrinkage with the universal soft threshold.

    Uses the averaging form of the Haar transform (``s = (a+b)/2``,
    ``d = (a-b)/2``) so constant signals reconstruct exactly; the threshold
    is applied on the orthonormal scale, where level-``j`` details are
    ``2**(j/2) * d``.  Odd lengths are extended by repeating the last sample.
    """
    x = np.asarray(signal, dtype=np.float64)
    n = len(x)
    if n < 2:
        return x.copy()
    if depth is None:
        depth = min(3, int(math.floor(math.log2(n))))
    approx = x
    details = []
    lengths = []
    for _ in range(depth):
        lengths.append(len(approx))
        if len(approx) % 2:
            approx = np.append(approx, approx[-1])
        a, b = approx[0::2], approx[1::2]
        details.append((a - b) / 2.0)
        approx = (a + b) / 2.0
    finest = details[0] * math.sqrt(2.0)
    sigma = np.median(np.abs(finest)) / 0.6745
    tau = sigma * math.sqrt(2.0 * math.log(n))
    for j in range(depth, 0, -1):
        d = _soft(details[j - 1], tau / 2.0 ** (j / 2.0))
        up = np.empty(2 * len(d))
        up[0::2] = approx + d
        up[1::2] = approx - d
        approx = up[:lengths[j - 1]]
    return np.maximum(approx, 0.0)


def moving_average(signal, window: int = 9) -> np.ndarray:
    """Centred moving average with replicated ends."""
    x = np.asarray(signal, dtype=np.float64)
    if len(x) == 0:
        return x.copy()
    half = window // 2
    win = sliding_window_view(np.pad(x, half, mode="edge"), window)
    # averaging deviations keeps constant runs bit-exact
    return x + (win - x[:, None]).mean(axis=1)


def smooth_signal(signal, method: str = "wavelet") -> np.ndarray:
    if method == "wavelet":
        return haar_denoise(signal)
    if method in ("moving-average", "movavg"):
        return moving_average(signal)
    if method == "none":
        return np.asarray(signal, dtype=np.float64).copy()
    raise ValueError(f"unknown smoothing method {method!r}")


def combine(patch_smooth, point_smooth, lam: float = 10.0) -> np.ndarray:
    a = np.asarray(patch_smooth, dtype=np.float64)
    b = np.asarray(point_smooth, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"signal lengths differ: {a.shape} vs {b.shape}")
    return lam * a * b


def evaluate_seam(seam: Seam, i0, i1, cfg: StitchConfig,
                  region: OverlapRegion | None = None) -> EvaluationSignal:
    """Run the full patch-point evaluation along ``seam``."""
    patch = patch_eval(seam, i0, i1, cfg, region)
    point = point_eval(seam, i0, i1)
    patch_s = smooth_signal(patch, cfg.smoothing)
    point_s = smooth_signal(point, cfg.smoothing)
    return EvaluationSignal(patch, point, patch_s, point_s, combine(patch_s, point_s, cfg.lambda_))

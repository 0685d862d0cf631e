"""Image I/O, homography warping and labeling interchange files."""
from __future__ import annotations

import json
import os
from pathlib import Path

import cv2
import numpy as np

from .core import AlignedPair, OverlapRegion, StitchError, as_image
from .graphcut import Labeling, Seam


class ImageIOError(StitchError, OSError):
    pass


class DecodeError(StitchError, ValueError):
    pass


class SingularHomography(StitchError, ValueError):
    pass


class FormatError(StitchError, ValueError):
    pass


# ---------------------------------------------------------------------------
# raster files

def load_image(path) -> np.ndarray:
    """Read a PNG/JPEG as an ``(H, W, 3)`` RGB float image in [0, 1].

    8-bit files are divided by 255, 16-bit files by 65535.  Grayscale is
    replicated to three channels and alpha is dropped.
    """
    path = Path(path)
    if not path.is_file():
        raise ImageIOError(f"no such image file: {path}")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise DecodeError(f"cannot decode image: {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise DecodeError(f"unsupported sample type {raw.dtype} in {path}")
    if raw.ndim == 2:
        rgb = np.repeat(raw[..., None], 3, axis=2)
    elif raw.shape[2] == 4:
        rgb = cv2.cvtColor(raw, cv2.COLOR_BGRA2RGB)
    else:
        rgb = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
    return rgb.astype(np.float64) / scale


def to_uint8(image: np.ndarray) -> np.ndarray:
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_image(image, path) -> None:
    """Write an 8-bit PNG."""
    img = to_uint8(np.asarray(image, dtype=np.float64))
    if img.ndim == 3:
        img = cv2.cvtColor(img, cv2.COLOR_RGB2BGR)
    _imwrite(path, img)


def save_mask(mask, path) -> None:
    _imwrite(path, np.where(np.asarray(mask, bool), 255, 0).astype(np.uint8))


def load_mask(path) -> np.ndarray:
    return load_image(path)[..., 0] > 0.5


def _imwrite(path, arr) -> None:
    path = Path(path)
    if not path.parent.is_dir():
        raise ImageIOError(f"directory does not exist: {path.parent}")
    try:
        ok = cv2.imwrite(str(path), arr)
    except cv2.error as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc
    if not ok:
        raise ImageIOError(f"cannot write {path}")


def hot_colormap(x) -> np.ndarray:
    """Black-red-yellow-white colormap for values in [0, 1]."""
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)[..., None]
    return np.clip(np.concatenate([3 * x, 3 * x - 1, 3 * x - 2], axis=-1), 0.0, 1.0)


def render_overlay(image, seam: Seam, values=None, vmax: float | None = None) -> np.ndarray:
    """Paint seam pixels (both sides of each crossing) by evaluation value.

    Values are divided by ``vmax`` (default: their maximum) before the
    colormap; a pixel shared by several crossings takes the largest value.
    """
    out = np.array(image, dtype=np.float64, copy=True)
    if len(seam) == 0:
        return out
    values = np.zeros(len(seam)) if values is None else np.asarray(values, dtype=np.float64)
    if vmax is None:
        vmax = float(values.max())
    scaled = values / vmax if vmax > 0 else np.zeros_like(values)
    level = np.full(out.shape[:2], -1.0)
    for pts in (seam.p, seam.q):
        np.maximum.at(level, (pts[:, 0], pts[:, 1]), scaled)
    painted = level >= 0
    out[painted] = hot_colormap(level[painted])
    return out


def save_overlay(image, seam: Seam, path, values=None, vmax: float | None = None) -> None:
    save_image(render_overlay(image, seam, values, vmax), path)


# ---------------------------------------------------------------------------
# homographies

def as_homography(h) -> np.ndarray:
    """Validate a 3x3 (or 9-vector) homography, normalized to unit Frobenius norm."""
    m = np.asarray(h, dtype=np.float64).reshape(3, 3)
    if not np.all(np.isfinite(m)):
        raise SingularHomography("homography has non-finite entries")
    norm = np.linalg.norm(m)
    if norm == 0:
        raise SingularHomography("homography is zero")
    m = m / norm
    if abs(np.linalg.det(m)) <= 1e-12:
        raise SingularHomography("homography is not invertible")
    return m


def load_homography(path) -> np.ndarray:
    """Read 9 row-major numbers from a JSON array or whitespace/comma text file."""
    path = Path(path)
    if not path.is_file():
        raise ImageIOError(f"no such homography file: {path}")
    text = path.read_text()
    try:
        values = np.asarray(json.loads(text), dtype=np.float64).ravel()
    except (json.JSONDecodeError, ValueError, TypeError):
        try:
            values = np.array(text.replace(",", " ").split(), dtype=np.float64)
        except ValueError as exc:
            raise FormatError(f"cannot parse homography in {path}") from exc
    if values.size != 9:
        raise FormatError(f"homography in {path} has {values.size} numbers, expected 9")
    return as_homography(values)


def _snap(v, tol: float = 1e-9):
    r = np.round(v)
    return np.where(np.abs(v - r) < tol, r, v)


def bilinear_sample(img: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample ``img`` at real coordinates already known to lie inside it."""
    h, w = img.shape[:2]
    x0 = np.clip(np.floor(x).astype(np.int64), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(y).astype(np.int64), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (x - x0)[:, None]
    fy = (y - y0)[:, None]
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bottom = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    return top * (1 - fy) + bottom * fy


def warp_target(target, h, canvas: tuple[int, int]):
    """Inverse-map bilinear warp of ``target`` onto a ``canvas = (H, W)`` grid.

    ``h`` maps target pixel coordinates ``(x, y, 1)`` (x = column) to canvas
    coordinates.  Returns ``(image, mask)``; the mask is true exactly where
    the preimage falls inside the target rectangle.
    """
    target = as_image(target, "target")
    hh, ww = int(canvas[0]), int(canvas[1])
    if hh < 1 or ww < 1:
        raise ValueError("canvas must be at least 1x1")
    inv = np.linalg.inv(as_homography(h))
    ys, xs = np.mgrid[0:hh, 0:ww]
    pts = np.stack([xs.ravel(), ys.ravel(), np.ones(hh * ww)]).astype(np.float64)
    src = inv @ pts
    with np.errstate(divide="ignore", invalid="ignore"):
        sx = src[0] / src[2]
        sy = src[1] / src[2]
    th, tw = target.shape[:2]
    # round-off must not push exact integer preimages off the edges
    sx, sy = _snap(sx), _snap(sy)
    inside = (src[2] > 0) & (sx >= 0) & (sx <= tw - 1) & (sy >= 0) & (sy <= th - 1)
    out = np.zeros((hh * ww, 3))
    out[inside] = bilinear_sample(target, sx[inside], sy[inside])
    return out.reshape(hh, ww, 3), inside.reshape(hh, ww)


def align_pair(ref, target, h=None) -> AlignedPair:
    """Place ``ref`` and the (optionally warped) ``target`` on one canvas.

    Without ``h`` both images sit at the origin on a canvas large enough for
    either.  With ``h`` the canvas is the bounding box of the reference
    rectangle and the warped target footprint.
    """
    ref = as_image(ref, "ref")
    target = as_image(target, "target")
    rh, rw = ref.shape[:2]
    if h is None:
        hh, ww = max(rh, target.shape[0]), max(rw, target.shape[1])
        i0 = np.zeros((hh, ww, 3))
        i1 = np.zeros((hh, ww, 3))
        m0 = np.zeros((hh, ww), bool)
        m1 = np.zeros((hh, ww), bool)
        i0[:rh, :rw] = ref
        m0[:rh, :rw] = True
        i1[:target.shape[0], :target.shape[1]] = target
        m1[:target.shape[0], :target.shape[1]] = True
        return AlignedPair(i0, i1, m0, m1)
    h = as_homography(h)
    th, tw = target.shape[:2]
    corners = np.array([[0, 0, 1], [tw - 1, 0, 1], [0, th - 1, 1], [tw - 1, th - 1, 1]], float).T
    mapped = h @ corners
    if np.any(mapped[2] <= 0):
        raise SingularHomography("homography maps target corners behind the camera")
    mx, my = _snap(mapped[0] / mapped[2]), _snap(mapped[1] / mapped[2])
    x_min = min(0.0, np.floor(mx.min()))
    y_min = min(0.0, np.floor(my.min()))
    x_max = max(rw - 1.0, np.ceil(mx.max()))
    y_max = max(rh - 1.0, np.ceil(my.max()))
    ox, oy = int(-x_min), int(-y_min)
    canvas = (int(y_max - y_min) + 1, int(x_max - x_min) + 1)
    shift = np.array([[1, 0, ox], [0, 1, oy], [0, 0, 1]], dtype=np.float64)
    i1, m1 = warp_target(target, shift @ h, canvas)
    i0 = np.zeros(canvas + (3,))
    m0 = np.zeros(canvas, bool)
    i0[oy:oy + rh, ox:ox + rw] = ref
    m0[oy:oy + rh, ox:ox + rw] = True
    return AlignedPair(i0, i1, m0, m1)


# ---------------------------------------------------------------------------
# labeling interchange: 0/255 PGM over the overlap box + JSON sidecar

def save_labeling(labeling: Labeling, path) -> None:
    path = Path(path)
    region = labeling.region
    img = np.where(labeling.labels == 1, 255, 0).astype(np.uint8)
    _imwrite(path, img)
    r0, r1, c0, c1 = region.bbox
    sidecar = {"canvas": list(region.shape), "bbox": [r0, r1, c0, c1],
               "format": "0 = reference, 255 = target, rows/cols relative to bbox"}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def load_labeling(path, region: OverlapRegion) -> Labeling:
    path = Path(path)
    side = path.with_suffix(".json")
    if not path.is_file():
        raise ImageIOError(f"no such labeling file: {path}")
    if not side.is_file():
        raise FormatError(f"missing labeling sidecar {side}")
    try:
        meta = json.loads(side.read_text())
        bbox = tuple(int(v) for v in meta["bbox"])
        canvas = tuple(int(v) for v in meta["canvas"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad labeling sidecar {side}: {exc}") from exc
    if canvas != tuple(region.shape) or bbox != tuple(region.bbox):
        raise FormatError(f"labeling {path} was made for canvas {canvas} / bbox {bbox}, "
                          f"pair has {region.shape} / {region.bbox}")
    raw = cv2.imread(os.fspath(path), cv2.IMREAD_GRAYSCALE)
    if raw is None or raw.shape != region.local_mask.shape:
        raise FormatError(f"labeling image {path} does not match bbox {bbox}")
    labels = np.where(raw > 127, 1, 0).astype(np.int8)
    labels[~region.local_mask] = -1
    return Labeling(labels, region)

"""Shared image, mask, overlap and configuration types.

Images are ``(H, W, 3)`` float64 arrays with channels in [0, 1]; masks are
``(H, W)`` bool arrays on the same canvas.  Everything downstream of
:func:`compute_overlap` works on the bounding box of the overlap, so the
region keeps both the canvas-sized masks and the box.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Any

import numpy as np


class StitchError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(StitchError, ValueError):
    pass


class EmptyOverlap(StitchError):
    pass


class InvalidConfig(StitchError, ValueError):
    pass


# ---------------------------------------------------------------------------
# images and masks

def as_image(data, name: str = "image") -> np.ndarray:
    """Validate and return ``data`` as an ``(H, W, 3)`` float64 image."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionMismatch(f"{name} must have shape (H, W, 3), got {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise DimensionMismatch(f"{name} is empty")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ValueError(f"{name} channels must lie in [0, 1]")
    return img


def as_mask(data, shape: tuple[int, int] | None = None, name: str = "mask") -> np.ndarray:
    mask = np.asarray(data, dtype=bool)
    if mask.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got {mask.shape}")
    if shape is not None and mask.shape != tuple(shape):
        raise DimensionMismatch(f"{name} has shape {mask.shape}, canvas is {tuple(shape)}")
    return mask


def luma(img: np.ndarray) -> np.ndarray:
    """Rec. 601 luma of an RGB image."""
    return img[..., 0] * 0.299 + img[..., 1] * 0.587 + img[..., 2] * 0.114


# ---------------------------------------------------------------------------
# overlap

@dataclass(frozen=True)
class OverlapRegion:
    """Partition of the canvas induced by two validity footprints.

    ``bbox`` is ``(r0, r1, c0, c1)`` (half-open) around the overlap.
    ``index`` maps every bbox pixel to its dense overlap id, or -1.
    """

    overlap: np.ndarray
    ref_only: np.ndarray
    target_only: np.ndarray
    bbox: tuple[int, int, int, int]
    index: np.ndarray
    coords: np.ndarray  # (n, 2) canvas (row, col) of each overlap pixel, row-major

    @property
    def shape(self) -> tuple[int, int]:
        return self.overlap.shape

    @property
    def size(self) -> int:
        return len(self.coords)

    @property
    def origin(self) -> tuple[int, int]:
        return self.bbox[0], self.bbox[2]

    def crop(self, arr: np.ndarray) -> np.ndarray:
        """Slice a canvas-sized array down to the overlap bounding box."""
        r0, r1, c0, c1 = self.bbox
        return arr[r0:r1, c0:c1]

    @property
    def local_mask(self) -> np.ndarray:
        return self.crop(self.overlap)

    def uncrop(self, local: np.ndarray, fill=0) -> np.ndarray:
        r0, r1, c0, c1 = self.bbox
        out = np.full(self.shape + local.shape[2:], fill, dtype=local.dtype)
        out[r0:r1, c0:c1] = local
        return out


def compute_overlap(mask0, mask1) -> OverlapRegion:
    """Split two footprints into overlap / reference-only / target-only."""
    m0 = as_mask(mask0, name="mask0")
    m1 = as_mask(mask1, m0.shape, name="mask1")
    overlap = m0 & m1
    if not overlap.any():
        raise EmptyOverlap("the two footprints do not overlap")
    rows = np.flatnonzero(overlap.any(axis=1))
    cols = np.flatnonzero(overlap.any(axis=0))
    bbox = (int(rows[0]), int(rows[-1]) + 1, int(cols[0]), int(cols[-1]) + 1)
    local = overlap[bbox[0]:bbox[1], bbox[2]:bbox[3]]
    index = np.full(local.shape, -1, dtype=np.int64)
    index[local] = np.arange(int(local.sum()))
    rr, cc = np.nonzero(local)
    coords = np.stack([rr + bbox[0], cc + bbox[2]], axis=1)
    for arr in (overlap, index, coords):
        arr.setflags(write=False)
    return OverlapRegion(overlap=overlap, ref_only=m0 & ~m1, target_only=~m0 & m1,
                         bbox=bbox, index=index, coords=coords)


@dataclass(frozen=True)
class AlignedPair:
    """Two images on a shared canvas with their validity masks."""

    ref: np.ndarray
    target: np.ndarray
    mask0: np.ndarray
    mask1: np.ndarray
    region: OverlapRegion = field(init=False, repr=False)

    def __post_init__(self):
        ref = as_image(self.ref, "ref")
        target = as_image(self.target, "target")
        if ref.shape != target.shape:
            raise DimensionMismatch(f"ref {ref.shape} and target {target.shape} differ")
        m0 = as_mask(self.mask0, ref.shape[:2], "mask0")
        m1 = as_mask(self.mask1, ref.shape[:2], "mask1")
        object.__setattr__(self, "ref", ref)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "mask0", m0)
        object.__setattr__(self, "mask1", m1)
        object.__setattr__(self, "region", compute_overlap(m0, m1))

    @classmethod
    def full(cls, ref, target) -> "AlignedPair":
        """Pair whose footprints both cover the whole canvas."""
        ref = np.asarray(ref, dtype=np.float64)
        m = np.ones(ref.shape[:2], dtype=bool)
        return cls(ref, target, m, m.copy())

    @property
    def shape(self) -> tuple[int, int]:
        return self.ref.shape[:2]


# ---------------------------------------------------------------------------
# difference map

@dataclass(frozen=True)
class DifferenceMap:
    """Nonnegative per-pixel cost over the overlap bounding box.

    Entries outside the overlap (``~region.local_mask``) are zero and unused.
    """

    values: np.ndarray
    region: OverlapRegion

    def __post_init__(self):
        if self.values.shape != self.region.local_mask.shape:
            raise DimensionMismatch("difference map does not match the overlap box")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("difference map must be finite and nonnegative")

    def at(self, rc: np.ndarray) -> np.ndarray:
        """Values at canvas coordinates ``rc`` (shape ``(n, 2)``)."""
        r0, _, c0, _ = self.region.bbox
        rc = np.asarray(rc)
        return self.values[rc[:, 0] - r0, rc[:, 1] - c0]

    def canvas(self) -> np.ndarray:
        return self.region.uncrop(self.values)


def difference_map(i0, i1, region: OverlapRegion) -> DifferenceMap:
    """Euclidean RGB distance between the two images on the overlap."""
    i0 = np.asarray(i0, dtype=np.float64)
    i1 = np.asarray(i1, dtype=np.float64)
    if i0.shape != i1.shape or i0.shape[:2] != region.shape:
        raise DimensionMismatch(
            f"images {i0.shape}/{i1.shape} do not match canvas {region.shape}")
    d = region.crop(i0) - region.crop(i1)
    values = np.sqrt(np.sum(d * d, axis=-1))
    values[~region.local_mask] = 0.0
    return DifferenceMap(values, region)


# ---------------------------------------------------------------------------
# configuration

SMOOTHING_METHODS = ("wavelet", "moving-average", "none")
_SMOOTHING_ALIASES = {"movavg": "moving-average", "moving_average": "moving-average"}


@dataclass(frozen=True)
class StitchConfig:
    """Parameters of the coarse-to-fine seam search.

    Defaults: 21x21 patches, lambda 10, sigma 5, epsilon 0.12, band radius 5.
    ``lambda_`` serializes as ``"lambda"``.
    """

    patch_size: int = 21
    lambda_: float = 10.0
    sigma: float = 5.0
    epsilon: float = 0.12
    band_radius: int = 5
    max_iterations: int = 20
    smoothing: str = "wavelet"
    poisson_tolerance: float = 1e-6
    compounding: bool = True

    def __post_init__(self):
        smoothing = _SMOOTHING_ALIASES.get(self.smoothing, self.smoothing)
        object.__setattr__(self, "smoothing", smoothing)
        if smoothing not in SMOOTHING_METHODS:
            raise InvalidConfig(f"unknown smoothing method {self.smoothing!r}")
        if int(self.patch_size) != self.patch_size or self.patch_size < 3 or self.patch_size % 2 == 0:
            raise InvalidConfig(f"patch_size must be an odd integer >= 3, got {self.patch_size}")
        if self.band_radius < 1:
            raise InvalidConfig("band_radius must be >= 1")
        if self.max_iterations < 1:
            raise InvalidConfig("max_iterations must be >= 1")
        if not self.poisson_tolerance > 0:
            raise InvalidConfig("poisson_tolerance must be positive")

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for f in fields(self):
            key = "lambda" if f.name == "lambda_" else f.name
            out[key] = getattr(self, f.name)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "StitchConfig":
        names = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            name = "lambda_" if key in ("lambda", "lam") else key.replace("-", "_")
            if name not in names:
                raise InvalidConfig(f"unknown config key {key!r}")
            kwargs[name] = value
        return cls(**kwargs)

    def with_overrides(self, **overrides) -> "StitchConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

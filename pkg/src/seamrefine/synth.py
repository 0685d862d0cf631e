"""Synthetic aligned pairs with a known parallax band and a zero-error corridor.

Canvas layout: the reference covers the left part, the target the right
part, and they overlap in ``overlap_width`` central columns.  Inside a band
of rows the target content is translated horizontally by ``shift`` pixels
(the parallax), except on a vertical corridor that is left identical in
both images.  Colours are quantized to 8 bits so fixtures survive a PNG
round trip exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import AlignedPair, StitchError, difference_map

TEXTURES = ("gradient", "checker", "noise")


class InvalidSpec(StitchError, ValueError):
    pass


@dataclass(frozen=True)
class FixtureSpec:
    height: int = 48
    width: int = 96
    overlap_width: int = 40
    shift: int = 4
    texture: str = "checker"
    corridor_column: int | None = None
    corridor_width: int = 2
    band_top: int | None = None
    band_height: int | None = None
    seed: int = 0
    cell: int | None = None  # checker cell size; random in [3, 6] when unset

    @classmethod
    def from_dict(cls, data: dict) -> "FixtureSpec":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise InvalidSpec(f"unknown fixture spec keys: {sorted(extra)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Fixture:
    pair: AlignedPair
    misaligned: np.ndarray
    corridor: np.ndarray
    spec: FixtureSpec
    target_offset: int = field(default=0)

    @property
    def seed(self) -> int:
        return self.spec.seed


def _texture(kind: str, h: int, w: int, rng: np.random.Generator,
             cell: int | None = None) -> np.ndarray:
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    if kind == "gradient":
        tilt = rng.uniform(0.2, 0.8)
        r = xs / max(w - 1, 1)
        g = ys / max(h - 1, 1)
        b = tilt * r + (1 - tilt) * (1 - g)
        img = np.stack([r, g, b], axis=-1) * 0.8 + 0.1
    elif kind == "checker":
        drawn = int(rng.integers(3, 7))
        cell = drawn if cell is None else cell
        c0, c1 = rng.uniform(0.05, 0.45, 3), rng.uniform(0.55, 0.95, 3)
        on = ((ys // cell + xs // cell) % 2).astype(bool)
        img = np.where(on[..., None], c1, c0)
    elif kind == "noise":
        img = rng.uniform(0.0, 1.0, (h, w, 3))
    else:
        raise InvalidSpec(f"unknown texture {kind!r}; expected one of {TEXTURES}")
    return np.round(np.clip(img, 0.0, 1.0) * 255.0) / 255.0


def make_fixture(spec: FixtureSpec | dict | None = None) -> Fixture:
    spec = FixtureSpec() if spec is None else spec
    if isinstance(spec, dict):
        spec = FixtureSpec.from_dict(spec)
    h, w, ow = spec.height, spec.width, spec.overlap_width
    if h < 3 or w < 4:
        raise InvalidSpec("canvas must be at least 3x4")
    if not 2 <= ow <= w - 2:
        raise InvalidSpec(f"overlap_width must be in [2, {w - 2}], got {ow}")
    if spec.shift < 0:
        raise InvalidSpec("shift must be >= 0")
    if spec.corridor_width < 2:
        raise InvalidSpec("corridor_width must be >= 2 so a zero-cost crossing exists")
    start = (w - ow) // 2
    end = start + ow
    cc = start + (ow - spec.corridor_width) // 2 if spec.corridor_column is None else spec.corridor_column
    if cc < start or cc + spec.corridor_width > end:
        raise InvalidSpec(f"corridor columns [{cc}, {cc + spec.corridor_width}) "
                          f"are outside the overlap [{start}, {end})")

    rng = np.random.default_rng(spec.seed)
    if spec.cell is not None and spec.cell < 1:
        raise InvalidSpec("cell must be >= 1")
    base = _texture(spec.texture, h, w, rng, spec.cell)
    top = int(rng.integers(h // 6, h // 3 + 1)) if spec.band_top is None else spec.band_top
    bh = int(rng.integers(h // 3, h // 2 + 1)) if spec.band_height is None else spec.band_height
    if top < 0 or bh < 1 or top + bh > h:
        raise InvalidSpec(f"band rows [{top}, {top + bh}) do not fit in {h} rows")

    corridor = np.zeros((h, w), bool)
    corridor[:, cc:cc + spec.corridor_width] = True
    region = np.zeros((h, w), bool)
    region[top:top + bh, start:end] = True
    region &= ~corridor

    target = base.copy()
    if spec.shift:
        rows, cols = np.nonzero(region)
        target[rows, cols] = base[rows, np.clip(cols - spec.shift, 0, w - 1)]

    m0 = np.zeros((h, w), bool)
    m1 = np.zeros((h, w), bool)
    m0[:, :end] = True
    m1[:, start:] = True
    ref = np.where(m0[..., None], base, 0.0)
    target = np.where(m1[..., None], target, 0.0)
    pair = AlignedPair(ref, target, m0, m1)
    d = difference_map(ref, target, pair.region).canvas()
    misaligned = region & (d > 0)
    return Fixture(pair, misaligned, corridor, spec, target_offset=start)


def write_fixture(fixture: Fixture, outdir) -> dict:
    """Write ref/target PNGs (cropped to their footprints), masks, homography, spec."""
    from .ingest import save_image, save_mask

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    pair = fixture.pair
    cols0 = np.flatnonzero(pair.mask0.any(axis=0))
    cols1 = np.flatnonzero(pair.mask1.any(axis=0))
    save_image(pair.ref[:, cols0[0]:cols0[-1] + 1], out / "ref.png")
    save_image(pair.target[:, cols1[0]:cols1[-1] + 1], out / "target.png")
    save_mask(fixture.misaligned, out / "misaligned_mask.png")
    save_mask(fixture.corridor, out / "corridor_mask.png")
    h = [1, 0, int(cols1[0]), 0, 1, 0, 0, 0, 1]
    (out / "homography.json").write_text(json.dumps(h) + "\n")
    (out / "spec.json").write_text(json.dumps(fixture.spec.to_dict(), indent=2, sort_keys=True) + "\n")
    return {"ref": out / "ref.png", "target": out / "target.png",
            "homography": out / "homography.json"}


def fixture_suite(n: int = 50, base_seed: int = 0) -> list[FixtureSpec]:
    """Deterministic mix of textures, shifts and corridor positions.

    Checker fixtures use a cell equal to the shift, so the translated band
    disagrees at every pixel and only the corridor offers a zero-cost path.
    """
    rng = np.random.default_rng(base_seed)
    specs = []
    for i in range(n):
        h = int(rng.integers(32, 57))
        w = int(rng.integers(64, 97))
        ow = int(rng.integers(20, min(48, w - 8) + 1))
        start = (w - ow) // 2
        cc = start + int(rng.integers(0, ow - 1))
        shift = int(rng.integers(1, 7))
        texture = TEXTURES[i % 3]
        specs.append(FixtureSpec(height=h, width=w, overlap_width=ow, shift=shift,
                                 texture=texture, corridor_column=cc,
                                 seed=int(base_seed * 1000 + i),
                                 cell=shift if texture == "checker" else None))
    return specs

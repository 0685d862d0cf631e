"""Small builders shared by the test modules."""
import numpy as np

from seamrefine.core import AlignedPair, DifferenceMap, compute_overlap


def side_by_side(i0, i1, ref_cols, target_start):
    """Reference on columns ``[0, ref_cols)``, target on ``[target_start, W)``."""
    h, w = i0.shape[:2]
    m0 = np.zeros((h, w), bool)
    m1 = np.zeros((h, w), bool)
    m0[:, :ref_cols] = True
    m1[:, target_start:] = True
    return AlignedPair(i0, i1, m0, m1)


def strip_region(rows, overlap_cols):
    """Canvas with one reference-only column, the overlap, one target-only column."""
    w = overlap_cols + 2
    m0 = np.zeros((rows, w), bool)
    m1 = np.zeros((rows, w), bool)
    m0[:, :w - 1] = True
    m1[:, 1:] = True
    return m0, m1, compute_overlap(m0, m1)


def diff_from_local(region, local_values):
    vals = np.where(region.local_mask, local_values, 0.0)
    return DifferenceMap(vals, region)


def random_small_instance(rng, max_pixels=12):
    """Random footprints on a small canvas with an overlap of at most ``max_pixels``.

    Returns ``(m0, m1, region, canvas_diff)`` or None if the draw is unusable.
    """
    from seamrefine.core import EmptyOverlap

    h = int(rng.integers(2, 5))
    w = int(rng.integers(4, 8))
    m0 = np.zeros((h, w), bool)
    m1 = np.zeros((h, w), bool)
    a = int(rng.integers(2, w))
    b = int(rng.integers(1, a))
    m0[:, :a] = True
    m1[:, b:] = True
    # punch random holes to get irregular overlaps
    holes = rng.random((h, w)) < 0.15
    m0 &= ~(holes & (rng.random((h, w)) < 0.5))
    m1 &= ~(holes & ~m0)
    try:
        region = compute_overlap(m0, m1)
    except EmptyOverlap:
        return None
    if region.size > max_pixels or region.size < 2:
        return None
    d = rng.random((h, w)) * (m0 & m1)
    if rng.random() < 0.3:
        d = np.round(d * 4) / 4  # force ties
    return m0, m1, region, d


def texture_vs_flat_pair(seed=0, h=60, w=64):
    """Textured left half with 1 px parallax, flat right half with an exposure offset.

    The flat half has the smaller colour difference, so the first cut hugs
    the texture boundary; patch scores then push the seam into the flat part.
    """
    rng = np.random.default_rng(seed)
    tex = np.clip(0.5 + 0.12 * rng.standard_normal((h, w + 2)), 0, 1)
    ref = np.full((h, w, 3), 0.5)
    tgt = np.full((h, w, 3), 0.56)
    ref[:, :34] = tex[:, :34, None]
    tgt[:, :34] = tex[:, 1:35, None]
    m0 = np.zeros((h, w), bool)
    m1 = np.zeros((h, w), bool)
    m0[:, :54] = True
    m1[:, 10:] = True
    return AlignedPair(np.where(m0[..., None], ref, 0), np.where(m1[..., None], tgt, 0), m0, m1)

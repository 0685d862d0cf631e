import json

import cv2
import numpy as np
import pytest

from seamrefine.core import AlignedPair
from seamrefine.graphcut import Labeling, Seam
from seamrefine.ingest import (DecodeError, FormatError, ImageIOError, SingularHomography,
                               align_pair, as_homography, hot_colormap, load_homography,
                               load_image, load_labeling, render_overlay, save_image,
                               save_labeling, warp_target)

from oracles import warp_loop


def test_white_png_loads_as_ones(tmp_path):
    cv2.imwrite(str(tmp_path / "w.png"), np.full((2, 2, 3), 255, np.uint8))
    img = load_image(tmp_path / "w.png")
    assert img.shape == (2, 2, 3) and img.dtype == np.float64
    assert np.all(img == 1.0)


def test_channel_order_and_gray(tmp_path):
    bgr = np.zeros((1, 1, 3), np.uint8)
    bgr[0, 0] = (0, 0, 255)  # red in BGR order
    cv2.imwrite(str(tmp_path / "r.png"), bgr)
    assert load_image(tmp_path / "r.png")[0, 0].tolist() == [1.0, 0.0, 0.0]
    cv2.imwrite(str(tmp_path / "g.png"), np.full((2, 3), 51, np.uint8))
    np.testing.assert_array_equal(load_image(tmp_path / "g.png"), 0.2)


def test_sixteen_bit_scale(tmp_path):
    cv2.imwrite(str(tmp_path / "s.png"), np.full((2, 2, 3), 65535, np.uint16))
    assert np.all(load_image(tmp_path / "s.png") == 1.0)
    cv2.imwrite(str(tmp_path / "h.png"), np.full((2, 2), 257, np.uint16))
    np.testing.assert_allclose(load_image(tmp_path / "h.png"), 257 / 65535)


def test_missing_and_undecodable(tmp_path):
    with pytest.raises(ImageIOError, match="nope.png"):
        load_image(tmp_path / "nope.png")
    (tmp_path / "bad.png").write_bytes(b"not an image")
    with pytest.raises(DecodeError):
        load_image(tmp_path / "bad.png")


def test_save_load_round_trip(tmp_path, rng):
    img = np.round(rng.random((7, 9, 3)) * 255) / 255
    save_image(img, tmp_path / "a.png")
    np.testing.assert_array_equal(load_image(tmp_path / "a.png"), img)


def test_identity_warp(rng):
    t = rng.random((6, 8, 3))
    out, mask = warp_target(t, np.eye(3), (6, 8))
    assert mask.all()
    np.testing.assert_allclose(out, t, atol=1e-12)


def test_translation_by_three(rng):
    t = rng.random((5, 5, 3))
    h = np.array([[1, 0, 3], [0, 1, 0], [0, 0, 1]], float)
    out, mask = warp_target(t, h, (5, 10))
    np.testing.assert_array_equal(np.flatnonzero(mask.any(axis=0)), np.arange(3, 8))
    np.testing.assert_allclose(out[:, 3:8], t, atol=1e-12)


def test_random_affine_matches_loop(rng):
    t = rng.random((9, 11, 3))
    for _ in range(3):
        a = np.eye(3)
        a[:2, :2] += 0.15 * rng.standard_normal((2, 2))
        a[:2, 2] = rng.uniform(-2, 4, 2)
        out, mask = warp_target(t, a, (14, 16))
        ref, ref_mask = warp_loop(t, a, (14, 16))
        np.testing.assert_array_equal(mask, ref_mask)
        assert np.abs(out - ref).max() <= 1e-9


def test_projective_matches_loop(rng):
    t = rng.random((8, 8, 3))
    h = np.array([[1.05, 0.02, 1.5], [-0.03, 0.98, 0.7], [1e-3, -2e-3, 1.0]])
    out, mask = warp_target(t, h, (12, 12))
    ref, ref_mask = warp_loop(t, h, (12, 12))
    np.testing.assert_array_equal(mask, ref_mask)
    assert np.abs(out - ref).max() <= 1e-9


def test_singular_homography():
    with pytest.raises(SingularHomography):
        as_homography(np.zeros((3, 3)))
    with pytest.raises(SingularHomography):
        as_homography([[1, 2, 3], [2, 4, 6], [0, 0, 1]])


def test_load_homography_formats(tmp_path):
    (tmp_path / "h.json").write_text(json.dumps([[1, 0, 2], [0, 1, 0], [0, 0, 1]]))
    (tmp_path / "h.txt").write_text("1 0 2\n0 1 0\n0 0 1\n")
    np.testing.assert_allclose(load_homography(tmp_path / "h.json"),
                               load_homography(tmp_path / "h.txt"))
    (tmp_path / "bad.txt").write_text("1 2 3")
    with pytest.raises(FormatError):
        load_homography(tmp_path / "bad.txt")


def test_align_pair_translation_canvas(rng):
    ref, tgt = rng.random((10, 20, 3)), rng.random((10, 20, 3))
    pair = align_pair(ref, tgt, [[1, 0, 12], [0, 1, 0], [0, 0, 1]])
    assert pair.shape == (10, 32)
    assert pair.region.overlap.sum() == 10 * 8
    np.testing.assert_allclose(pair.target[:, 12:], tgt, atol=1e-12)


def test_align_pair_negative_offset(rng):
    ref, tgt = rng.random((6, 6, 3)), rng.random((6, 6, 3))
    pair = align_pair(ref, tgt, [[1, 0, -2], [0, 1, -1], [0, 0, 1]])
    assert pair.shape == (7, 8)
    np.testing.assert_array_equal(pair.ref[1:, 2:], ref)
    np.testing.assert_allclose(pair.target[:6, :6], tgt, atol=1e-12)


def test_overlay_empty_seam_is_identity(rng):
    img = rng.random((5, 5, 3))
    empty = Seam(np.zeros((0, 2), int), np.zeros((0, 2), int))
    np.testing.assert_array_equal(render_overlay(img, empty), img)


def test_overlay_zero_values_black(rng):
    img = rng.random((5, 5, 3))
    seam = Seam(np.array([[1, 1], [2, 1]]), np.array([[1, 2], [2, 2]]))
    out = render_overlay(img, seam, [0.0, 0.0])
    assert np.all(out[1:3, 1:3] == 0)
    np.testing.assert_array_equal(out[0], img[0])
    np.testing.assert_array_equal(hot_colormap([0.0, 1.0]), [[0, 0, 0], [1, 1, 1]])


def test_labeling_round_trip(tmp_path, rng):
    m0 = np.zeros((6, 10), bool)
    m1 = np.zeros((6, 10), bool)
    m0[:, :7] = True
    m1[1:, 3:] = True
    img = rng.random((6, 10, 3))
    pair = AlignedPair(img * m0[..., None], img * m1[..., None], m0, m1)
    labels = np.where(pair.region.local_mask, 0, -1).astype(np.int8)
    labels[:, 2:][pair.region.local_mask[:, 2:]] = 1
    lab = Labeling(labels, pair.region)
    save_labeling(lab, tmp_path / "lab.pgm")
    back = load_labeling(tmp_path / "lab.pgm", pair.region)
    np.testing.assert_array_equal(back.labels, lab.labels)


def test_labeling_wrong_pair(tmp_path, rng):
    img = rng.random((4, 4, 3))
    pair = AlignedPair.full(img, img)
    labels = np.zeros((4, 4), np.int8)
    labels[:, 2:] = 1
    save_labeling(Labeling(labels, pair.region), tmp_path / "lab.pgm")
    other = AlignedPair.full(rng.random((5, 4, 3)), rng.random((5, 4, 3)))
    with pytest.raises(FormatError):
        load_labeling(tmp_path / "lab.pgm", other.region)

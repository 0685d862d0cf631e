import numpy as np
import pytest

from seamrefine.blend import (EMPTY, OVERLAP, REF, TARGET, SolverDivergence, build_system,
                              composite_naive, conjugate_gradient, poisson_fuse, target_side)
from seamrefine.core import AlignedPair, difference_map
from seamrefine.graphcut import Labeling, cut

from oracles import poisson_dense


def _strip_pair(i0, i1, lo, hi):
    h, w = i0.shape[:2]
    m0 = np.zeros((h, w), bool)
    m1 = np.zeros((h, w), bool)
    m0[:, :hi] = True
    m1[:, lo:] = True
    return AlignedPair(np.where(m0[..., None], i0, 0), np.where(m1[..., None], i1, 0), m0, m1)


def _column_labeling(pair, col):
    reg = pair.region
    lab = np.full(reg.local_mask.shape, -1, np.int8)
    r0, r1, c0, c1 = reg.bbox
    cols = np.arange(c0, c1)
    lab[reg.local_mask] = 0
    lab[:, cols >= col] = 1
    return Labeling(lab, reg)


def test_naive_composite_sources(rng):
    i0, i1 = rng.random((10, 16, 3)), rng.random((10, 16, 3))
    pair = _strip_pair(i0, i1, 5, 11)
    lab = _column_labeling(pair, 8)
    comp = composite_naive(pair, lab)
    np.testing.assert_array_equal(comp.image[:, :8], i0[:, :8])
    np.testing.assert_array_equal(comp.image[:, 8:], i1[:, 8:])
    assert (comp.provenance[:, :5] == REF).all() and (comp.provenance[:, 11:] == TARGET).all()
    assert (comp.provenance[:, 5:11] == OVERLAP).all()


def test_naive_pixels_come_from_one_source(rng):
    i0, i1 = rng.random((12, 20, 3)), rng.random((12, 20, 3))
    pair = _strip_pair(i0, i1, 6, 14)
    lab = cut(difference_map(pair.ref, pair.target, pair.region))
    img = composite_naive(pair, lab).image
    same0 = (img == i0).all(axis=2)
    same1 = (img == i1).all(axis=2)
    assert (same0 | same1).all()


def test_empty_provenance_outside_support(rng):
    i0 = rng.random((6, 6, 3))
    m0 = np.zeros((6, 6), bool)
    m1 = np.zeros((6, 6), bool)
    m0[:3, :4] = True
    m1[:3, 2:] = True
    pair = AlignedPair(i0 * m0[..., None], i0 * m1[..., None], m0, m1)
    lab = _column_labeling(pair, 3)
    comp = composite_naive(pair, lab)
    assert (comp.provenance[3:] == EMPTY).all()
    assert (comp.image[3:] == 0).all()


def test_identical_images_fuse_to_naive(rng):
    img = rng.random((20, 30, 3))
    pair = _strip_pair(img, img, 10, 20)
    lab = _column_labeling(pair, 15)
    fused = poisson_fuse(pair, lab)
    naive = composite_naive(pair, lab)
    assert np.abs(fused.image - naive.image).max() <= 1e-6


def test_constant_offset_is_removed(rng):
    base = 0.2 + 0.6 * rng.random((16, 24, 3))
    pair = _strip_pair(base, base + 0.1, 8, 16)
    lab = _column_labeling(pair, 12)
    fused = poisson_fuse(pair, lab, tolerance=1e-10)
    assert np.abs(fused.image - base).max() <= 1e-5


def test_gray_step_becomes_flat():
    i0 = np.full((8, 16, 3), 0.2)
    i1 = np.full((8, 16, 3), 0.8)
    pair = _strip_pair(i0, i1, 5, 11)
    fused = poisson_fuse(pair, _column_labeling(pair, 8), tolerance=1e-10)
    np.testing.assert_allclose(fused.image, 0.2, atol=1e-8)


def test_matches_dense_solve(rng):
    i0, i1 = rng.random((12, 12, 3)), rng.random((12, 12, 3))
    pair = _strip_pair(i0, i1, 3, 9)
    lab = cut(difference_map(pair.ref, pair.target, pair.region))
    _, raw = poisson_fuse(pair, lab, tolerance=1e-12, return_raw=True)
    omega = target_side(pair, lab)
    naive = composite_naive(pair, lab).image
    dense = poisson_dense(pair.target, pair.mask0 | pair.mask1, pair.mask1, omega, naive)
    assert np.abs(raw - dense).max() <= 1e-8


def test_pixels_outside_omega_unchanged(rng):
    i0, i1 = rng.random((12, 18, 3)), rng.random((12, 18, 3))
    pair = _strip_pair(i0, i1, 6, 12)
    lab = _column_labeling(pair, 9)
    fused = poisson_fuse(pair, lab)
    keep = ~target_side(pair, lab)
    assert fused.image[keep].tobytes() == composite_naive(pair, lab).image[keep].tobytes()


def test_residual_below_tolerance(rng):
    i0, i1 = rng.random((14, 20, 3)), rng.random((14, 20, 3))
    pair = _strip_pair(i0, i1, 6, 14)
    lab = _column_labeling(pair, 10)
    omega = target_side(pair, lab)
    system = build_system(pair, omega, composite_naive(pair, lab).image)
    for tol in (1e-4, 1e-6, 1e-9):
        for ch in range(3):
            b = system.rhs[:, ch]
            x, res, _ = conjugate_gradient(system.matrix, b, tol)
            true = np.linalg.norm(b - system.matrix @ x) / np.linalg.norm(b)
            assert true <= tol and res == pytest.approx(true, rel=1e-12)


def test_maximum_principle_for_smooth_guidance():
    # harmonic guidance (a linear ramp) stays within the boundary range
    h, w = 10, 20
    ramp = np.linspace(0.3, 0.6, w)[None, :, None] * np.ones((h, w, 3))
    i0 = np.full((h, w, 3), 0.5)
    pair = _strip_pair(i0, ramp, 8, 12)
    fused, raw = poisson_fuse(pair, _column_labeling(pair, 10), 1e-10, return_raw=True)
    omega = target_side(pair, _column_labeling(pair, 10))
    # the anchor column 9 holds 0.5; the ramp increments are carried over
    expected = 0.5 + (ramp - ramp[:, 9:10])
    np.testing.assert_allclose(raw[omega], expected[omega], atol=1e-7)


def test_unanchored_component_keeps_target(rng):
    # the target footprint has an island that never touches a reference pixel
    i0, i1 = rng.random((8, 12, 3)), rng.random((8, 12, 3))
    m0 = np.zeros((8, 12), bool)
    m1 = np.zeros((8, 12), bool)
    m0[:, :6] = True
    m1[:, 4:8] = True
    m1[:, 10:] = True
    pair = AlignedPair(i0 * m0[..., None], i1 * m1[..., None], m0, m1)
    labeling = _column_labeling(pair, 5)
    fused = poisson_fuse(pair, labeling)
    np.testing.assert_array_equal(fused.image[:, 10:], i1[:, 10:])
    np.testing.assert_array_equal(fused.image[:, :5], i0[:, :5])
    assert not np.array_equal(fused.image[:, 5:8], i1[:, 5:8])


def test_cg_divergence_raised(rng):
    import scipy.sparse as sp

    a = sp.csr_matrix(np.diag(rng.random(20) + 1.0) + 0.1)
    with pytest.raises(SolverDivergence):
        conjugate_gradient(a, rng.random(20), 1e-14, maxiter=1)


def test_cg_zero_rhs():
    import scipy.sparse as sp

    x, res, it = conjugate_gradient(sp.eye(5, format="csr"), np.zeros(5))
    assert it == 0 and res == 0.0 and not x.any()


def test_membrane_correction_obeys_maximum_principle(rng):
    i0, i1 = rng.random((16, 22, 3)), rng.random((16, 22, 3))
    pair = _strip_pair(i0, i1, 6, 16)
    lab = cut(difference_map(pair.ref, pair.target, pair.region))
    _, raw = poisson_fuse(pair, lab, tolerance=1e-12, return_raw=True)
    omega = target_side(pair, lab)
    naive = composite_naive(pair, lab).image
    # anchors: reference-side pixels 4-adjacent to omega, inside the target footprint
    near = np.zeros_like(omega)
    near[1:] |= omega[:-1]
    near[:-1] |= omega[1:]
    near[:, 1:] |= omega[:, :-1]
    near[:, :-1] |= omega[:, 1:]
    anchors = near & ~omega & pair.mask1
    correction = raw[omega] - pair.target[omega]
    boundary = naive[anchors] - pair.target[anchors]
    assert np.all(correction.max(axis=0) <= boundary.max(axis=0) + 1e-6)
    assert np.all(correction.min(axis=0) >= boundary.min(axis=0) - 1e-6)

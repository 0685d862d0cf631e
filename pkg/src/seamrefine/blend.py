"""Compositing: plain label copy and gradient-domain (Poisson) fusion.

Fusion keeps the target's gradients on its side of the seam and anchors the
solution to the reference pixels across the seam.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from .core import AlignedPair, StitchError
from .graphcut import Labeling

EMPTY, REF, TARGET, OVERLAP = 0, 1, 2, 3


class SolverDivergence(StitchError):
    pass


@dataclass(frozen=True)
class Composite:
    image: np.ndarray
    provenance: np.ndarray  # EMPTY / REF / TARGET / OVERLAP per pixel


def _provenance(pair: AlignedPair) -> np.ndarray:
    reg = pair.region
    prov = np.full(pair.shape, EMPTY, dtype=np.uint8)
    prov[reg.ref_only] = REF
    prov[reg.target_only] = TARGET
    prov[reg.overlap] = OVERLAP
    return prov


def target_side(pair: AlignedPair, labeling: Labeling) -> np.ndarray:
    """Canvas mask of pixels that come from the target image."""
    return (labeling.canvas() == 1) | pair.region.target_only


def composite_naive(pair: AlignedPair, labeling: Labeling) -> Composite:
    use1 = target_side(pair, labeling)
    use0 = (pair.mask0 | pair.mask1) & ~use1
    image = np.zeros(pair.ref.shape)
    image[use0] = pair.ref[use0]
    image[use1] = pair.target[use1]
    return Composite(image, _provenance(pair))


# ---------------------------------------------------------------------------
# Poisson system

@dataclass(frozen=True)
class PoissonSystem:
    """Sparse 5-point system ``A u = b`` for the unknown pixels of one image.

    ``omega`` marks the unknowns.  Neighbours outside the composite support,
    or across an edge where the target gradient is undefined, are dropped
    (Neumann); neighbours in the support but outside ``omega`` are Dirichlet.
    """

    omega: np.ndarray
    coords: np.ndarray
    matrix: sp.csr_matrix
    rhs: np.ndarray  # (n, 3)


def build_system(pair: AlignedPair, omega: np.ndarray, base: np.ndarray) -> PoissonSystem:
    support = pair.mask0 | pair.mask1
    guide = pair.target
    h, w = omega.shape
    idx = np.full((h, w), -1, dtype=np.int64)
    coords = np.argwhere(omega)
    n = len(coords)
    idx[omega] = np.arange(n)
    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    rhs = np.zeros((n, 3))
    r, c = coords[:, 0], coords[:, 1]
    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        rr, cc = r + dr, c + dc
        inside = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
        rr_c, cc_c = np.clip(rr, 0, h - 1), np.clip(cc, 0, w - 1)
        ok = inside & support[rr_c, cc_c] & pair.mask1[rr_c, cc_c]
        k = np.flatnonzero(ok)
        diag[k] += 1.0
        rhs[k] += guide[r[k], c[k]] - guide[rr_c[k], cc_c[k]]
        nb = idx[rr_c[k], cc_c[k]]
        unknown = nb >= 0
        rows.append(k[unknown])
        cols.append(nb[unknown])
        vals.append(-np.ones(int(unknown.sum())))
        fixed = k[~unknown]
        rhs[fixed] += base[rr_c[fixed], cc_c[fixed]]
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    matrix = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                           shape=(n, n))
    return PoissonSystem(omega, coords, matrix, rhs)


def conjugate_gradient(A, b, tol: float = 1e-6, maxiter: int | None = None, x0=None):
    """Jacobi-preconditioned CG; stops when ``|b - Ax| <= tol * |b|``.

    Returns ``(x, relative_residual, iterations)``.
    """
    n = len(b)
    maxiter = 10 * n if maxiter is None else maxiter
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0.0, 0
    r = b - A @ x
    res = np.linalg.norm(r) / bnorm
    if res <= tol:
        return x, res, 0
    inv_d = 1.0 / A.diagonal()
    z = inv_d * r
    p = z.copy()
    rz = r @ z
    for it in range(1, maxiter + 1):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        res = np.linalg.norm(r) / bnorm
        if res <= tol:
            # confirm against the true residual, not the recurrence
            res = np.linalg.norm(b - A @ x) / bnorm
            if res <= tol:
                return x, res, it
            r = b - A @ x
        z = inv_d * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverDivergence(f"CG did not reach relative residual {tol:g} in {maxiter} iterations")


def poisson_fuse(pair: AlignedPair, labeling: Labeling, tolerance: float = 1e-6,
                 return_raw: bool = False):
    """Gradient-domain fusion of the target side into the reference side.

    Target-side components that never touch a reference pixel have no
    boundary anchor; they keep the target colours unchanged.  With
    ``return_raw`` the unclamped solution is returned alongside.
    """
    naive = composite_naive(pair, labeling)
    omega = target_side(pair, labeling)
    # only anchors with a defined target gradient across the edge count
    anchor = (pair.mask0 | pair.mask1) & ~omega & pair.mask1
    comp, _ = ndimage.label(omega)
    touching = np.unique(comp[ndimage.binary_dilation(anchor) & omega])
    omega = np.isin(comp, touching[touching > 0])
    image = naive.image.copy()
    raw = image.copy()
    if omega.any():
        system = build_system(pair, omega, naive.image)
        r, c = system.coords[:, 0], system.coords[:, 1]
        # the target colours solve the system exactly when the images agree
        start = pair.target[r, c]
        for ch in range(3):
            x, _, _ = conjugate_gradient(system.matrix, system.rhs[:, ch], tolerance,
                                         x0=start[:, ch])
            raw[r, c, ch] = x
        image[r, c] = np.clip(raw[r, c], 0.0, 1.0)
    out = Composite(image, naive.provenance)
    return (out, raw) if return_raw else out

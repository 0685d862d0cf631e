"""Seam-cutting energy on the overlap grid, its min-cut, and seam extraction.

Labels: 0 takes the pixel from the reference image, 1 from the target.
The smoothness cost of a 4-adjacent pair is ``0.5 * |l_p - l_q| * (d_p + d_q)``
with ``d`` the (possibly reweighted) difference map.  The data term is a hard
border constraint: overlap pixels touching the reference-only area must be
0, those touching the target-only area must be 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import DifferenceMap, OverlapRegion, StitchError
from .maxflow import solve_min_cut

HARD = 1e9
_CROSS = ndimage.generate_binary_structure(2, 1)


class ConstraintConflict(StitchError):
    pass


class EmptySeam(StitchError):
    pass


@dataclass(frozen=True)
class EnergyModel:
    """Binary labeling energy over the overlap bounding box.

    ``w_right[r, c]`` is the cost of cutting ``(r, c)-(r, c+1)`` and
    ``w_down[r, c]`` of ``(r, c)-(r+1, c)``; both are zero where the pair
    is not inside the overlap.  ``data0``/``data1`` are the costs of
    assigning label 0/1.
    """

    region: OverlapRegion
    w_right: np.ndarray
    w_down: np.ndarray
    data0: np.ndarray
    data1: np.ndarray

    @property
    def forced0(self) -> np.ndarray:
        return self.data1 > 0

    @property
    def forced1(self) -> np.ndarray:
        return self.data0 > 0

    def edges(self):
        """Return ``(u, v, cost)`` node-id arrays for every overlap 4-edge."""
        idx = self.region.index
        valid_r = (idx[:, :-1] >= 0) & (idx[:, 1:] >= 0)
        valid_d = (idx[:-1, :] >= 0) & (idx[1:, :] >= 0)
        u = np.concatenate([idx[:, :-1][valid_r], idx[:-1, :][valid_d]])
        v = np.concatenate([idx[:, 1:][valid_r], idx[1:, :][valid_d]])
        w = np.concatenate([self.w_right[valid_r], self.w_down[valid_d]])
        return u, v, w

    def energy(self, labels: np.ndarray) -> float:
        """Energy of a bbox-shaped labeling (values outside the overlap ignored)."""
        mask = self.region.local_mask
        lab = np.where(mask, labels, 0).astype(np.int64)
        data = np.where(lab == 0, self.data0, self.data1)[mask].sum()
        smooth = (self.w_right * np.abs(np.diff(lab, axis=1))).sum()
        smooth += (self.w_down * np.abs(np.diff(lab, axis=0))).sum()
        return float(data + smooth)


@dataclass(frozen=True)
class Labeling:
    """Per-overlap-pixel label over the bounding box; -1 outside the overlap."""

    labels: np.ndarray
    region: OverlapRegion

    def canvas(self, fill: int = -1) -> np.ndarray:
        return self.region.uncrop(self.labels, fill=fill)

    def is_constant(self) -> bool:
        vals = self.labels[self.region.local_mask]
        return bool(np.all(vals == vals[0]))


@dataclass(frozen=True)
class Seam:
    """Ordered label-discontinuous pairs; ``p`` is labeled 0 and ``q`` 1.

    Coordinates are canvas ``(row, col)``; position in the arrays is the
    arc-length index along the seam.
    """

    p: np.ndarray
    q: np.ndarray

    def __len__(self) -> int:
        return len(self.p)

    def pixels(self) -> np.ndarray:
        """Unique seam pixels ordered by first appearance along the seam."""
        both = np.empty((2 * len(self.p), 2), dtype=np.int64)
        both[0::2] = self.p
        both[1::2] = self.q
        _, first = np.unique(both, axis=0, return_index=True)
        return both[np.sort(first)]

    def pixel_crossing(self) -> np.ndarray:
        """For each entry of :meth:`pixels`, the first crossing that touches it."""
        both = np.empty((2 * len(self.p), 2), dtype=np.int64)
        both[0::2] = self.p
        both[1::2] = self.q
        _, first = np.unique(both, axis=0, return_index=True)
        return np.sort(first) // 2

    def pixel_mask(self, shape) -> np.ndarray:
        mask = np.zeros(shape, dtype=bool)
        px = self.pixels()
        mask[px[:, 0], px[:, 1]] = True
        return mask

    def pair_set(self) -> set:
        return {(tuple(a), tuple(b)) for a, b in zip(self.p.tolist(), self.q.tolist())}


# ---------------------------------------------------------------------------

def _border_constraints(region: OverlapRegion):
    local = region.local_mask
    f0 = local & region.crop(ndimage.binary_dilation(region.ref_only, _CROSS))
    f1 = local & region.crop(ndimage.binary_dilation(region.target_only, _CROSS))
    if f0.any() or f1.any():
        return f0, f1
    # Overlap touches neither exclusive area (e.g. both footprints cover the
    # whole canvas): pin the two ends of every scanline along the axis that
    # separates the footprint centroids, reference on the low side.
    m0 = region.overlap | region.ref_only
    m1 = region.overlap | region.target_only
    delta = np.mean(np.argwhere(m1), axis=0) - np.mean(np.argwhere(m0), axis=0)
    axis = 0 if abs(delta[0]) > abs(delta[1]) else 1
    flip = delta[axis] < 0
    lines = local if axis == 1 else local.T
    f0l = np.zeros_like(lines)
    f1l = np.zeros_like(lines)
    for i, row in enumerate(lines):
        cols = np.flatnonzero(row)
        if len(cols) >= 2:
            f0l[i, cols[0]] = True
            f1l[i, cols[-1]] = True
    if flip:
        f0l, f1l = f1l, f0l
    if axis == 0:
        f0l, f1l = f0l.T, f1l.T
    return f0l, f1l


def build_energy(diff: DifferenceMap, region: OverlapRegion | None = None) -> EnergyModel:
    """Smoothness costs from ``diff`` and hard border data costs."""
    region = diff.region if region is None else region
    if diff.region is not region and diff.values.shape != region.local_mask.shape:
        raise ValueError("difference map is not defined on this region")
    d = np.where(region.local_mask, diff.values, 0.0)
    local = region.local_mask
    w_right = 0.5 * (d[:, :-1] + d[:, 1:]) * (local[:, :-1] & local[:, 1:])
    w_down = 0.5 * (d[:-1, :] + d[1:, :]) * (local[:-1, :] & local[1:, :])
    f0, f1 = _border_constraints(region)
    both = f0 & f1
    if both.any():
        r, c = np.argwhere(both)[0] + np.array(region.origin)
        raise ConstraintConflict(
            f"pixel ({r}, {c}) borders both exclusive regions; overlap is too thin")
    data0 = np.where(f1, HARD, 0.0)
    data1 = np.where(f0, HARD, 0.0)
    return EnergyModel(region, w_right, w_down, data0, data1)


def min_cut(model: EnergyModel) -> Labeling:
    """Globally optimal labeling of ``model`` via max-flow.

    Among optimal labelings the one with the smallest reference side is
    returned.
    """
    region = model.region
    mask = region.local_mask
    f0 = model.forced0 & mask
    f1 = model.forced1 & mask
    if (f0 & f1).any():
        raise ConstraintConflict("a pixel is forced to both labels")
    labels = np.full(mask.shape, -1, dtype=np.int8)
    if not f1.any() or not f0.any():
        labels[mask] = 0 if not f1.any() else 1
        return Labeling(labels, region)
    u, v, w = model.edges()
    idx = region.index[mask]
    src = np.zeros(region.size)
    snk = np.zeros(region.size)
    # hard constraints become infinite terminal links; equivalent to HARD
    # because HARD exceeds any total smoothness cost
    src[idx[f0[mask]]] = np.inf
    snk[idx[f1[mask]]] = np.inf
    soft0 = model.data1[mask] * ~f0[mask]
    soft1 = model.data0[mask] * ~f1[mask]
    src[idx] += soft0
    snk[idx] += soft1
    _, source_side = solve_min_cut(region.size, u, v, w, src, snk)
    labels[mask] = np.where(source_side[idx], 0, 1)
    return Labeling(labels, region)


def cut(diff: DifferenceMap) -> Labeling:
    return min_cut(build_energy(diff))


# ---------------------------------------------------------------------------
# seam extraction

# walk preference at a dual-grid corner: down, right, left, up
_STEPS = ((1, 0), (0, 1), (0, -1), (-1, 0))


def discontinuities(labeling: Labeling):
    """All label-discontinuous 4-adjacent pairs as ``(p, q, corner_a, corner_b)``.

    Corners are dual-grid vertices in canvas coordinates: corner ``(i, j)``
    is the top-left corner of pixel ``(i, j)``.
    """
    lab = labeling.labels.astype(np.int64)
    r0, c0 = labeling.region.origin
    out = []
    hr, hc = np.nonzero((lab[:, :-1] >= 0) & (lab[:, 1:] >= 0) & (lab[:, :-1] != lab[:, 1:]))
    for r, c in zip(hr.tolist(), hc.tolist()):
        a, b = (r + r0, c + c0), (r + r0, c + c0 + 1)
        p, q = (a, b) if lab[r, c] == 0 else (b, a)
        out.append((p, q, (r + r0, c + c0 + 1), (r + r0 + 1, c + c0 + 1)))
    vr, vc = np.nonzero((lab[:-1, :] >= 0) & (lab[1:, :] >= 0) & (lab[:-1, :] != lab[1:, :]))
    for r, c in zip(vr.tolist(), vc.tolist()):
        a, b = (r + r0, c + c0), (r + r0 + 1, c + c0)
        p, q = (a, b) if lab[r, c] == 0 else (b, a)
        out.append((p, q, (r + r0 + 1, c + c0), (r + r0 + 1, c + c0 + 1)))
    return out


def extract_seam(labeling: Labeling, region: OverlapRegion | None = None) -> Seam:
    """Order the cut edges by walking them as paths on the dual grid.

    Connected cut components are visited in order of their smallest
    endpoint (odd-degree corner; smallest corner for closed loops), and each
    walk starts at the smallest remaining endpoint of its component.  At
    branch corners the walk prefers down, right, left, up.
    """
    pairs = discontinuities(labeling)
    if not pairs:
        raise EmptySeam("labeling is constant; there is no seam")

    edges_at: dict = {}
    for k, (_, _, a, b) in enumerate(pairs):
        edges_at.setdefault(a, []).append(k)
        edges_at.setdefault(b, []).append(k)

    # connected components of the cut graph
    comp = {}
    components = []
    for corner in sorted(edges_at):
        if corner in comp:
            continue
        members = [corner]
        comp[corner] = len(components)
        stack = [corner]
        while stack:
            x = stack.pop()
            for k in edges_at[x]:
                a, b = pairs[k][2], pairs[k][3]
                y = b if a == x else a
                if y not in comp:
                    comp[y] = len(components)
                    members.append(y)
                    stack.append(y)
        odd = [c for c in members if len(edges_at[c]) % 2 == 1]
        components.append((min(odd) if odd else min(members), sorted(members)))
    components.sort(key=lambda item: item[0])

    used = np.zeros(len(pairs), dtype=bool)
    remaining = {c: len(v) for c, v in edges_at.items()}
    order = []
    for _, members in components:
        while True:
            live = [c for c in members if remaining[c] > 0]
            if not live:
                break
            odd = [c for c in live if remaining[c] % 2 == 1]
            x = odd[0] if odd else live[0]
            while True:
                nxt = None
                for dr, dc in _STEPS:
                    y = (x[0] + dr, x[1] + dc)
                    for k in edges_at[x]:
                        if not used[k] and y in (pairs[k][2], pairs[k][3]):
                            nxt = (k, y)
                            break
                    if nxt:
                        break
                if nxt is None:
                    break
                k, y = nxt
                used[k] = True
                remaining[x] -= 1
                remaining[y] -= 1
                order.append(k)
                x = y

    p = np.array([pairs[k][0] for k in order], dtype=np.int64)
    q = np.array([pairs[k][1] for k in order], dtype=np.int64)
    return Seam(p, q)

"""Coarse-to-fine seam estimation loop.

Each iteration evaluates the current seam, dilates it into a band,
rescales the difference map inside the band by ``exp(sigma * (E - eps))``
(``E`` taken from the nearest seam pixel), and cuts again.  The loop stops
once a new seam lies entirely inside the union of all bands so far.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import AlignedPair, DifferenceMap, OverlapRegion, StitchConfig, difference_map
from .evaluation import EvaluationSignal, evaluate_seam
from .graphcut import Labeling, Seam, cut, extract_seam

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BandingArea:
    mask: np.ndarray  # canvas-sized
    seam_id: int = 0

    @property
    def size(self) -> int:
        return int(self.mask.sum())


@dataclass
class IterationRecord:
    iteration: int
    seam_length: int
    mean_eval: float
    max_eval: float
    max_point: float
    band_size: int
    accumulated_size: int
    contained: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class RefineState:
    iteration: int
    diff: DifferenceMap
    seam: Seam
    accumulated: np.ndarray
    initial_seam: Seam | None = None
    converged: bool = False
    history: list[IterationRecord] = field(default_factory=list)
    seams: list[Seam] = field(default_factory=list)
    signals: list[EvaluationSignal] = field(default_factory=list)

    def diagnostics(self) -> dict:
        return {"converged": self.converged,
                "iterations": self.iteration,
                "history": [h.to_dict() for h in self.history]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.diagnostics(), **kw)


def reweight_factor(x, sigma: float = 5.0, epsilon: float = 0.12):
    return np.exp(sigma * (np.asarray(x, dtype=np.float64) - epsilon))


def band(seam: Seam, radius: int, region: OverlapRegion) -> BandingArea:
    """Chebyshev dilation of the seam pixels, clipped to the overlap."""
    mask = seam.pixel_mask(region.shape)
    if radius > 0:
        mask = ndimage.binary_dilation(mask, np.ones((3, 3), bool), iterations=radius)
    return BandingArea(mask & region.overlap)


def nearest_seam_values(seam: Seam, values, targets: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Per-target value of the Euclidean-nearest seam pixel.

    A seam pixel carries the value of the first crossing it belongs to;
    distance ties go to the smaller seam index.  Exact integer distances.
    """
    px = seam.pixels()
    pv = np.asarray(values, dtype=np.float64)[seam.pixel_crossing()]
    out = np.empty(len(targets))
    for s in range(0, len(targets), chunk):
        t = targets[s:s + chunk]
        d2 = ((t[:, None, :] - px[None, :, :]) ** 2).sum(axis=-1)
        out[s:s + chunk] = pv[np.argmin(d2, axis=1)]
    return out


def reweight(diff: DifferenceMap, seam: Seam, evals, area: BandingArea,
             cfg: StitchConfig) -> DifferenceMap:
    """Scale ``diff`` inside ``area``; pixels outside are copied unchanged."""
    region = diff.region
    r0, c0 = region.origin
    local = region.crop(area.mask) & region.local_mask
    targets = np.argwhere(local) + np.array([r0, c0])
    values = diff.values.copy()
    if len(targets):
        e = nearest_seam_values(seam, evals, targets)
        rows, cols = targets[:, 0] - r0, targets[:, 1] - c0
        values[rows, cols] = reweight_factor(e, cfg.sigma, cfg.epsilon) * values[rows, cols]
    return DifferenceMap(values, region)


def _record(it, seam, sig, area, acc, contained):
    return IterationRecord(iteration=it, seam_length=len(seam),
                           mean_eval=float(sig.combined.mean()), max_eval=float(sig.combined.max()),
                           max_point=float(sig.point_raw.max()),
                           band_size=area.size if area is not None else 0,
                           accumulated_size=int(acc.sum()), contained=contained)


def run(pair: AlignedPair, cfg: StitchConfig | None = None):
    """Coarse-to-fine seam search on an aligned pair.

    Returns ``(seam, labeling, state)``.  ``state.converged`` is False when
    ``cfg.max_iterations`` was reached before the seam settled.
    """
    cfg = cfg or StitchConfig()
    region = pair.region
    i0, i1 = pair.ref, pair.target
    original = difference_map(i0, i1, region)
    diff = original
    labeling = cut(diff)
    seam = extract_seam(labeling)
    acc = np.zeros(region.shape, dtype=bool)
    state = RefineState(iteration=0, diff=diff, seam=seam, accumulated=acc,
                        initial_seam=seam, seams=[seam])

    while True:
        contained = state.iteration > 0 and bool(np.all(acc[tuple(seam.pixels().T)]))
        if contained:
            state.converged = True
            break
        if state.iteration >= cfg.max_iterations:
            log.warning("seam did not settle within %d iterations", cfg.max_iterations)
            break
        sig = evaluate_seam(seam, i0, i1, cfg, region)
        area = band(seam, cfg.band_radius, region)
        base = diff if cfg.compounding else original
        new_diff = reweight(base, seam, sig.combined, area, cfg)
        new_labeling = cut(new_diff)
        new_seam = extract_seam(new_labeling)
        acc = acc | area.mask
        state.iteration += 1
        state.signals.append(sig)
        state.history.append(_record(state.iteration, seam, sig, area, acc,
                                     bool(np.all(acc[tuple(new_seam.pixels().T)]))))
        log.debug("iteration %d: seam %d px, max eval %.4g", state.iteration, len(seam),
                  sig.combined.max())
        diff, labeling, seam = new_diff, new_labeling, new_seam
        state.seams.append(seam)

    state.diff = diff
    state.seam = seam
    state.accumulated = acc
    state.signals.append(evaluate_seam(seam, i0, i1, cfg, region))
    return seam, labeling, state

"""Coarse-to-fine seam estimation for two-image stitching."""
from .blend import Composite, composite_naive, poisson_fuse
from .core import (AlignedPair, DifferenceMap, OverlapRegion, StitchConfig, StitchError,
                   compute_overlap, difference_map)
from .evaluation import EvaluationSignal, evaluate_seam
from .graphcut import Labeling, Seam, build_energy, extract_seam, min_cut
from .ingest import align_pair, load_image, save_image, warp_target
from .metrics import SeamReport, seam_report, zncc_quality
from .refine import RefineState, run
from .synth import Fixture, FixtureSpec, make_fixture

__version__ = "0.1.0"

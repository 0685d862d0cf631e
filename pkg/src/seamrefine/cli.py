"""Command-line front end: ``seamrefine stitch | evaluate | fixture``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import blend, ingest, metrics, refine, synth
from .core import EmptyOverlap, InvalidConfig, StitchConfig, StitchError
from .evaluation import evaluate_seam
from .graphcut import ConstraintConflict, EmptySeam, extract_seam

log = logging.getLogger("seamrefine")

EMIT_CHOICES = ("composite", "naive", "seam-overlay", "signals-csv", "report-json",
                "iteration-overlays", "labeling")
DEFAULT_EMIT = ("composite", "report-json", "labeling")

# exit status per error family; argparse itself exits with 2
EXIT_CODES = [
    (ingest.ImageIOError, 3),
    (ingest.DecodeError, 4),
    (ingest.FormatError, 4),
    (ingest.SingularHomography, 5),
    (EmptyOverlap, 6),
    (ConstraintConflict, 7),
    (EmptySeam, 7),
    (blend.SolverDivergence, 8),
    (InvalidConfig, 9),
    (synth.InvalidSpec, 9),
]


def exit_code(exc: BaseException) -> int:
    for cls, code in EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 1


# ---------------------------------------------------------------------------
# configuration

def load_config(args) -> StitchConfig:
    data = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ingest.ImageIOError(f"no such config file: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidConfig(f"config {path} must hold a JSON object")
    cfg = StitchConfig.from_dict(data)
    overrides = dict(patch_size=args.patch_size, lambda_=args.lam, sigma=args.sigma,
                     epsilon=args.epsilon, band_radius=args.band_radius,
                     max_iterations=args.max_iter, smoothing=args.smoothing,
                     poisson_tolerance=args.poisson_tolerance)
    if args.no_compounding:
        overrides["compounding"] = False
    return cfg.with_overrides(**overrides)


def parse_emit(values) -> set[str]:
    if not values:
        return set(DEFAULT_EMIT)
    out = set()
    for item in values:
        for name in item.split(","):
            name = name.strip()
            if not name:
                continue
            if name == "all":
                out.update(EMIT_CHOICES)
            elif name not in EMIT_CHOICES:
                raise InvalidConfig(f"unknown --emit value {name!r}; choose from {EMIT_CHOICES}")
            else:
                out.add(name)
    out.add("composite")
    return out


def load_pair(args):
    ref = ingest.load_image(args.ref)
    target = ingest.load_image(args.target)
    h = ingest.load_homography(args.homography) if args.homography else None
    return ingest.align_pair(ref, target, h)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _outdir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ingest.ImageIOError(f"cannot create output directory {out}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# commands

def cmd_stitch(args) -> int:
    cfg = load_config(args)
    emit = parse_emit(args.emit)
    pair = load_pair(args)
    out = _outdir(args.out)

    seam, labeling, state = refine.run(pair, cfg)
    fused = blend.poisson_fuse(pair, labeling, cfg.poisson_tolerance)
    ingest.save_image(fused.image, out / "composite.png")

    final_sig = state.signals[-1]
    report = metrics.seam_report(seam, final_sig, pair.ref, pair.target, cfg, pair.region)
    q_initial = metrics.zncc_quality(state.initial_seam, pair.ref, pair.target,
                                     cfg.patch_size, pair.region)
    if "naive" in emit:
        ingest.save_image(blend.composite_naive(pair, labeling).image, out / "naive.png")
    if "seam-overlay" in emit:
        ingest.save_overlay(fused.image, seam, out / "seam_overlay.png", final_sig.combined)
    if "signals-csv" in emit:
        for k, sig in enumerate(state.signals):
            sig.to_csv(out / f"signals_{k:03d}.csv")
    if "iteration-overlays" in emit:
        for k, (s, sig) in enumerate(zip(state.seams, state.signals)):
            ingest.save_overlay(fused.image, s, out / f"overlay_{k:03d}.png", sig.combined)
    if "labeling" in emit:
        ingest.save_labeling(labeling, out / "labeling.pgm")
    if "report-json" in emit:
        _write_json(out / "report.json", {
            "converged": state.converged,
            "iterations": state.iteration,
            "q_seam": report.q_seam,
            "q_seam_initial": q_initial,
            "seam": report.to_dict(),
            "history": [h.to_dict() for h in state.history],
            "canvas": list(pair.shape),
            "inputs": {"ref": Path(args.ref).name, "target": Path(args.target).name},
            "config": cfg.to_dict(),
        })
    status = "converged" if state.converged else "did not converge"
    print(f"{status} after {state.iteration} iteration(s); seam length {len(seam)}, "
          f"Q_seam {report.q_seam:.4f} -> {out / 'composite.png'}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = load_config(args)
    pair = load_pair(args)
    labeling = ingest.load_labeling(args.labeling, pair.region)
    try:
        seam = extract_seam(labeling)
    except EmptySeam as exc:
        raise ingest.FormatError(f"labeling {args.labeling} has no seam (constant labels)") from exc
    out = _outdir(args.out)
    sig = evaluate_seam(seam, pair.ref, pair.target, cfg, pair.region)
    report = metrics.seam_report(seam, sig, pair.ref, pair.target, cfg, pair.region)
    sig.to_csv(out / "signals.csv")
    _write_json(out / "report.json", {"q_seam": report.q_seam, "seam": report.to_dict(),
                                      "config": cfg.to_dict()})
    print(f"seam length {len(seam)}, Q_seam {report.q_seam:.4f}, "
          f"max evaluation {report.max_eval:.4f}")
    return 0


def cmd_fixture(args) -> int:
    data = {}
    if args.spec:
        path = Path(args.spec)
        if not path.is_file():
            raise ingest.ImageIOError(f"no such fixture spec: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise synth.InvalidSpec(f"fixture spec {path} is not valid JSON: {exc}") from exc
    try:
        spec = synth.FixtureSpec.from_dict(data)
    except TypeError as exc:
        raise synth.InvalidSpec(str(exc)) from exc
    fixture = synth.make_fixture(spec)
    out = _outdir(args.out)
    synth.write_fixture(fixture, out)
    print(f"fixture written to {out} ({int(fixture.misaligned.sum())} misaligned pixels)")
    return 0


# ---------------------------------------------------------------------------

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with StitchConfig fields")
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--no-compounding", action="store_true",
                   help="reweight the original difference map every iteration")
    p.add_argument("--patch-size", type=int, dest="patch_size")
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--sigma", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--band-radius", type=int, dest="band_radius")
    p.add_argument("--smoothing", choices=("wavelet", "movavg", "moving-average", "none"))
    p.add_argument("--poisson-tolerance", type=float, dest="poisson_tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seamrefine", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stitch", help="estimate a seam and composite two images")
    p.add_argument("--ref", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--homography", help="9 row-major numbers mapping target to reference")
    p.add_argument("--out", required=True)
    p.add_argument("--emit", action="append",
                   help="comma list of: " + ", ".join(EMIT_CHOICES) + ", all")
    _add_config_flags(p)
    p.set_defaults(func=cmd_stitch)

    p = sub.add_parser("evaluate", help="score an existing labeling without re-cutting")
    p.add_argument("--ref", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--homography")
    p.add_argument("--labeling", required=True, help="labeling.pgm with its .json sidecar")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fixture", help="write a synthetic parallax fixture")
    p.add_argument("spec", nargs="?", help="fixture spec JSON (defaults if omitted)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except StitchError as exc:
        print(f"seamrefine: error: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())

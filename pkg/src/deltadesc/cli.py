"""Command-line pipeline orchestrating the library end to end.

One subcommand per procedure: ``synth``, ``transform``, ``match``,
``calibrate``, ``evaluate``, ``rank-dims``, ``shuffle``, plus ``run`` which
chains transform -> (PCA) -> distance matrix -> (seqmatch) -> retrieve ->
evaluate in a single invocation. Staged invocations with float64 intermediate
files reproduce the single-invocation outputs byte for byte.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as ddio
from .calibration import estimate_span, self_distance_profile
from .evaluation import correct_matches, evaluate_pr, max_f1, precision_at_full_recall
from .evaluation import median_pair_products, rank_dimensions
from .matching import distance_matrix, multi_delta_distance, retrieve_best, seq_match
from .reduction import pca_fit, pca_transform
from .series import DescriptorSeries, apply_permutation
from .synth import SynthParams, generate_traverse_pair
from .transform import (
    EDGE_REPLICATE,
    VALID_ONLY,
    DeltaConfig,
    delta,
    delta_bank,
    smooth,
)

TRANSFORMS = ("raw", "smooth", "delta", "multi-delta")
FIT_SOURCES = ("ref", "query", "both")


@contextmanager
def _stage(name: str):
    """Re-raise stage failures with the stage name so the CLI diagnostic names it."""
    try:
        yield
    except (ValueError, ddio.DataError, OSError) as exc:
        raise type(exc)(f"[{name}] {exc}") from exc


@dataclass
class RunConfig:
    """Everything one end-to-end pipeline invocation needs."""

    ref_path: str
    query_path: str
    out_dir: str
    gt_path: Optional[str] = None
    positions_path: Optional[str] = None
    transform: str = "raw"
    window: Optional[int] = None
    spans: Optional[tuple[int, ...]] = None
    padding: str = EDGE_REPLICATE
    seqmatch_length: int = 1
    pca_k: Optional[int] = None
    pca_fit_on: str = "ref"
    radius: float = 0.0
    radius_mode: str = "frames"

    def validate(self) -> None:
        if self.transform not in TRANSFORMS:
            raise ValueError(f"transform must be one of {TRANSFORMS}, got {self.transform!r}")
        if self.transform in ("smooth", "delta"):
            if self.window is None or int(self.window) < 1:
                raise ValueError(f"transform {self.transform!r} needs --window >= 1")
        if self.transform == "multi-delta" and not self.spans:
            raise ValueError("multi-delta needs a non-empty --spans list")
        if self.padding not in (EDGE_REPLICATE, VALID_ONLY):
            raise ValueError(f"unknown padding {self.padding!r}")
        if int(self.seqmatch_length) < 1:
            raise ValueError("seqmatch length must be >= 1")
        if self.pca_k is not None and int(self.pca_k) < 1:
            raise ValueError("pca_k must be >= 1")
        if self.pca_fit_on not in FIT_SOURCES:
            raise ValueError(f"pca fit source must be one of {FIT_SOURCES}")
        if self.radius_mode not in ("frames", "meters"):
            raise ValueError(f"radius_mode must be 'frames' or 'meters', got {self.radius_mode!r}")
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        if self.radius_mode == "meters" and self.gt_path and not self.positions_path:
            raise ValueError("meters mode requires reference positions")


def _apply_transform(series: DescriptorSeries, cfg: RunConfig) -> DescriptorSeries:
    if cfg.transform == "raw":
        return series
    if cfg.transform == "smooth":
        return smooth(series, cfg.window)
    return delta(series, DeltaConfig(window=cfg.window, padding=cfg.padding))


def _pca_fit_series(
    tq: DescriptorSeries, tr: DescriptorSeries, fit_on: str
) -> DescriptorSeries:
    if fit_on == "ref":
        return tr
    if fit_on == "query":
        return tq
    return DescriptorSeries(np.vstack([tr.data, tq.data]))


def run_pipeline(cfg: RunConfig) -> dict:
    """Execute the full pipeline and write matches.csv, pr.csv, summary.json.

    Returns the summary dictionary. Raises ValueError for configuration
    problems and DataError/OSError for input problems; the CLI maps these to
    exit codes 2 and 3.
    """
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with _stage("load"):
        ref = ddio.read_descriptors(cfg.ref_path)
        query = ddio.read_descriptors(cfg.query_path)
        gt = (
            ddio.read_ground_truth(cfg.gt_path, radius_mode=cfg.radius_mode, radius=cfg.radius)
            if cfg.gt_path
            else None
        )
        ref_positions = ddio.read_positions(cfg.positions_path) if cfg.positions_path else None

    if cfg.transform == "multi-delta":
        with _stage("transform"):
            dcfg = DeltaConfig(window=cfg.spans[0], spans=cfg.spans)
            q_members = list(delta_bank(query, dcfg).series)
            r_members = list(delta_bank(ref, dcfg).series)
        if cfg.pca_k is not None:
            with _stage("pca"):
                for i in range(len(q_members)):
                    model = pca_fit(
                        _pca_fit_series(q_members[i], r_members[i], cfg.pca_fit_on), cfg.pca_k
                    )
                    q_members[i] = pca_transform(model, q_members[i])
                    r_members[i] = pca_transform(model, r_members[i])
        with _stage("distance"):
            m = multi_delta_distance(q_members, r_members)
    else:
        with _stage("transform"):
            tq = _apply_transform(query, cfg)
            tr = _apply_transform(ref, cfg)
        if cfg.pca_k is not None:
            with _stage("pca"):
                model = pca_fit(_pca_fit_series(tq, tr, cfg.pca_fit_on), cfg.pca_k)
                tq = pca_transform(model, tq)
                tr = pca_transform(model, tr)
                ddio.save_pca_model(out_dir / "pca_model.bin", model)
        with _stage("distance"):
            m = distance_matrix(tq, tr)

    if cfg.seqmatch_length > 1:
        with _stage("seqmatch"):
            m = seq_match(m, cfg.seqmatch_length)

    with _stage("retrieve"):
        matches = retrieve_best(m)

    pafr = mf1 = None
    with _stage("evaluate"):
        if gt is not None:
            curve = evaluate_pr(matches, gt, ref_positions)
            pafr = precision_at_full_recall(curve)
            mf1 = max_f1(curve)
            ddio.write_matches_csv(
                out_dir / "matches.csv", matches, correct_matches(matches, gt, ref_positions)
            )
            ddio.write_pr_csv(out_dir / "pr.csv", curve)
        else:
            ddio.write_matches_csv(out_dir / "matches.csv", matches)

    summary = {
        "precision_at_full_recall": pafr,
        "max_f1": mf1,
        "radius": cfg.radius if gt is not None else None,
        "radius_mode": cfg.radius_mode if gt is not None else None,
        "transform": cfg.transform,
        "window": int(cfg.window) if cfg.transform in ("smooth", "delta") else None,
        "seqmatch_length": int(cfg.seqmatch_length),
        "pca_k": int(cfg.pca_k) if cfg.pca_k is not None else None,
    }
    with _stage("write"):
        ddio.write_summary_json(out_dir / "summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _parse_warp(text: str) -> tuple[tuple[float, float], ...]:
    try:
        pairs = []
        for chunk in text.split(","):
            s, t = chunk.split(":")
            pairs.append((float(s), float(t)))
        return tuple(pairs)
    except ValueError as exc:
        raise ValueError(f"cannot parse warp {text!r}; expected 's:t,s:t,...'") from exc


def cmd_synth(args: argparse.Namespace) -> int:
    params = SynthParams(
        frames=args.frames,
        dims=args.dims,
        latent_smooth_window=args.latent_smooth_window,
        offset_scale=args.offset_scale,
        noise_scale=args.noise_scale,
        warp=_parse_warp(args.warp) if args.warp else None,
        seed=args.seed,
    )
    ref, query, gt = generate_traverse_pair(params)
    ddio.write_descriptors(args.out_ref, ref, dtype=args.dtype)
    ddio.write_descriptors(args.out_query, query, dtype=args.dtype)
    ddio.write_ground_truth(args.out_gt, gt)
    print(f"wrote {args.out_ref}, {args.out_query}, {args.out_gt}")
    return 0


def cmd_transform(args: argparse.Namespace) -> int:
    series = ddio.read_descriptors(args.input)
    with _stage("transform"):
        if args.transform == "smooth":
            out = smooth(series, args.window)
        else:
            out = delta(series, DeltaConfig(window=args.window, padding=args.padding))
    ddio.write_descriptors(args.output, out, dtype=args.dtype)
    print(f"wrote {args.output}")
    return 0


def cmd_match(args: argparse.Namespace) -> int:
    queries = [ddio.read_descriptors(p) for p in args.query]
    refs = [ddio.read_descriptors(p) for p in args.ref]
    with _stage("distance"):
        if len(queries) == 1 and len(refs) == 1:
            m = distance_matrix(queries[0], refs[0])
        else:
            m = multi_delta_distance(queries, refs)
    if args.seqmatch_length > 1:
        with _stage("seqmatch"):
            m = seq_match(m, args.seqmatch_length)
    matches = retrieve_best(m)
    ddio.write_matches_csv(args.out_matches, matches)
    if args.out_distances:
        ddio.write_distance_matrix(args.out_distances, m)
    print(f"wrote {args.out_matches}")
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    series = ddio.read_descriptors(args.input)
    d_max = args.d_max
    if d_max is None:
        d_max = max(1, min(series.frame_count // 4, 512))
    with _stage("calibrate"):
        profile = self_distance_profile(series, d_max)
        if args.out_profile:
            ddio.write_profile_csv(args.out_profile, profile)
        span = estimate_span(profile, threshold=args.threshold, multiplier=args.multiplier)
    print(span)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    matches = ddio.read_matches_csv(args.matches)
    gt = ddio.read_ground_truth(args.gt, radius_mode=args.radius_mode, radius=args.radius)
    ref_positions = ddio.read_positions(args.ref_positions) if args.ref_positions else None
    with _stage("evaluate"):
        curve = evaluate_pr(matches, gt, ref_positions)
        correct = correct_matches(matches, gt, ref_positions)
    if args.out_matches:
        ddio.write_matches_csv(args.out_matches, matches, correct)
    if args.out_pr:
        ddio.write_pr_csv(args.out_pr, curve)
    summary = {
        "precision_at_full_recall": precision_at_full_recall(curve),
        "max_f1": max_f1(curve),
        "radius": gt.radius,
        "radius_mode": gt.radius_mode,
        "transform": args.transform,
        "window": args.window,
        "seqmatch_length": args.seqmatch_length,
        "pca_k": args.pca_k,
    }
    if args.out_summary:
        ddio.write_summary_json(args.out_summary, summary)
    print(
        f"precision_at_full_recall={summary['precision_at_full_recall']!r} "
        f"max_f1={summary['max_f1']!r}"
    )
    return 0


def cmd_rank_dims(args: argparse.Namespace) -> int:
    ref = ddio.read_descriptors(args.ref)
    query = ddio.read_descriptors(args.query)
    gt = ddio.read_ground_truth(args.gt)
    with _stage("rank-dims"):
        order = rank_dimensions(ref, query, gt, args.top_k)
        medians = median_pair_products(ref, query, gt)
    if args.out:
        ddio.write_dimension_ranking_csv(args.out, order, medians)
    print(" ".join(str(int(d)) for d in order))
    return 0


def cmd_shuffle(args: argparse.Namespace) -> int:
    ref = ddio.read_descriptors(args.ref)
    query = ddio.read_descriptors(args.query)
    gt = ddio.read_ground_truth(args.gt)
    with _stage("shuffle"):
        s_ref, s_query, s_gt = apply_permutation(ref, query, gt, args.seed)
    ddio.write_descriptors(args.out_ref, s_ref, dtype=args.dtype)
    ddio.write_descriptors(args.out_query, s_query, dtype=args.dtype)
    ddio.write_ground_truth(args.out_gt, s_gt)
    print(f"wrote {args.out_ref}, {args.out_query}, {args.out_gt}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        ref_path=args.ref,
        query_path=args.query,
        out_dir=args.out_dir,
        gt_path=args.gt,
        positions_path=args.ref_positions,
        transform=args.transform,
        window=args.window,
        spans=tuple(args.spans) if args.spans else None,
        padding=args.padding,
        seqmatch_length=args.seqmatch_length,
        pca_k=args.pca_k,
        pca_fit_on=args.pca_fit_on,
        radius=args.radius,
        radius_mode=args.radius_mode,
    )
    summary = run_pipeline(cfg)
    print(
        f"wrote {Path(args.out_dir) / 'summary.json'}: "
        f"precision_at_full_recall={summary['precision_at_full_recall']!r} "
        f"max_f1={summary['max_f1']!r}"
    )
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_dtype(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--dtype", choices=("float32", "float64"), default=default,
                   help=f"payload precision for written descriptor files (default {default})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltadesc",
        description="Change-based descriptor matching and evaluation for repeated route traverses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic traverse pair with ground truth")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--dims", type=int, required=True)
    p.add_argument("--latent-smooth-window", type=int, default=1)
    p.add_argument("--offset-scale", type=float, default=0.0)
    p.add_argument("--noise-scale", type=float, default=0.0)
    p.add_argument("--warp", type=str, default=None,
                   help="piecewise-linear warp control points 'src:tgt,src:tgt,...' over [0,1]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-ref", required=True)
    p.add_argument("--out-query", required=True)
    p.add_argument("--out-gt", required=True)
    _add_dtype(p, "float32")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("transform", help="smooth or delta-transform one descriptor file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--transform", choices=("smooth", "delta"), required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--padding", choices=(EDGE_REPLICATE, VALID_ONLY), default=EDGE_REPLICATE)
    _add_dtype(p, "float64")
    p.set_defaults(handler=cmd_transform)

    p = sub.add_parser("match", help="match query files against reference files")
    p.add_argument("--query", nargs="+", required=True,
                   help="one file, or several frame-aligned files forming a span bank")
    p.add_argument("--ref", nargs="+", required=True)
    p.add_argument("--seqmatch-length", type=int, default=1)
    p.add_argument("--out-matches", required=True)
    p.add_argument("--out-distances", default=None)
    p.set_defaults(handler=cmd_match)

    p = sub.add_parser("calibrate", help="estimate the span lower bound from self-similarity")
    p.add_argument("--input", required=True)
    p.add_argument("--d-max", type=int, default=None,
                   help="largest frame offset to probe (default: T/4, capped at 512)")
    p.add_argument("--threshold", type=float, default=0.7)
    p.add_argument("--multiplier", type=float, default=1.0)
    p.add_argument("--out-profile", default=None)
    p.set_defaults(handler=cmd_calibrate)

    p = sub.add_parser("evaluate", help="score a match CSV against ground truth")
    p.add_argument("--matches", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--radius", type=float, default=0.0)
    p.add_argument("--radius-mode", choices=("frames", "meters"), default="frames")
    p.add_argument("--ref-positions", default=None)
    p.add_argument("--out-matches", default=None,
                   help="rewrite the match CSV with a correctness column")
    p.add_argument("--out-pr", default=None)
    p.add_argument("--out-summary", default=None)
    p.add_argument("--transform", default=None, help="summary annotation only")
    p.add_argument("--window", type=int, default=None, help="summary annotation only")
    p.add_argument("--seqmatch-length", type=int, default=1, help="summary annotation only")
    p.add_argument("--pca-k", type=int, default=None, help="summary annotation only")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("rank-dims", help="rank dimensions by true-pair co-activation")
    p.add_argument("--ref", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--top-k", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_rank_dims)

    p = sub.add_parser("shuffle", help="order-preserving shuffle of a traverse pair")
    p.add_argument("--ref", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-ref", required=True)
    p.add_argument("--out-query", required=True)
    p.add_argument("--out-gt", required=True)
    _add_dtype(p, "float64")
    p.set_defaults(handler=cmd_shuffle)

    p = sub.add_parser("run", help="full pipeline: transform, PCA, match, seqmatch, evaluate")
    p.add_argument("--ref", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--gt", default=None)
    p.add_argument("--ref-positions", default=None)
    p.add_argument("--transform", choices=TRANSFORMS, default="raw")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--spans", type=int, nargs="+", default=None)
    p.add_argument("--padding", choices=(EDGE_REPLICATE, VALID_ONLY), default=EDGE_REPLICATE)
    p.add_argument("--seqmatch-length", type=int, default=1)
    p.add_argument("--pca-k", type=int, default=None)
    p.add_argument("--pca-fit", dest="pca_fit_on", choices=FIT_SOURCES, default="ref")
    p.add_argument("--radius", type=float, default=0.0)
    p.add_argument("--radius-mode", choices=("frames", "meters"), default="frames")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=cmd_run)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ddio.DataError as exc:
        print(f"deltadesc: data error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"deltadesc: data error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"deltadesc: config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

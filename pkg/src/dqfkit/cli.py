"""Command-line interface: simulate | compute | score | serve.

Exit codes: 0 success, 2 usage errors (argparse), 3 data errors.  Every
compute run writes a manifest next to the bundle with enough detail
(inputs, config, versions, hash) to reproduce the bundle exactly.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from ._kernels import BACKEND
from .datagen import SCENARIOS, generate
from .engine import DQFBundle, compute_bundle
from .model import Config, DQFError, TipDistributionSpec, load_dataset, load_gram, load_labels, z_scale
from .scoring import build_report
from .server import DEFAULT_PORT, run_server
from .univariate import Sample1D

_G_VARIANTS = {
    "normal": "normal_adaptive",
    "uniform-range": "uniform_range",
    "uniform-robust": "uniform_robust",
    "uniform-fixed": "uniform_fixed",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqfkit",
        description="Depth-quantile-function curves, anomaly scores, and a bundle server.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write a benchmark scenario to CSV")
    sim.add_argument("scenario", choices=sorted(SCENARIOS))
    sim.add_argument("--n", type=int, default=None, help="sample size where applicable")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", default=None, help="coordinates CSV (default <scenario>.csv)")
    sim.add_argument("--labels-out", default=None, help="labels CSV (default <scenario>-labels.csv)")

    comp = sub.add_parser("compute", help="compute a DQF bundle from data")
    comp.add_argument("input", nargs="?", default=None, help="coordinates CSV")
    comp.add_argument("--kernel", default=None, help="Gram-matrix CSV instead of coordinates")
    comp.add_argument("--out", default="bundle.json")
    comp.add_argument("--manifest", default=None, help="default: <out>.manifest.json")
    comp.add_argument("--config", default=None, help="JSON config file (flags override it)")
    comp.add_argument("--angles", default=None, help="comma-separated opening angles in radians")
    comp.add_argument("--pairs", type=int, default=None, help="partners sampled per observation")
    comp.add_argument("--tips", type=int, default=None, help="tips per pair (delta grid size)")
    comp.add_argument("--grid", type=int, default=None, help="output delta grid size if different")
    comp.add_argument("--g", choices=sorted(_G_VARIANTS), default=None, help="tip distribution")
    comp.add_argument("--g-scale", type=float, default=None, help="tip scale constant c")
    comp.add_argument("--g-range", default=None, help="a,b bounds for --g uniform-fixed")
    comp.add_argument("--anchor", choices=["midpoint", "self"], default=None)
    comp.add_argument("--seed", type=int, default=None)
    comp.add_argument("--no-zscale", action="store_true", help="skip per-column standardization")
    comp.add_argument("--workers", type=int, default=None)
    comp.add_argument("--header", action="store_true", help="input CSV has a header row")
    comp.add_argument("--id-column", default=None)
    comp.add_argument("--label-column", default=None)

    score = sub.add_parser("score", help="rank observations from a bundle")
    score.add_argument("bundle")
    score.add_argument("--labels", default=None, help="0/1 labels CSV for AUC")
    score.add_argument("--delta", type=float, default=None, help="score at this delta instead of auto")
    score.add_argument("--view", choices=["q_bar", "q_tilde"], default="q_bar")
    score.add_argument("--angle-index", type=int, default=0)
    score.add_argument("--out", default="report.json")
    score.add_argument("--top", type=int, default=10, help="rows to print")

    serve = sub.add_parser("serve", help="serve a bundle (and UI) over HTTP")
    serve.add_argument("bundle")
    serve.add_argument("--report", default=None)
    serve.add_argument("--port", type=int, default=None, help="default $DQFKIT_PORT or 8437")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--ui-dir", default=None, help="static assets directory")
    return parser


def _column(arg: str | None):
    if arg is None:
        return None
    try:
        return int(arg)
    except ValueError:
        return arg


def _resolve_config(args) -> Config:
    if args.config:
        try:
            cfg = Config.from_json(args.config)
        except OSError as exc:
            raise DQFError(f"cannot read config {args.config}: {exc}") from exc
        except (ValueError, TypeError) as exc:
            raise DQFError(f"malformed config {args.config}: {exc}") from exc
    else:
        cfg = Config()
    overrides = {}
    if args.angles is not None:
        overrides["angles"] = tuple(float(a) for a in args.angles.split(","))
    if args.pairs is not None:
        overrides["n_pairs"] = args.pairs
    if args.tips is not None:
        overrides["m_tips"] = args.tips
    if args.grid is not None:
        overrides["delta_grid_size"] = args.grid
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.anchor is not None:
        overrides["anchor"] = args.anchor
    if args.g is not None or args.g_scale is not None or args.g_range is not None:
        variant = _G_VARIANTS[args.g] if args.g else cfg.tip_distribution.variant
        a = b = None
        if args.g_range is not None:
            try:
                a, b = (float(v) for v in args.g_range.split(","))
            except ValueError:
                raise DQFError("--g-range expects two comma-separated numbers") from None
        c = args.g_scale if args.g_scale is not None else cfg.tip_distribution.c
        overrides["tip_distribution"] = TipDistributionSpec(variant=variant, c=c, a=a, b=b)
    return cfg.with_overrides(**overrides) if overrides else cfg


def _cmd_simulate(args) -> int:
    data = generate(args.scenario, seed=args.seed, n=args.n)
    out = Path(args.out or f"{args.scenario}.csv")
    labels_out = Path(args.labels_out or f"{args.scenario}-labels.csv")
    if isinstance(data, Sample1D):
        np.savetxt(out, data.values, fmt="%.17g", delimiter=",")
        print(f"wrote {data.n} rows to {out}")
        return 0
    np.savetxt(out, data.coords, fmt="%.17g", delimiter=",")
    np.savetxt(labels_out, data.labels, fmt="%d")
    print(f"wrote {data.n} rows ({data.d} columns) to {out}; labels to {labels_out}")
    return 0


def _cmd_compute(args, parser: argparse.ArgumentParser) -> int:
    if (args.input is None) == (args.kernel is None):
        parser.error("provide exactly one of a coordinates CSV or --kernel")
    cfg = _resolve_config(args)
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    if args.kernel is not None:
        if args.no_zscale:
            warnings.warn("--no-zscale ignored: scaling never applies to Gram input")
        data = load_gram(args.kernel)
        mode, source = "gram", args.kernel
    else:
        data = load_dataset(
            args.input,
            has_header=args.header,
            id_column=_column(args.id_column),
            label_column=_column(args.label_column),
        )
        if not args.no_zscale:
            data = z_scale(data)
        mode, source = "coordinates", args.input
    timings["load_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    bundle = compute_bundle(data, cfg, workers=args.workers)
    timings["compute_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    payload = bundle.to_json_bytes()
    out = Path(args.out)
    out.write_bytes(payload)
    digest = hashlib.sha256(payload).hexdigest()
    manifest = {
        "input": str(source),
        "mode": mode,
        "zscale": mode == "coordinates" and not args.no_zscale,
        "config": cfg.to_dict(),
        "workers": args.workers,
        "output": str(out),
        "bundle_sha256": digest,
        "timings": timings,
        "seed": cfg.seed,
        "versions": {
            "dqfkit": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
            "kernel_backend": BACKEND,
        },
    }
    manifest_path = Path(args.manifest or f"{out}.manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    timings["write_s"] = time.perf_counter() - t0
    print(f"wrote bundle {out} (n={len(bundle.ids)}, angles={len(bundle.angles)}, sha256={digest[:12]})")
    return 0


def _cmd_score(args) -> int:
    try:
        bundle = DQFBundle.from_json(Path(args.bundle).read_bytes())
    except OSError as exc:
        raise DQFError(f"cannot read bundle {args.bundle}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise DQFError(f"malformed bundle {args.bundle}: {exc}") from exc
    labels = load_labels(args.labels) if args.labels else None
    report = build_report(
        bundle,
        angle_index=args.angle_index,
        view=args.view,
        labels=labels,
        delta=args.delta,
    )
    Path(args.out).write_bytes(report.to_json_bytes())
    print(f"delta*={report.delta_star:.4g}  method={report.method}")
    if report.auc is not None:
        print(f"AUC={report.auc:.4f}")
    print(f"{'rank':>4}  {'id':<12}  score")
    for id_, rank, score in report.top(args.top):
        print(f"{rank:>4}  {id_:<12}  {score:.6g}")
    print(f"wrote report {args.out}")
    return 0


def _cmd_serve(args) -> int:
    port = args.port
    if port is None:
        port = int(os.environ.get("DQFKIT_PORT", DEFAULT_PORT))
    run_server(
        bundle_path=args.bundle,
        report_path=args.report,
        ui_dir=args.ui_dir,
        host=args.host,
        port=port,
    )
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "compute":
            return _cmd_compute(args, parser)
        if args.command == "score":
            return _cmd_score(args)
        return _cmd_serve(args)
    except DQFError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())

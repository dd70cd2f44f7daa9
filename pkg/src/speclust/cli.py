"""Command-line interface.

Subcommands:
    cluster       run the full pipeline once and write a row plus labels
    sweep         run power mode for every p in [0, p_max]
    bound-check   repeated verification trials of the stated guarantees
    curve         tabulate the iteration-count curve
    nmi           score two label files against each other
    gen           materialize a generator to a dataset or matrix CSV

All errors leave through stderr with the stable prefix `speclust: error:`
and exit code 1; success is exit code 0.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import clustering as clst
from . import dataio, report
from .errors import ParseError, SpeclustError

ERROR_PREFIX = "speclust: error:"


def _add_source_flags(p: argparse.ArgumentParser):
    p.add_argument("--dataset", help="libSVM file, or dataset CSV when the path ends in .csv")
    p.add_argument("--dataset-w", help="square weight-matrix CSV (no ground truth)")
    p.add_argument("--gen", help="generator spec, e.g. rings:n_per_ring=200,noise_sd=0.1")


def _add_pipeline_flags(p: argparse.ArgumentParser):
    p.add_argument("--k", type=int, default=2, help="number of clusters")
    p.add_argument("--mode", choices=["exact", "power"], default="exact")
    p.add_argument("--p", type=int, default=None, help="power iterations")
    p.add_argument("--auto-p", action="store_true",
                   help="choose p from the measured eigen-gap (needs --epsilon/--delta)")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None,
                   help="fixed kernel bandwidth; omit for self-tuning")
    p.add_argument("--self-tuning-l", type=int, default=7,
                   help="neighbor rank for the self-tuning bandwidth")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--with-exact", action="store_true",
                   help="also compute the exact embedding for gap/proj_dist columns")


def _add_output_flags(p: argparse.ArgumentParser):
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--plot", help="also render a PNG figure to this path")


def _config(args) -> report.RunConfig:
    return report.RunConfig(
        dataset_path=args.dataset,
        w_path=args.dataset_w,
        gen_spec=args.gen,
        k=args.k,
        mode=args.mode,
        p=args.p,
        auto_p=args.auto_p,
        epsilon=args.epsilon,
        delta=args.delta,
        sigma=args.sigma,
        self_tuning_l=args.self_tuning_l,
        replicates=args.replicates,
        max_iter=args.max_iter,
        seed=args.seed,
        with_exact=args.with_exact,
    )


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_labels(labels: np.ndarray, path: str):
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels))


def _cmd_cluster(args) -> int:
    cfg = _config(args)
    row, labels = report.run_cluster(cfg)
    if args.format == "csv":
        _emit(report.rows_to_csv([row]), args.out)
    else:
        _emit(report.rows_to_json([row]), args.out)
    labels_out = args.labels_out
    if labels_out is None and args.out:
        labels_out = str(Path(args.out).with_suffix(".labels"))
    if labels_out:
        _write_labels(labels, labels_out)
    elif not args.out:
        print("note: no --out/--labels-out given, labels not written", file=sys.stderr)
    if args.plot:
        from . import plots, spectral  # deferred: matplotlib is heavy

        source = report.load_source(cfg)
        if cfg.mode == "exact":
            emb = spectral.exact_embedding(source.g, cfg.k)
        else:
            emb = spectral.power_embedding(source.g, cfg.k, row.p, cfg.seed)
        plots.render_embedding(emb.y, labels, args.plot)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config(args)
    rows = report.run_sweep(cfg, args.p_max)
    if args.format == "csv":
        _emit(report.rows_to_csv(rows), args.out)
    else:
        _emit(report.rows_to_json(rows), args.out)
    if args.plot:
        from . import plots

        plots.render_sweep(rows, args.plot)
    return 0


def _cmd_bound_check(args) -> int:
    cfg = _config(args)
    summary = report.run_bound_check(cfg, args.trials, args.check, args.p)
    _emit(json.dumps(summary, indent=2) + "\n", args.out)
    return 0


def _cmd_curve(args) -> int:
    rows = report.curve_rows(args.x_min, args.x_max, args.steps)
    _emit(report.curve_to_csv(rows), args.out)
    if args.plot:
        from . import plots

        plots.render_curve(rows, args.plot)
    return 0


def _read_label_file(path: str) -> np.ndarray:
    values = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                values.append(int(line))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: not an integer label: {line!r}") from None
    if not values:
        raise ParseError(f"{path}: no labels found")
    return np.array(values, dtype=np.int64)


def _densify(labels: np.ndarray) -> clst.Clustering:
    mapping: dict[int, int] = {}
    dense = np.empty_like(labels)
    for i, v in enumerate(labels):
        v = int(v)
        if v not in mapping:
            mapping[v] = len(mapping)
        dense[i] = mapping[v]
    return clst.Clustering(labels=dense, k=len(mapping))


def _cmd_nmi(args) -> int:
    a = _read_label_file(args.labels_a)
    b = _read_label_file(args.labels_b)
    if a.size != b.size:
        raise ParseError(f"label files differ in length: {a.size} vs {b.size}")
    print(f"{clst.nmi(_densify(a), _densify(b)):.4f}")
    return 0


def _cmd_gen(args) -> int:
    name, data, _labels = report.parse_gen_spec(args.gen, args.seed)
    if isinstance(data, dataio.Dataset):
        text = dataio.write_dataset_csv(data)
    else:
        text = dataio.write_square_csv(data)
    _emit(text, args.out)
    if not args.out:
        return 0
    print(f"wrote {name} to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speclust",
        description="Spectral clustering with power-iteration embeddings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="run the pipeline once")
    _add_source_flags(p)
    _add_pipeline_flags(p)
    _add_output_flags(p)
    p.add_argument("--labels-out", help="label file path (defaults next to --out)")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("sweep", help="sweep p from 0 to p_max in power mode")
    _add_source_flags(p)
    _add_pipeline_flags(p)
    _add_output_flags(p)
    p.add_argument("--p-max", type=int, default=10)
    p.set_defaults(func=_cmd_sweep, mode="power")

    p = sub.add_parser("bound-check", help="verify the approximation guarantees")
    _add_source_flags(p)
    _add_pipeline_flags(p)
    p.add_argument("--out", help="JSON output file (stdout when omitted)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--check", choices=["projection", "kmeans"], default="projection")
    p.set_defaults(func=_cmd_bound_check, mode="power")

    p = sub.add_parser("curve", help="tabulate the iteration-count curve")
    p.add_argument("--x-min", type=float, default=0.0)
    p.add_argument("--x-max", type=float, default=0.45)
    p.add_argument("--steps", type=int, default=45)
    p.add_argument("--out", help="CSV output file (stdout when omitted)")
    p.add_argument("--plot", help="also render a PNG figure to this path")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("nmi", help="normalized mutual information of two label files")
    p.add_argument("labels_a")
    p.add_argument("labels_b")
    p.set_defaults(func=_cmd_nmi)

    p = sub.add_parser("gen", help="write a generated dataset or weight matrix")
    p.add_argument("--gen", required=True, help="generator spec string")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV (stdout when omitted)")
    p.set_defaults(func=_cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpeclustError, OSError) as exc:
        print(f"{ERROR_PREFIX} {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

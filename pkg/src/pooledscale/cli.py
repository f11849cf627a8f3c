"""Command line interface: ``pooledscale <command> [options]``.

Commands: scale, cluster, ari, gap-report, ratios, simulate.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys

import numpy as np

from . import __version__
from .engines import hclust, pairwise_distances
from .errors import PooledScaleError
from .evaluation import ENGINES, adjusted_rand_index, best_ari_over_k, cluster_once
from .gap import DEFAULT_B, DEFAULT_C, DEFAULT_KMAX, cached_reference, gap_curve, select_k_gap
from .io import (
    atomic_write,
    dendrogram_text,
    dataset_text,
    fmt,
    labels_text,
    read_dataset,
    read_labels,
)
from .scaling import METHODS, POOLED_CRITERION, classic_scale, effective_kmax, scale_dataset
from .simgen import PRESETS, preset, run_design
from .univariate import solve_path


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(path, text)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("POOLEDSCALE_SEED")
    return int(env) if env else 0


def _cache_dir(args):
    if getattr(args, "no_cache", False):
        return False
    return args.cache_dir  # None -> POOLEDSCALE_CACHE_DIR or the user cache dir


def _read(args):
    return read_dataset(args.input, delimiter=args.delimiter, header=not args.no_header,
                        label=args.label)


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def cmd_scale(args) -> int:
    ds = _read(args)
    scaled, report = scale_dataset(ds.matrix, args.method, columns=ds.columns, kmax=args.kmax,
                                   B=args.B, c=args.c, seed=_seed(args), cache_dir=_cache_dir(args))
    _emit(dataset_text(ds, scaled), args.out)
    if args.report:
        text = report.to_csv() if str(args.report).endswith(".csv") else report.to_json()
        atomic_write(args.report, text)
    return 0


def cmd_cluster(args) -> int:
    ds = _read(args)
    seed = _seed(args)
    if args.sweep:
        if ds.truth is None:
            raise PooledScaleError("--sweep needs --label to score against")
        ari, k = best_ari_over_k(ds.matrix, ds.truth, args.engine, seed=seed,
                                 starts=args.starts, max_iters=args.max_iters)
        print(f"best_ari={fmt(ari)} best_k={k}")
        return 0
    if args.k is None:
        raise PooledScaleError("give --k or --sweep")
    dendrogram = None
    if args.engine.startswith("hc-"):
        dendrogram = hclust(pairwise_distances(ds.matrix, "euclidean"), args.engine[3:])
        if args.dendrogram:
            atomic_write(args.dendrogram, dendrogram_text(dendrogram))
    part = cluster_once(ds.matrix, args.k, args.engine, seed, starts=args.starts,
                        max_iters=args.max_iters, dendrogram=dendrogram)
    _emit(labels_text(part), args.out)
    if ds.truth is not None:
        print(f"ari={fmt(adjusted_rand_index(part, ds.truth))}", file=sys.stderr)
    return 0


def cmd_ari(args) -> int:
    a = read_labels(args.pred, header=not args.no_header)
    b = read_labels(args.truth, header=not args.no_header)
    print(repr(adjusted_rand_index(a, b)))
    return 0


def _pooled_setup(args, ds):
    criterion = POOLED_CRITERION[args.method]
    n = ds.matrix.shape[0]
    ref = cached_reference(n, effective_kmax(n, args.kmax), args.B, criterion, _seed(args),
                           cache_dir=_cache_dir(args))
    return criterion, ref


def cmd_gap_report(args) -> int:
    ds = _read(args)
    criterion, ref = _pooled_setup(args, ds)
    rows = [["variable", "k", "logW", "gap", "s", "k_star", "saturated"]]
    for j, name in enumerate(ds.columns):
        x = ds.matrix[:, j]
        r = float(np.ptp(x))
        if r == 0:
            rows.append([name, 1, "", "", "", 1, "constant"])
            continue
        path = solve_path(x / r, ref.kmax, criterion)
        curve = gap_curve(path, ref)
        k_star, saturated = select_k_gap(curve, ref, args.c)
        for k in range(curve.kmax):
            rows.append([name, k + 1, fmt(curve.logW[k]), fmt(curve.gap[k]), fmt(ref.s[k]),
                         k_star, str(saturated).lower()])
    _emit(_csv(rows), args.out)
    return 0


def cmd_ratios(args) -> int:
    ds = _read(args)
    _, report = scale_dataset(ds.matrix, args.method, columns=ds.columns, kmax=args.kmax,
                              B=args.B, c=args.c, seed=_seed(args), cache_dir=_cache_dir(args))
    rows = [["rank", "variable", "sd", "pooled", "k_star", "ratio"]]
    order = sorted(range(len(report.decisions)), key=lambda j: -report.decisions[j].ratio)
    for rank, j in enumerate(order, 1):
        d = report.decisions[j]
        sd = classic_scale(ds.matrix[:, j], "sd" if args.method == "psd" else "mad")
        rows.append([rank, d.variable_id, fmt(sd), fmt(d.scale), d.k_star, fmt(d.ratio)])
    _emit(_csv(rows), args.out)
    return 0


def cmd_simulate(args) -> int:
    grid = preset(args.preset)
    scalers = args.scalers.split(",")
    engines = args.engines.split(",")

    def progress(ci, rep, elapsed):
        if args.verbose:
            print(f"cell {ci + 1}/{len(grid)} rep {rep + 1}/{args.reps} {elapsed:.1f}s",
                  file=sys.stderr)

    table = run_design(grid, scalers, engines, reps=args.reps, seed=_seed(args), kmax=args.kmax,
                       B=args.B, c=args.c, starts=args.starts, max_iters=args.max_iters,
                       cache_dir=_cache_dir(args), progress=progress)
    _emit(table.to_csv(), args.out)
    if args.summary:
        atomic_write(args.summary, table.summary().to_csv(index=False, float_format="%.12g"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pooledscale",
                                     description="Pooled variable scaling for cluster analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--in", dest="input", required=True, help="delimited input file")
    data.add_argument("--label", help="column holding true labels (excluded from the data)")
    data.add_argument("--delimiter", default=",")
    data.add_argument("--no-header", action="store_true", help="input has no header row")

    seed = argparse.ArgumentParser(add_help=False)
    seed.add_argument("--seed", type=int, default=None,
                      help="random seed (default: $POOLEDSCALE_SEED or 0)")

    gap = argparse.ArgumentParser(add_help=False)
    gap.add_argument("--kmax", type=int, default=DEFAULT_KMAX)
    gap.add_argument("--B", type=int, default=DEFAULT_B, help="bootstrap replicates")
    gap.add_argument("--c", type=float, default=DEFAULT_C, help="gap rejection constant")
    gap.add_argument("--cache-dir", default=None,
                     help="gap reference cache (default: $POOLEDSCALE_CACHE_DIR or ~/.cache/pooledscale)")
    gap.add_argument("--no-cache", action="store_true")

    engine = argparse.ArgumentParser(add_help=False)
    engine.add_argument("--starts", type=int, default=100, help="k-means random starts")
    engine.add_argument("--max-iters", type=int, default=100, help="k-means iterations per start")

    p = sub.add_parser("scale", parents=[data, seed, gap], help="scale the columns of a dataset")
    p.add_argument("--method", choices=METHODS, default="psd")
    p.add_argument("--out", help="scaled dataset (default stdout)")
    p.add_argument("--report", help="scale report (.json, or .csv for a table)")
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("cluster", parents=[data, seed, engine], help="cluster a dataset")
    p.add_argument("--engine", choices=ENGINES, default="kmeans")
    p.add_argument("--k", type=int)
    p.add_argument("--sweep", action="store_true",
                   help="best ARI against --label over k = 1..3T")
    p.add_argument("--out", help="label file (default stdout)")
    p.add_argument("--dendrogram", help="write the merge list of hierarchical engines here")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("ari", help="adjusted Rand index between two label files")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--no-header", action="store_true")
    p.set_defaults(func=cmd_ari)

    p = sub.add_parser("gap-report", parents=[data, seed, gap], help="per-variable gap curves")
    p.add_argument("--method", choices=sorted(POOLED_CRITERION), default="psd")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gap_report)

    p = sub.add_parser("ratios", parents=[data, seed, gap],
                       help="rank variables by classic / pooled scale")
    p.add_argument("--method", choices=sorted(POOLED_CRITERION), default="psd")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ratios)

    p = sub.add_parser("simulate", parents=[seed, gap, engine], help="run a simulation design")
    p.add_argument("--preset", choices=PRESETS, default="figure2")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--scalers", default=",".join(METHODS))
    p.add_argument("--engines", default="kmeans,hc-ward")
    p.add_argument("--out", help="per-row results (default stdout)")
    p.add_argument("--summary", help="mean/sd of best ARI by noise level, scaler and engine")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_simulate)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (PooledScaleError, OSError, ValueError) as exc:
        print(f"pooledscale {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

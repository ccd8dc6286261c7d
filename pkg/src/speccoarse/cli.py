"""Command-line experiment runner.

Exit status is 0 on success, 1 on invalid input and 2 on runtime failure.
The master seed comes from ``SC_SEED`` (default 0); run ``i`` uses ``master + i``.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coarsening import (
    Method,
    VertexMap,
    coarsen,
    format_vertex_map,
    induced_coarse_graph,
    read_vertex_map,
)
from .eigen import sym_eig
from .errors import SpecCoarseError, ValidationError
from .generators import Kind, generate_graph
from .graph import combinatorial_laplacian, format_edge_list, read_edge_list
from .losses import DEFAULT_K, LossName, compute_loss
from .optimizer import align_spectrum


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def master_seed() -> int:
    raw = os.environ.get("SC_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SC_SEED must be an integer, got {raw!r}") from None


def _csv_list(kind):
    def parse(text):
        try:
            return [kind(t) for t in text.split(",") if t]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _emit(rows, header, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_graph(args, seed):
    if args.input:
        return read_edge_list(args.input), Path(args.input).stem
    if not args.dataset:
        raise UsageError("give --dataset with --n, or --input")
    return generate_graph(args.dataset, args.n, seed), f"{args.dataset}{args.n}"


def _add_dataset(p):
    p.add_argument("--dataset", choices=[k.value for k in Kind])
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--input", help="edge-list file instead of a generated graph")


def _cmd_gen(args):
    g, _ = _load_graph(args, master_seed())
    text = format_edge_list(g)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)


def _cmd_coarsen(args):
    seed = master_seed()
    g, name = _load_graph(args, seed)
    cr = coarsen(g, args.method, args.ratio, rng=seed, k=args.lv_k)
    if args.map_out:
        Path(args.map_out).write_text(format_vertex_map(cr.map))
    if args.coarse_out:
        Path(args.coarse_out).write_text(format_edge_list(cr.coarse))
    for w in cr.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit([(name, args.method, args.ratio, seed, g.n, cr.coarse.n, cr.levels)],
          ["dataset", "method", "ratio", "seed", "n", "n_hat", "levels"], args.out)


def _choices(values, enum_cls, what):
    allowed = {e.value for e in enum_cls}
    bad = [v for v in values if v not in allowed]
    if bad:
        raise UsageError(f"unknown {what} {bad[0]!r}; choose from {', '.join(sorted(allowed))}")
    return values


def _cmd_losses(args):
    master = master_seed()
    losses = _choices(args.losses, LossName, "loss")
    if args.map:
        plans = [("map", None)]
    else:
        if not args.methods:
            raise UsageError("give --method or --map")
        plans = [(m, r) for m in _choices(args.methods, Method, "method") for r in args.ratios]
    rows = []
    for i in range(args.seeds):
        seed = master + i
        g, name = _load_graph(args, seed)
        for method, ratio in plans:
            if ratio is None:
                cr = induced_coarse_graph(g, read_vertex_map(args.map))
                ratio = 1.0 - cr.coarse.n / g.n
            else:
                cr = coarsen(g, method, ratio, rng=seed, k=args.lv_k)
            for loss in losses:
                limit = cr.coarse.n if loss == LossName.EIGENERROR.value else g.n
                k = min(args.k, limit)
                rep = compute_loss(loss, g, cr, k, seed)
                rows.append((name, method, float(ratio), loss, k, seed, rep.value))
    _emit(rows, ["dataset", "method", "ratio", "loss_name", "k", "seed", "value"], args.out)


def _cmd_optimize(args):
    seed = master_seed()
    g, _ = _load_graph(args, seed)
    if args.map:
        cr = induced_coarse_graph(g, read_vertex_map(args.map))
    elif args.method:
        cr = coarsen(g, args.method, args.ratio, rng=seed, k=args.lv_k)
    else:
        cr = induced_coarse_graph(g, VertexMap.identity(g.n))
    coarse = cr.coarse
    if args.target == "original":
        lam = sym_eig(combinatorial_laplacian(g)).values[: coarse.n]
    else:
        lam = args.scale * sym_eig(combinatorial_laplacian(coarse)).values
    out, trace = align_spectrum(coarse, lam, tol=args.tol, max_iter=args.max_iter, rng=seed)
    _emit(list(enumerate(trace.objectives)), ["iter", "objective"], args.trace)
    if args.out:
        Path(args.out).write_text(format_edge_list(out))
    print(f"iterations={trace.iterations} converged={trace.converged} "
          f"objective={trace.objectives[-1]!r} residual={trace.residual!r} "
          f"dropped_edges={trace.dropped_edges}", file=sys.stderr)


def _cmd_graphon(args):
    from .graphon import Graphon, Mode, convergence_experiment
    from .ign import IGNModel

    master = master_seed()
    model = IGNModel.random(depth=args.layers, width=args.width, rng=master)
    seeds = [master + i for i in range(args.seeds)]
    rows = []
    modes = _choices(args.mode, Mode, "mode")
    for name in args.model:
        wg = Graphon.named(name)
        for mode in modes:
            for n, seed, err in convergence_experiment(wg, model, sorted(args.sizes), Mode(mode), seeds, args.n_ref):
                rows.append((name, mode, n, seed, err))
    _emit(rows, ["model", "mode", "n", "seed", "error"], args.out)


def _cmd_attention(args):
    from .attention import (
        AttentionParams,
        FeatureMap,
        deepsets_layer,
        full_attention,
        linear_attention,
        mpnn_vn_attention,
        mpnn_vn_deepsets,
    )

    master = master_seed()
    rows = []
    for i in range(args.seeds):
        seed = master + i
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(args.n, args.d))
        p = AttentionParams.random(args.d, args.d, rng)
        for m in args.m:
            phi = FeatureMap.performer(m, args.d, rng)
            err = np.abs(mpnn_vn_attention(x, p, phi) - linear_attention(x, p, phi)).max()
            rows.append(("performer-vn", args.n, m, seed, float(err)))
            gap = np.abs(linear_attention(x, p, phi) - full_attention(x, p)).max()
            rows.append(("performer-vs-full", args.n, m, seed, float(gap)))
        lt = FeatureMap.linear_transformer()
        err = np.abs(mpnn_vn_attention(x, p, lt) - linear_attention(x, p, lt)).max()
        rows.append(("linear-vn", args.n, 0, seed, float(err)))
        a, b, c = rng.normal(size=(args.d, args.d)), rng.normal(size=(args.d, args.d)), rng.normal(size=args.d)
        err = np.abs(mpnn_vn_deepsets(x, a, b, c) - deepsets_layer(x, a, b, c)).max()
        rows.append(("deepsets-vn", args.n, 0, seed, float(err)))
    _emit(rows, ["kind", "n", "m", "seed", "max_row_error"], args.out)


def _cmd_selftest(args):
    from .acceptance import run_all

    results = run_all(quick=not args.full)
    for r in results:
        print(r.line())
    failed = [r for r in results if r.gating and not r.passed]
    if failed:
        raise SpecCoarseError(f"{len(failed)} check(s) failed")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="speccoarse", description="Spectrum-preserving graph coarsening and graph-limit checks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    methods = [m.value for m in Method]

    p = sub.add_parser("gen", help="write a synthetic graph as an edge list")
    _add_dataset(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("coarsen", help="coarsen a graph to a target ratio")
    _add_dataset(p)
    p.add_argument("--method", choices=methods, required=True)
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--lv-k", type=int, default=10, help="test vectors for local variation")
    p.add_argument("--map-out")
    p.add_argument("--coarse-out")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_coarsen)

    p = sub.add_parser("losses", help="evaluate losses of coarsenings")
    _add_dataset(p)
    p.add_argument("--method", dest="methods", type=_csv_list(str), default=None)
    p.add_argument("--ratio", dest="ratios", type=_csv_list(float), default=[0.5])
    p.add_argument("--loss", dest="losses", type=_csv_list(str), default=[l.value for l in LossName])
    p.add_argument("--map", help="vertex-map file used instead of a coarsening method")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--lv-k", type=int, default=10)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_losses)

    p = sub.add_parser("optimize", help="re-weight a coarse graph toward a target spectrum")
    _add_dataset(p)
    p.add_argument("--method", choices=methods)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--map")
    p.add_argument("--lv-k", type=int, default=10)
    p.add_argument("--target", choices=["original", "scaled"], default="original")
    p.add_argument("--scale", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--trace")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("graphon-convergence", help="IGN output drift across sample sizes")
    p.add_argument("--model", type=_csv_list(str), default=["sbm"])
    p.add_argument("--mode", type=_csv_list(str), default=["ew-fixed"])
    p.add_argument("--sizes", type=_csv_list(int), default=[32, 64, 128, 256, 512])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--width", type=int, default=16)
    p.add_argument("--n-ref", type=int, default=1024)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_graphon)

    p = sub.add_parser("attention-check", help="virtual-node attention equalities")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--m", type=_csv_list(int), default=[8, 64, 512])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_attention)

    p = sub.add_parser("selftest", help="run the acceptance checks")
    p.add_argument("--full", action="store_true", help="use the full instance counts")
    p.set_defaults(func=_cmd_selftest)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SpecCoarseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 invalid input, 4 instance too large.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import exact, fixtures, reporting, sampling
from .errors import CapacityError, ValidationError
from .games import Game, GameKind, contribution_range_bound
from .network import DEFAULT_RELATIONS, load_network

THREADS_ENV = "GTCENTRALITY_THREADS"

EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_CAPACITY = 4

REFERENCE_ELLS = (10**3, 10**6)
REFERENCE_ALPHAS = (0.1, 0.05, 0.01)
DISCREPANCY_NOTE = (
    "The reference error grid is consistent with r^2 = 1200 in every cell, while the "
    "range bound of the 47-node reference network (total weight 60, heaviest edge 5) "
    "gives r = 300; both readings are listed."
)


def _digest(path: str | Path | None) -> str | None:
    if not path:
        return None
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _inputs(args) -> dict:
    out = {}
    for key in ("nodes", "edges", "relations", "partition"):
        path = getattr(args, key, None)
        if path:
            out[key] = {"name": Path(path).name, "sha256": _digest(path)}
    return out


def _write(path: Path, meta: dict, body: str) -> None:
    header = "# meta: " + json.dumps(meta, sort_keys=True) + "\n"
    path.write_text(header + body, encoding="utf-8")


def _load(args):
    net = load_network(args.nodes, args.edges, args.relations)
    partition = exact.load_partition(args.partition, net) if args.partition else None
    return net, partition


def _allocation_body(labels, values, std_error=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if std_error is None:
        w.writerow(["label", "value"])
        for lab, v in zip(labels, values):
            w.writerow([lab, f"{v:.6f}"])
    else:
        w.writerow(["label", "value", "std_error"])
        for lab, v, s in zip(labels, values, std_error):
            w.writerow([lab, f"{v:.6f}", f"{s:.6f}"])
    return buf.getvalue()


def read_allocation(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Labels and values from an allocation or ranking file written by this tool."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln and not ln.startswith("#")]
    reader = csv.reader(lines)
    header = [h.strip().lower() for h in next(reader)]
    try:
        li = header.index("label")
        vi = header.index("value") if "value" in header else header.index("allocation")
    except ValueError:
        raise ValidationError(f"{path}: expected 'label' and 'value' or 'Allocation' columns") from None
    labels, values = [], []
    for row in reader:
        labels.append(row[li])
        try:
            values.append(float(row[vi]))
        except ValueError:
            raise ValidationError(f"{path}: bad number {row[vi]!r}") from None
    return labels, np.array(values)


# ---------------------------------------------------------------------------
# commands


def cmd_fixtures(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "tri_nodes.csv").write_text(fixtures.TRI_NODES)
    (out / "tri_edges.csv").write_text(fixtures.TRI_EDGES)
    (out / "tri_partition.txt").write_text(fixtures.TRI_PARTITION)
    (out / "tri_singletons.txt").write_text("a = 1\nb = 2\nc = 3\n")
    nodes, edges, partition = fixtures.synthetic_cell(args.seed)
    (out / "cell47_nodes.csv").write_text(nodes)
    (out / "cell47_edges.csv").write_text(edges)
    (out / "cell47_partition.txt").write_text(partition)
    (out / "relations.txt").write_text("".join(f"{k} = {v:g}\n" for k, v in DEFAULT_RELATIONS.items()))
    print(f"wrote fixtures to {out}")
    return 0


def cmd_estimate(args) -> int:
    method = sampling.Method(args.method)
    net, partition = _load(args)
    game = Game(net, GameKind(args.game))
    config = sampling.EstimatorConfig(
        method=method, ell=args.ell, ell_r=args.ell_r, ell_s=args.ell_s, seed=args.seed, cap=not args.no_cap
    )
    meta = {
        "command": "estimate",
        "method": method.value,
        "game": game.kind.value,
        "ell": args.ell,
        "ell_r": args.ell_r,
        "ell_s": args.ell_s,
        "cap": config.cap,
        "reps": args.reps,
        "seed": args.seed,
        "inputs": _inputs(args),
    }
    t0, c0 = time.perf_counter(), time.process_time()
    if args.reps == 1:
        est = sampling.estimate(game, config, partition, threads=args.threads)
        values, stderr = est.values, est.std_error
        matrix = None
        meta["effective_ell"] = est.effective_ell.tolist()
        if est.effective_ell_s is not None:
            meta["effective_ell_s"] = est.effective_ell_s.tolist()
    else:
        rep = sampling.replicate(game, config, args.reps, partition, threads=args.threads)
        matrix = rep.matrix()
        values = rep.mean
        stderr = matrix.std(axis=0, ddof=1) / np.sqrt(args.reps)
    elapsed, cpu = time.perf_counter() - t0, time.process_time() - c0

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    meta["values"] = [float(v) for v in values]
    _write(Path(f"{out}.allocation.csv"), meta, _allocation_body(net.labels, values, stderr))
    table = reporting.rank(values, net.labels)
    _write(Path(f"{out}.ranking.csv"), meta, reporting.format_ranking(table))
    if matrix is not None:
        summary = reporting.summarize(matrix, net.labels)
        _write(Path(f"{out}.summary.csv"), meta, reporting.format_summary(summary, table.labels))
    Path(f"{out}.timing.json").write_text(
        json.dumps({"elapsed_seconds": elapsed, "cpu_seconds": cpu, "threads": args.threads}, indent=2) + "\n"
    )
    print(f"elapsed {elapsed:.3f} s (cpu {cpu:.3f} s)")
    return 0


def cmd_exact(args) -> int:
    net, partition = _load(args)
    game = Game(net, GameKind(args.game))
    if args.method == "shapley":
        values = exact.exact_shapley(game)
    elif args.method == "banzhaf":
        values = exact.exact_banzhaf(game)
    elif args.method == "owen":
        values = exact.exact_owen(game, partition)
    else:
        values = exact.exact_banzhaf_owen(game, partition)
    meta = {
        "command": "exact",
        "method": args.method,
        "game": game.kind.value,
        "inputs": _inputs(args),
        "values": [float(v) for v in values],
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write(Path(f"{out}.allocation.csv"), meta, _allocation_body(net.labels, values))
    _write(Path(f"{out}.ranking.csv"), meta, reporting.format_ranking(reporting.rank(values, net.labels)))
    for lab, v in zip(net.labels, values):
        print(f"{lab}\t{v:.6f}")
    return 0


def reference_rows(r_values: dict[str, float]) -> list[tuple[str, int, float, float]]:
    """Error bounds over the reference grid of sample sizes and confidence levels."""
    rows = []
    for name, r in r_values.items():
        for ell in REFERENCE_ELLS:
            for alpha in REFERENCE_ALPHAS:
                rows.append((name, ell, alpha, sampling.banzhaf_error_bound(ell, alpha, r)))
    return rows


def cmd_bound(args) -> int:
    if args.reference_table:
        print("reading,ell,alpha,epsilon")
        for name, ell, alpha, eps in reference_rows({"r2=1200": 1200**0.5, "r=300": 300.0}):
            print(f"{name},{ell},{alpha},{eps:.5f}")
        print(f"# note: {DISCREPANCY_NOTE}")
        return 0
    if (args.epsilon is None) == (args.ell is None):
        raise _Usage("give exactly one of --epsilon and --ell")
    if args.alpha is None:
        raise _Usage("--alpha is required")
    given = [x is not None for x in (args.r, args.r2)] + [bool(args.edges)]
    if sum(given) != 1:
        raise _Usage("give exactly one of --r, --r2, or a network (--edges)")
    if args.r is not None:
        r = args.r
    elif args.r2 is not None:
        if args.r2 < 0:
            raise ValidationError("--r2 must be non-negative")
        r = args.r2**0.5
    else:
        r = contribution_range_bound(load_network(args.nodes, args.edges, args.relations))
    if args.ell is not None:
        ell = int(args.ell)
        if ell != args.ell or ell <= 1:
            raise ValidationError("--ell must be an integer greater than 1")
        eps = sampling.banzhaf_error_bound(ell, args.alpha, r)
        print(f"ell,alpha,r,epsilon\n{ell},{args.alpha},{r:.6f},{eps:.5f}")
    else:
        ell = sampling.banzhaf_sample_size(sampling.ErrorBudget(args.epsilon, args.alpha, r))
        print(f"epsilon,alpha,r,ell\n{args.epsilon},{args.alpha},{r:.6f},{ell}")
    return 0


def cmd_lorenz(args) -> int:
    labels, values = read_allocation(args.allocation)
    curve = reporting.lorenz(values)
    meta = {"command": "lorenz", "source": Path(args.allocation).name, "sha256": _digest(args.allocation)}
    _write(Path(args.out), meta, reporting.format_lorenz(curve))
    return 0


def cmd_compare(args) -> int:
    la, va = read_allocation(args.a)
    lb, vb = read_allocation(args.b)
    ta, tb = reporting.rank(va, la), reporting.rank(vb, lb)
    cmp = reporting.compare_rankings(ta, tb, args.k)
    meta = {
        "command": "compare",
        "k": args.k,
        "a": {"name": Path(args.a).name, "sha256": _digest(args.a)},
        "b": {"name": Path(args.b).name, "sha256": _digest(args.b)},
    }
    text = reporting.format_comparison(cmp, ta)
    if args.out:
        _write(Path(args.out), meta, text)
    print(f"top-{cmp.k} overlap: {cmp.overlap}")
    return 0


# ---------------------------------------------------------------------------


class _Usage(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(value)


def _add_network(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--nodes", help="node CSV (label,weight)")
    p.add_argument("--edges", required=required, help="edge CSV (source,target,relationship|weight)")
    p.add_argument("--relations", help="relation map file (name = weight); defaults to the built-in table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtcentrality", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixtures", help="write the demo networks")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=2015)
    p.set_defaults(func=cmd_fixtures)

    default_threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    p = sub.add_parser("estimate", help="Monte Carlo estimate of a coalitional value")
    _add_network(p)
    p.add_argument("--game", choices=[k.value for k in GameKind], default="mwconn")
    p.add_argument("--method", choices=[m.value for m in sampling.Method], required=True)
    p.add_argument("--partition", help="partition file (label = union-index)")
    p.add_argument("--ell", type=_positive_int, default=1000)
    p.add_argument("--ell-r", type=_positive_int, default=100)
    p.add_argument("--ell-s", type=_positive_int, default=10)
    p.add_argument("--reps", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--no-cap", action="store_true", help="do not truncate sample sizes at the population size")
    p.add_argument("--threads", type=_positive_int, default=default_threads)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("exact", help="exact value by enumeration (small networks)")
    _add_network(p)
    p.add_argument("--game", choices=[k.value for k in GameKind], default="mwconn")
    p.add_argument("--method", choices=[m.value for m in sampling.Method], required=True)
    p.add_argument("--partition")
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bound", help="Hoeffding sample size or error bound for the Banzhaf estimator")
    _add_network(p, required=False)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--ell", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--r", type=float, help="range of the marginal contributions")
    p.add_argument("--r2", type=float, help="squared range")
    p.add_argument("--reference-table", action="store_true", help="print the reference error grid under both readings of r")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("lorenz", help="Lorenz curve of an allocation file")
    p.add_argument("--allocation", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lorenz)

    p = sub.add_parser("compare", help="compare the rankings induced by two allocation files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "method", None) in ("owen", "banzhaf-owen") and not args.partition:
        parser.error(f"--method {args.method} requires --partition")
    try:
        return args.func(args)
    except _Usage as exc:
        parser.error(str(exc))
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())

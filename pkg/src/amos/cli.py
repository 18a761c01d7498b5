"""Command-line interface: ``amos {cluster,generate,evaluate,sweep}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 reliability not
reached (k_max exhausted on some component).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import metrics
from .engine import SCHEMA, AmosConfig, run_amos
from .errors import AmosError
from .graph import connected_components, load_graph, subgraph, write_edgelist
from .rim import RimSpec, generate_rim
from .sweep import SWEEP_COLUMNS, run_sweep, summarize, write_sweep_csv

log = logging.getLogger("amos")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_UNRELIABLE = 0, 1, 2, 3
# Components below this size cannot hold two clusters of >= 2 nodes each,
# so no K >= 2 partition can pass the phase-transition tests.
MIN_COMPONENT = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_labels(path, n=None) -> np.ndarray:
    vals = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                vals.append(int(s))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected an integer label, got {s!r}") from None
    labels = np.asarray(vals, dtype=np.int64)
    if n is not None and labels.shape[0] != n:
        raise ValueError(f"{path}: {labels.shape[0]} labels for {n} nodes")
    return labels


def write_labels(labels, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(f"{int(x)}\n" for x in labels)


def _graph_args(p):
    p.add_argument("graph", help="graph file")
    p.add_argument("--format", choices=("edgelist", "mtx"), default="edgelist")
    p.add_argument("--one-based", action="store_true", help="edge-list node ids start at 1")
    p.add_argument("--binarize", action="store_true", help="ignore edge weights")


def _load(args):
    return load_graph(args.graph, format=args.format, one_based=args.one_based,
                      binarize=args.binarize)


def cluster_graph(g, cfg: AmosConfig):
    """Run AMOS on every connected component; returns ``(labels, document, exhausted)``."""
    count, comp = connected_components(g)
    labels = np.empty(g.n, dtype=np.int64)
    offset = 0
    components = []
    exhausted = False
    for c in range(count):
        nodes = np.flatnonzero(comp == c)
        entry = {"index": c, "n": int(nodes.size), "nodes": nodes.tolist()}
        if nodes.size < MIN_COMPONENT:
            labels[nodes] = offset
            entry.update(status="bypassed", K=1, report=None)
            offset += 1
        else:
            sub_cfg = cfg
            if cfg.k_max is not None and cfg.k_max > nodes.size - 1:
                sub_cfg = replace(cfg, k_max=int(nodes.size) - 1)
            rep = run_amos(subgraph(g, nodes), sub_cfg)
            labels[nodes] = rep.labels + offset
            offset += rep.K
            exhausted |= rep.termination != "reliable"
            entry.update(status="amos", K=rep.K, report=rep.to_dict())
        components.append(entry)
    doc = {
        "schema": SCHEMA,
        "n": g.n,
        "m": g.m,
        "K": offset,
        "termination": "k_max_exhausted" if exhausted else "reliable",
        "labels": labels.tolist(),
        "components": components,
    }
    return labels, doc, exhausted


def cmd_cluster(args) -> int:
    cfg = AmosConfig(eta=args.eta, alpha=args.alpha, alpha_prime=args.alpha_prime,
                     k_max=args.kmax, seed=args.seed, restarts=args.restarts,
                     normalize=not args.no_normalize)
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"amos cluster: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    g = _load(args)
    labels, doc, exhausted = cluster_graph(g, cfg)
    doc["preprocessing"] = {
        "format": args.format, "one_based": args.one_based, "binarize": args.binarize,
        "degree_normalized": cfg.normalize, "components": len(doc["components"]),
        "min_component_size": MIN_COMPONENT,
    }
    doc["config"] = {"eta": cfg.eta, "alpha": cfg.alpha, "alpha_prime": cfg.alpha_prime,
                     "k_max": cfg.k_max, "seed": cfg.seed, "restarts": cfg.restarts,
                     "normalize": cfg.normalize}
    text = json.dumps(doc, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if args.labels:
        write_labels(labels, args.labels)
    log.info("K=%d (%s)", doc["K"], doc["termination"])
    return EXIT_UNRELIABLE if exhausted else EXIT_OK


def cmd_generate(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        d = json.load(fh)
    if args.seed is not None:
        d["seed"] = args.seed
    g, labels = generate_rim(RimSpec.from_dict(d))
    write_edgelist(g, args.edges)
    write_labels(labels, args.labels)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    g = _load(args)
    labels = read_labels(args.labels, g.n)
    truth = read_labels(args.truth, g.n) if args.truth else None
    text = json.dumps(metrics.evaluate(g, labels, truth), indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


def _parse_grid(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid t grid {text!r}") from None


def cmd_sweep(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        spec = RimSpec.from_dict(json.load(fh))
    rows = run_sweep(spec, args.t_grid, args.trials, seed=args.seed,
                     restarts=args.restarts, workers=args.workers)
    write_sweep_csv(rows, args.output if args.output else sys.stdout)
    for t, s in summarize(rows).items():
        log.info("t=%g mean NMI=%.3f violations=%d", t, s["mean_nmi"], s["violations"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="amos", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("cluster", help="select K and cluster a graph")
    _graph_args(c)
    c.add_argument("--eta", type=float, default=1e-5, help="V-test level (default 1e-5)")
    c.add_argument("--alpha", type=float, default=0.05, help="GLRT level (default 0.05)")
    c.add_argument("--alpha-prime", type=float, default=0.05,
                   help="inhomogeneous test level (default 0.05)")
    c.add_argument("--kmax", type=int, default=None, help="largest K tried (default min(n-1, 200))")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--restarts", type=int, default=20, help="K-means restarts")
    c.add_argument("--no-normalize", action="store_true",
                   help="use raw weights instead of S^-1/2 W S^-1/2")
    c.add_argument("-o", "--output", help="report JSON (default stdout)")
    c.add_argument("--labels", help="write one label per line")
    c.set_defaults(func=cmd_cluster)

    gsub = sub.add_parser("generate", help="draw a planted graph from a JSON spec")
    gsub.add_argument("spec")
    gsub.add_argument("--edges", required=True, help="output edge list")
    gsub.add_argument("--labels", required=True, help="output ground-truth labels")
    gsub.add_argument("--seed", type=int, default=None, help="override the spec seed")
    gsub.set_defaults(func=cmd_generate)

    e = sub.add_parser("evaluate", help="clustering metrics for a labelling")
    _graph_args(e)
    e.add_argument("labels")
    e.add_argument("--truth", help="ground-truth labels (enables NMI, RI, F)")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser(
        "sweep", help="phase-transition sweep over t",
        description="CSV columns, in order: " + ",".join(SWEEP_COLUMNS))
    s.add_argument("spec", help="homogeneous RIM spec JSON; weights are set to t / cross_p")
    s.add_argument("--t-grid", type=_parse_grid, required=True, help="comma separated, increasing, > 0")
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=int, default=20)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-o", "--output", help="CSV path (default stdout)")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")
    try:
        return args.func(args)
    except (AmosError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"amos: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

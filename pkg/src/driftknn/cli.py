"""Command-line entry point: ``driftknn {simulate,classify,rates,bench,realdata}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from contextlib import contextmanager

import numpy as np

from . import adaptive, bench, theory
from .realdata import load_csv, normalize_minmax, read_dataset_csv, real_data_protocol, split_by_binary, write_dataset_csv
from .synth import DgpConfig, sample_dataset

log = logging.getLogger("driftknn")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def cmd_simulate(args) -> None:
    dgp = DgpConfig(args.dgp, args.kappa, args.gamma, args.d)
    data = sample_dataset(dgp, args.role, args.n, seed=args.seed)
    if args.out in (None, "-"):
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow([f"f{j}" for j in range(data.d)] + ["y"])
        for x, y in zip(data.X, data.y):
            w.writerow([format(v, ".17g") for v in x] + [int(y)])
    else:
        write_dataset_csv(data, args.out)


CLASSIFY_COLUMNS = ("index", "label", "k_P", "k_Q", "r_final", "stop_reason", "attempts")


def cmd_classify(args) -> None:
    queries = read_dataset_csv(args.query, tag="query", require_labels=False).X
    if args.algorithm == "multi":
        if not args.source:
            raise ValueError("--algorithm multi needs one or more --source files")
        sources = [read_dataset_csv(p, tag=f"P{j + 1}") for j, p in enumerate(args.source)]
        sel = adaptive.adaptive_multi_source_batch(sources, queries)
        names = [f"k_{j + 1}" for j in range(len(sources))]
        with _output(args.out) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "label", *names, "r_final", "stop_reason", "attempts"])
            for i, lab in enumerate(sel.labels):
                s = sel.selection(i)
                w.writerow([i, int(lab), *s.ks, repr(s.r_final), s.stop_reason, s.iterations])
        return

    if args.p is None:
        raise ValueError("--p is required unless --algorithm multi")
    P = read_dataset_csv(args.p, tag="P")
    Q = read_dataset_csv(args.q, tag="Q") if args.q else type(P).empty(P.d, "Q")
    rows = []
    if args.algorithm == "adaptive":
        sel = adaptive.adaptive_two_source_batch(P, Q, queries)
        for i in range(len(sel)):
            s = sel.selection(i)
            rows.append([i, s.label, s.ks[0], s.ks[1], repr(s.r_final), s.stop_reason, s.iterations])
    else:
        name = {"cw-like": bench.KNN_CW_LIKE, "knn-q": bench.KNN_Q, "knn-all": bench.KNN_ALL}[args.algorithm]
        labels, attempts = bench.predict(name, P, Q, queries)
        for i, lab in enumerate(labels):
            rows.append([i, int(lab), "", "", "", "", "" if attempts is None else int(attempts[i])])
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CLASSIFY_COLUMNS)
        w.writerows(rows)


def cmd_rates(args) -> None:
    params = theory.RateParams(args.alpha, args.beta_p, args.beta_q, args.gamma, args.d, args.np, args.nq)
    exp = theory.minimax_exponent_single(params)
    out = {
        "branch": "source_smooth" if params.source_smooth else "target_smooth",
        "exponent": repr(exp.value),
        "exact": str(exp.exact).lower(),
        "regime": theory.classify_regime(params).value,
        "rate": repr(theory.minimax_rate_general(params)) if args.np + args.nq >= 1 else "",
        "suboptimal_rate": "",
    }
    if params.source_smooth and params.beta_Q > 0 and args.np + args.nq >= 1:
        out["suboptimal_rate"] = repr(theory.suboptimal_upper_bound(params))
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(out.keys())
        w.writerow(out.values())


def _bench_configs(args) -> list[bench.ExperimentConfig]:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        return [bench.config_from_dict(r) for r in (raw if isinstance(raw, list) else [raw])]
    classifiers = tuple(c.strip().upper() for c in args.classifiers.split(",") if c.strip())
    configs = []
    for kappa in _floats(args.kappa):
        for n_P in _ints(args.np):
            for n_Q in _ints(args.nq):
                dgp = DgpConfig(args.dgp, kappa, args.gamma, args.d)
                chosen = classifiers
                if n_Q == 0 and bench.KNN_Q in classifiers:
                    log.warning("skipping %s at n_Q = 0", bench.KNN_Q)
                    chosen = tuple(c for c in classifiers if c != bench.KNN_Q)
                configs.append(bench.ExperimentConfig(dgp, n_P, n_Q, args.trials, args.test_points, chosen, args.seed))
    return configs


def cmd_bench(args) -> None:
    results = []
    for config in _bench_configs(args):
        log.info("running %s", config)
        results.append(bench.run_experiment(config, workers=args.workers))
    if args.out in (None, "-"):
        w = csv.DictWriter(sys.stdout, fieldnames=bench.RESULT_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(bench.result_rows(results, timing=not args.no_timing))
    else:
        bench.write_results_csv(results, args.out, timing=not args.no_timing)


def cmd_realdata(args) -> None:
    table = load_csv(args.csv, args.label, [c.strip() for c in args.features.split(",")], args.split)
    if table.dropped_count:
        log.warning("dropped %d rows with missing values", table.dropped_count)
    P, Q = split_by_binary(normalize_minmax(table))
    log.info("split sizes: P=%d Q=%d", P.n, Q.n)
    classifiers = tuple(c.strip().upper() for c in args.classifiers.split(",") if c.strip())
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_P", "n_Q_total", "n_Q_train", "replications", "classifier", "accuracy", "stderr"])
        for n_train in _ints(args.nq_train):
            res = real_data_protocol(P, Q, n_train, args.replications, args.seed, classifiers)
            for name in classifiers:
                w.writerow([P.n, Q.n, n_train, args.replications, name, repr(res.mean(name)), repr(res.stderr(name))])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftknn", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a labeled dataset from a synthetic DGP")
    p.add_argument("--dgp", type=int, choices=(1, 2), default=1)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.6)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--role", choices=("P", "Q"), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="label query points from training CSVs")
    p.add_argument("--p", help="source (P) dataset CSV")
    p.add_argument("--q", help="target (Q) dataset CSV; omit for a single-source run")
    p.add_argument("--source", action="append", help="dataset CSV for --algorithm multi (repeatable)")
    p.add_argument("--query", required=True, help="CSV with columns f0..f{d-1}")
    p.add_argument("--algorithm", choices=("adaptive", "multi", "cw-like", "knn-q", "knn-all"), default="adaptive")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("rates", help="minimax exponent, rate and regime")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--beta-p", type=float, required=True)
    p.add_argument("--beta-q", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--np", type=int, default=0)
    p.add_argument("--nq", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("bench", help="Monte Carlo comparison of classifiers")
    p.add_argument("--config", help="JSON file with one config object or a list of them")
    p.add_argument("--dgp", type=int, choices=(1, 2), default=1)
    p.add_argument("--kappa", default="0.5", help="comma-separated grid")
    p.add_argument("--gamma", type=float, default=0.6)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--np", default="2000", help="comma-separated grid")
    p.add_argument("--nq", default="2000", help="comma-separated grid")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--test-points", type=int, default=200)
    p.add_argument("--classifiers", default=",".join(bench.COMPETITORS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None, help=f"processes (default ${bench.WORKERS_ENV} or 1)")
    p.add_argument("--no-timing", action="store_true", help="leave wall_time_seconds blank for byte-stable output")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("realdata", help="split/replicate accuracy study on a tabular CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--label", default="y")
    p.add_argument("--features", default="V2,V3,V7,V13")
    p.add_argument("--split", default="V1")
    p.add_argument("--nq-train", default="100,120,140")
    p.add_argument("--replications", type=int, default=100)
    p.add_argument("--classifiers", default=",".join(bench.COMPETITORS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_realdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"driftknn {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

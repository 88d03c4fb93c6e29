"""Command line front end.

Example::

    copulasmote --data data/pima.csv --spec pima \\
        --methods CopulaSMOTE,SMOTE,BorderlineSMOTE,ADASYN,None \\
        --seed 20240521 --out results/pima

``--spec`` takes either a built-in dataset name (pima, cdc, iraqi) or a
path to a JSON file describing the CSV's target column, positive label,
zero-coded columns, and any label or value recoding.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from .datasets import BUILTIN_SPECS, DatasetSpec, builtin_spec
from .runner import ExperimentConfig, run_experiment

__all__ = ["build_parser", "main"]

_SUMMARY_METRICS = ("f1", "auc", "balanced_accuracy", "recall")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="copulasmote",
        description="Run a 5x2 cross-validated oversampling comparison on a CSV dataset.",
    )
    parser.add_argument("--data", required=True, help="path to the dataset CSV")
    parser.add_argument(
        "--spec",
        required=True,
        help=f"built-in dataset name ({', '.join(sorted(BUILTIN_SPECS))}) or path to a spec JSON",
    )
    parser.add_argument(
        "--methods",
        required=True,
        help="comma-separated resampling methods, e.g. CopulaSMOTE,SMOTE,None",
    )
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument("--out", default=None, help="output directory for metrics.csv etc.")
    parser.add_argument(
        "--truncation", type=int, default=None,
        help="vine truncation level (default: min(3, d-1))",
    )
    parser.add_argument(
        "--k-neighbors", type=int, default=5,
        help="neighborhood size for the interpolation baselines (default 5)",
    )
    parser.add_argument(
        "--export-resampled", action="store_true",
        help="write each fold's resampled training set under <out>/resampled/",
    )
    parser.add_argument(
        "--subsample", type=int, default=None,
        help="stratified row cap applied before splitting",
    )
    parser.add_argument("--max-iter", type=int, default=5000, help="classifier iteration cap")
    parser.add_argument("--tol", type=float, default=1e-6, help="classifier gradient tolerance")
    parser.add_argument(
        "--jitter-sd", type=float, default=1e-6,
        help="tie-breaking jitter scale used when building pseudo-observations",
    )
    return parser


def _load_spec(arg: str) -> DatasetSpec:
    if arg in BUILTIN_SPECS:
        return builtin_spec(arg)
    if os.path.exists(arg):
        return DatasetSpec.from_json(arg)
    raise SystemExit(
        f"--spec {arg!r} is neither a built-in name ({', '.join(sorted(BUILTIN_SPECS))}) "
        "nor an existing JSON file"
    )


def _fmt_mean_sd(store, method, metric, mode):
    try:
        mean, sd = store.aggregate(method, metric, mode)
    except Exception:
        return "NA"
    return f"{mean:.4f}±{sd:.4f}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = _load_spec(args.spec)
    methods = tuple(m for m in (s.strip() for s in args.methods.split(",")) if m)
    cfg = ExperimentConfig(
        data_path=args.data,
        dataset_spec=spec,
        methods=methods,
        master_seed=args.seed,
        out_dir=args.out,
        truncation_level=args.truncation,
        k_neighbors=args.k_neighbors,
        jitter_sd=args.jitter_sd,
        max_iter=args.max_iter,
        tol=args.tol,
        export_resampled=args.export_resampled,
        subsample=args.subsample,
    )
    store = run_experiment(cfg)

    print(f"dataset={store.dataset} seed={args.seed} folds=10 methods={','.join(cfg.methods)}")
    for mode in ("overall", "minority"):
        print(f"-- mode={mode} (mean±sd over 10 folds)")
        header = "method".ljust(16) + "".join(m.rjust(19) for m in _SUMMARY_METRICS)
        print(header)
        for method in cfg.methods:
            cells = "".join(_fmt_mean_sd(store, method, m, mode).rjust(19) for m in _SUMMARY_METRICS)
            print(method.ljust(16) + cells)
    if store.pairwise:
        shown = [r for r in store.pairwise if r["metric"] == "f1" and r["mode"] == "overall"]
        if shown:
            print("-- paired 5x2 t-tests on overall f1")
            for rec in shown:
                t = f"{rec['t']:.4f}" if math.isfinite(rec["t"]) else str(rec["t"])
                print(
                    f"{rec['method_a']} vs {rec['method_b']}: t={t} p={rec['p']:.4f}"
                    + (" (degenerate)" if rec["degenerate"] else "")
                )
    if store.failures:
        print(f"-- {len(store.failures)} fold failure(s); see failures.csv", file=sys.stderr)
        for f in store.failures:
            print(
                f"   {f['method']} iter={f['iteration']} half={f['half']}: {f['error']}",
                file=sys.stderr,
            )
    if args.out:
        print(f"results written to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""
Command-line surface: ``c2st <subcommand>``.

Subcommands
-----------
- ``gen``    write a labeled JSONL dataset drawn from an HDGM pair
- ``run``    run one benchmark cell and print its JSON summary
- ``sweep``  run a grid file and stream one CSV row per cell
- ``theory`` evaluate the closed-form power of the accuracy test
- ``check``  run the gradient/oracle/uniformity property suites
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import bench, checks, hdgm
from .stats import PowerInputs, theoretical_power


def _add_cell_args(parser, with_trials=True):
    parser.add_argument("--dataset", default="hdgm-hard",
                        choices=["hdgm-easy", "hdgm-medium", "hdgm-hard"])
    parser.add_argument("--hypothesis", default="H1", choices=["H0", "H1"])
    parser.add_argument("--d", type=int, default=10)
    parser.add_argument("--n-total", type=int, default=4000,
                        help="total points across both samples (N)")
    parser.add_argument("--method", default="ssl-c2st", choices=list(bench.METHODS))
    parser.add_argument("--feature-layer", default="p0_scalar",
                        choices=["p0_scalar", "hidden_rep", "logits"])
    parser.add_argument("--feature-norm", default="abs_1d",
                        choices=["abs_1d", "squared_l2"])
    parser.add_argument("--n-perm", type=int, default=100)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--unlabeled-fraction", type=float, default=1.0)
    parser.add_argument("--epochs-pretrain", type=int, default=100)
    parser.add_argument("--epochs-classifier", type=int, default=200)
    parser.add_argument("--batch-size", type=int, default=128)
    parser.add_argument("--freeze-encoder", action=argparse.BooleanOptionalAction,
                        default=None,
                        help="phase-2 mode; defaults to frozen for ssl methods")
    if with_trials:
        parser.add_argument("--trials", type=int, default=100)


def _cell_config(args) -> bench.ExperimentConfig:
    kw = dict(
        dataset=args.dataset,
        hypothesis=args.hypothesis,
        d=args.d,
        n_total=args.n_total,
        method=args.method,
        feature_layer=args.feature_layer,
        feature_norm=args.feature_norm,
        n_perm=args.n_perm,
        alpha=args.alpha,
        trials=getattr(args, "trials", 1),
        seed=args.seed,
        unlabeled_fraction=args.unlabeled_fraction,
        epochs_pretrain=args.epochs_pretrain,
        epochs_classifier=args.epochs_classifier,
        batch_size=args.batch_size,
    )
    if args.freeze_encoder is not None:
        kw["freeze_encoder"] = args.freeze_encoder
    return bench.make_config(**kw)


def cmd_gen(args) -> int:
    spec_p, spec_q = hdgm.hdgm_pair(args.dataset.removeprefix("hdgm-"), args.d,
                                    args.hypothesis)
    n_per_cluster = args.n_total // 4
    import numpy as np

    root = np.random.SeedSequence(args.seed)
    seed_p, seed_q = root.spawn(2)
    sp = hdgm.sample_hdgm(spec_p, n_per_cluster, seed_p)
    sq = hdgm.sample_hdgm(spec_q, n_per_cluster, seed_q)
    ds = hdgm.build_dataset(sp, sq)
    hdgm.write_jsonl(args.out, ds, spec=spec_q, seed=args.seed)
    print(f"wrote {len(ds)} points ({args.dataset}, {args.hypothesis}, d={args.d}) "
          f"to {args.out}")
    return 0


def cmd_run(args) -> int:
    cfg = _cell_config(args)
    start = time.monotonic()
    est = bench.estimate(cfg, jobs=args.jobs)
    runtime = time.monotonic() - start
    payload = {
        "config": cfg.to_dict(),
        "rejections": est.rejections,
        "trials": est.trials,
        "rate": est.rate,
        "stderr": est.stderr,
        "runtime_s": round(runtime, 3),
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_sweep(args) -> int:
    with open(args.grid) as fh:
        grid_spec = json.load(fh)

    def log(row):
        print(
            f"{row['method']:<11} {row['dataset']:<12} {row['hypothesis']} "
            f"d={row['d']:<3} N={row['N']:<6} frac={row['unlabeled_fraction']:<4} "
            f"rate={row['rate']:.3f} (+-{row['stderr']:.3f}) "
            f"[{row['runtime_s']:.1f}s]"
        )

    rows, n_failed = bench.sweep(
        grid_spec, args.out, jobs=args.jobs, trials=args.trials,
        max_seconds=args.max_seconds, log=log,
    )
    print(f"wrote {len(rows)} rows to {args.out}" +
          (f" ({n_failed} cells over budget)" if n_failed else ""))
    return 1 if n_failed else 0


def cmd_theory(args) -> int:
    power = theoretical_power(PowerInputs(args.eps, args.n_te, args.alpha))
    print(json.dumps({"eps": args.eps, "n_te": args.n_te, "alpha": args.alpha,
                      "power": power}))
    return 0


def cmd_check(args) -> int:
    results = checks.run_all_checks(quick=args.quick)
    failed = 0
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failed += 0 if ok else 1
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="c2st",
        description="Classifier two-sample tests with semi-supervised "
                    "pretraining and a Monte-Carlo power benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write a JSONL dataset")
    p_gen.add_argument("--dataset", default="hdgm-hard",
                       choices=["hdgm-easy", "hdgm-medium", "hdgm-hard"])
    p_gen.add_argument("--hypothesis", default="H1", choices=["H0", "H1"])
    p_gen.add_argument("--d", type=int, default=10)
    p_gen.add_argument("--n-total", type=int, default=4000)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(fn=cmd_gen)

    p_run = sub.add_parser("run", help="run one cell, print JSON")
    _add_cell_args(p_run)
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--out", default=None, help="also write the JSON here")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a grid file into a CSV")
    p_sweep.add_argument("--grid", required=True, help="grid JSON file")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--trials", type=int, default=None,
                         help="override trials for every cell")
    p_sweep.add_argument("--max-seconds", type=float, default=None,
                         help="per-cell wall-clock budget")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_theory = sub.add_parser("theory", help="closed-form power calculator")
    p_theory.add_argument("--eps", type=float, required=True)
    p_theory.add_argument("--n-te", type=int, required=True)
    p_theory.add_argument("--alpha", type=float, default=0.05)
    p_theory.set_defaults(fn=cmd_theory)

    p_check = sub.add_parser("check", help="run property suites")
    p_check.add_argument("--quick", action="store_true")
    p_check.set_defaults(fn=cmd_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

    sim run --config FILE [--out DIR] [--workers N]
    sim cost --params FILE | --from-run DIR
    sim validate --config FILE
    sim summarize --in DIR

Exit code 0 on success, nonzero with a message on any error.  The default
output directory can be set with the SIM_OUT_DIR environment variable.
"""

import argparse
import os
import sys

from . import cost as cost_model
from .config import load_config, validate_config
from .harness import read_csv, run_scenario, summarize


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sim",
        description="DSDV link-metric comparison simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the configured sweep")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--workers", type=int, default=1)

    p_cost = sub.add_parser("cost", help="evaluate the routing-overhead cost model")
    src = p_cost.add_mutually_exclusive_group(required=True)
    src.add_argument("--params", help="cost parameter file (key = value)")
    src.add_argument("--from-run", dest="from_run",
                     help="results directory; rates taken from run counters")

    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("--config", required=True)

    p_sum = sub.add_parser("summarize", help="rank metrics from aggregate results")
    p_sum.add_argument("--in", dest="in_dir", required=True)
    return parser


def _cmd_run(args):
    cfg = load_config(args.config)
    errors = validate_config(cfg)
    if errors:
        for e in errors:
            print("config error: %s" % e, file=sys.stderr)
        return 2
    out_dir = args.out or os.environ.get("SIM_OUT_DIR") or cfg.out_dir
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".writable")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        print("output path not writable: %s" % exc, file=sys.stderr)
        return 2
    rows, _aggregates = run_scenario(cfg, out_dir=out_dir,
                                     workers=max(args.workers, 1),
                                     log=lambda msg: print(msg))
    print("wrote %d per-run rows to %s" % (len(rows), out_dir))
    return 0


def _print_breakdown(kind, breakdown):
    print("metric,c_per,c_tri,c_metric,c_total")
    print("%s,%.9g,%.9g,%.9g,%.9g" % (kind, breakdown.c_per, breakdown.c_tri,
                                      breakdown.c_metric, breakdown.c_total))


def _cmd_cost(args):
    if args.params:
        with open(args.params, encoding="utf-8") as fh:
            kind, params = cost_model.parse_params(fh.read())
        _print_breakdown(kind, cost_model.total_cost(kind, params))
        return 0
    rows = read_csv(os.path.join(args.from_run, "per_run.csv"))
    print("metric,seed,rate,c_per,c_tri,c_metric,c_total")
    for row in rows:
        kind = row["metric"]
        params = cost_model.params_from_counters(
            kind, int(row["metric_probes"]), int(row["pair_probes"]),
            float(row["duration_s"]))
        b = cost_model.total_cost(kind, params)
        print("%s,%s,%s,%.9g,%.9g,%.9g,%.9g" %
              (kind, row["seed"], row["rate"], b.c_per, b.c_tri, b.c_metric,
               b.c_total))
    return 0


def _cmd_validate(args):
    cfg = load_config(args.config)
    errors = validate_config(cfg)
    if errors:
        for e in errors:
            print("config error: %s" % e, file=sys.stderr)
        return 2
    print("ok")
    return 0


def _cmd_summarize(args):
    aggregates = read_csv(os.path.join(args.in_dir, "aggregate.csv"))
    print(summarize(aggregates), end="")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "cost": _cmd_cost,
                "validate": _cmd_validate, "summarize": _cmd_summarize}
    try:
        return handlers[args.command](args)
    except (OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

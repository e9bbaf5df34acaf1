"""Experiment sweep: metrics x rates x topologies, CSV emission, summaries.

Each run's randomness derives only from its own (seed, config), never from
scheduling order, so runs may execute in parallel worker processes and the
merged output is still deterministic: rows are sorted by (metric, rate,
topology) after all workers finish.
"""

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor

from .config import serialize_config, validate_config
from .simtime import us
from .simulation import Simulation
from .topology import build_random_topology
from .traffic import pick_flows

PER_RUN_COLUMNS = [
    "metric", "seed", "topology", "rate", "duration_s",
    "throughput_bps", "e2ed_s", "nrl",
    "data_sent", "data_delivered", "routing_packets",
    "metric_probes", "pair_probes", "pair_acks", "full_dumps", "inc_dumps",
    "drops_no_route", "drops_link_loss", "drops_ttl", "drops_in_flight",
    "data_sent_steady", "data_delivered_steady",
    "throughput_steady_bps", "e2ed_steady_s",
]

AGGREGATE_COLUMNS = ["metric", "rate", "runs", "throughput_bps", "e2ed_s", "nrl"]

# Metrics that transmit measurement probes of any sort.
PROBE_BEARING = ("etx", "invetx", "ml", "ett", "md")


def build_topology_for(cfg, topo_index):
    seed = cfg.base_seed + topo_index
    return build_random_topology(
        cfg.nodes, cfg.width, cfg.height, cfg.comm_range, seed,
        p_max=cfg.p_max, r_inner=cfg.r_inner, bandwidth_bps=cfg.bandwidth_bps,
        prop_delay_us=cfg.prop_delay_us, asym_fraction=cfg.asym_fraction,
        asym_multiplier=cfg.asym_multiplier)


def run_single(cfg, metric, rate, topo_index):
    """One (metric, rate, topology) run; returns a per-run CSV row dict."""
    seed = cfg.base_seed + topo_index
    topology = build_topology_for(cfg, topo_index)
    flows = pick_flows(cfg.nodes, cfg.flows, rate, cfg.packet_size, seed,
                       start_us=0, stop_us=us(cfg.duration_s))
    sim = Simulation(topology, metric, cfg, seed, rate)
    stats = sim.run(flows)

    steady_duration = max(cfg.duration_s - cfg.warmup_s, 1e-9)
    delivered_steady = stats.delivered_steady()
    row = {
        "metric": metric,
        "seed": seed,
        "topology": topo_index,
        "rate": rate,
        "duration_s": cfg.duration_s,
        "throughput_bps": stats.throughput_bps(cfg.packet_size, cfg.duration_s),
        "e2ed_s": stats.e2ed_s(rtt_mode=cfg.rtt),
        "nrl": stats.nrl(),
        "data_sent": stats.data_sent,
        "data_delivered": stats.data_delivered,
        "routing_packets": stats.routing_total(),
        "metric_probes": stats.routing["metric_probe"],
        "pair_probes": stats.routing["pair_probe"],
        "pair_acks": stats.routing["pair_ack"],
        "full_dumps": stats.routing["full_dump"],
        "inc_dumps": stats.routing["inc_dump"],
        "drops_no_route": stats.drops.get("no_route", 0),
        "drops_link_loss": stats.drops.get("link_loss", 0),
        "drops_ttl": stats.drops.get("ttl", 0),
        "drops_in_flight": stats.drops.get("in_flight", 0),
        "data_sent_steady": stats.data_sent - stats.data_sent_warm,
        "data_delivered_steady": delivered_steady,
        "throughput_steady_bps":
            delivered_steady * cfg.packet_size * 8.0 / steady_duration,
        "e2ed_steady_s": stats.e2ed_s(rtt_mode=cfg.rtt, steady=True),
    }
    return row


def _worker(args):
    cfg, metric, rate, topo_index = args
    return run_single(cfg, metric, rate, topo_index)


def run_scenario(cfg, out_dir=None, workers=1, log=None):
    """Execute every (metric, rate, topology) combination of the config.

    Returns (per_run_rows, aggregate_rows); also writes per_run.csv and
    aggregate.csv when out_dir is given.
    """
    errors = validate_config(cfg)
    if errors:
        raise ValueError("invalid config: " + "; ".join(errors))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "config.txt"), "w", encoding="utf-8") as fh:
            fh.write(serialize_config(cfg))

    combos = [(cfg, metric, rate, t)
              for metric in cfg.metric_list()
              for rate in cfg.rate_list()
              for t in range(cfg.topologies)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_worker, combos, chunksize=1))
    else:
        rows = []
        for combo in combos:
            rows.append(_worker(combo))
            if log:
                r = rows[-1]
                log("done metric=%s rate=%g topology=%s" %
                    (r["metric"], r["rate"], r["topology"]))
    rows.sort(key=lambda r: (r["metric"], r["rate"], r["topology"]))
    aggregates = aggregate_rows(rows)
    if out_dir is not None:
        write_csv(os.path.join(out_dir, "per_run.csv"), PER_RUN_COLUMNS, rows)
        write_csv(os.path.join(out_dir, "aggregate.csv"), AGGREGATE_COLUMNS,
                  aggregates)
    return rows, aggregates


def aggregate_rows(rows):
    """Mean over topologies for each (metric, rate)."""
    groups = {}
    for row in rows:
        groups.setdefault((row["metric"], row["rate"]), []).append(row)
    out = []
    for (metric, rate) in sorted(groups):
        grp = groups[(metric, rate)]
        out.append({
            "metric": metric,
            "rate": rate,
            "runs": len(grp),
            "throughput_bps": _mean(grp, "throughput_bps"),
            "e2ed_s": _mean(grp, "e2ed_s"),
            "nrl": _mean(grp, "nrl"),
        })
    return out


def _mean(rows, key):
    vals = [r[key] for r in rows if r[key] is not None and r[key] != ""]
    if not vals:
        return None
    return sum(float(v) for v in vals) / len(vals)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.9g" % value
    return str(value)


def write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def summarize(aggregates):
    """Per performance parameter and rate, order metrics best to worst.

    Also flags whether the expected qualitative orderings hold: ETT highest
    and MD lowest (among probe-bearing metrics) on routing load, and InvETX
    at or above ETX and MD on throughput at the highest rate.
    """
    if not aggregates:
        raise ValueError("no aggregate rows to summarize")
    by_rate = {}
    for row in aggregates:
        by_rate.setdefault(float(row["rate"]), {})[row["metric"]] = row
    out = io.StringIO()
    params = (("throughput_bps", True), ("e2ed_s", False), ("nrl", False))
    for key, high_is_good in params:
        out.write("%s (best -> worst):\n" % key)
        for rate in sorted(by_rate):
            entries = [(m, float(r[key])) for m, r in by_rate[rate].items()
                       if r[key] not in (None, "")]
            entries.sort(key=lambda e: e[1], reverse=high_is_good)
            ranking = " > ".join("%s=%.4g" % e for e in entries)
            out.write("  rate %g: %s\n" % (rate, ranking))
    flags = ordering_flags(aggregates)
    out.write("expected orderings:\n")
    for name in sorted(flags):
        out.write("  %s: %s\n" % (name, "hold" if flags[name] else "VIOLATED"))
    return out.getvalue()


def ordering_flags(aggregates):
    """Check the expected qualitative orderings on the aggregate means."""
    by_rate = {}
    for row in aggregates:
        by_rate.setdefault(float(row["rate"]), {})[row["metric"]] = row

    def nrl_of(rate, metric):
        row = by_rate[rate].get(metric)
        if row is None or row["nrl"] in (None, ""):
            return None
        return float(row["nrl"])

    flags = {}
    ett_highest = []
    md_lowest = []
    for rate, metrics_at in by_rate.items():
        nrls = {m: nrl_of(rate, m) for m in metrics_at if m in PROBE_BEARING}
        nrls = {m: v for m, v in nrls.items() if v is not None}
        if "ett" in nrls and len(nrls) > 1:
            ett_highest.append(nrls["ett"] == max(nrls.values()))
        if "md" in nrls and len(nrls) > 1:
            md_lowest.append(nrls["md"] == min(nrls.values()))
    if ett_highest:
        flags["nrl_ett_highest"] = all(ett_highest)
    if md_lowest:
        flags["nrl_md_lowest"] = all(md_lowest)

    top_rate = max(by_rate)
    tp = {m: float(r["throughput_bps"]) for m, r in by_rate[top_rate].items()
          if r["throughput_bps"] not in (None, "")}
    if "invetx" in tp:
        others = [tp[m] for m in ("etx", "md") if m in tp]
        if others:
            flags["throughput_invetx_leads"] = all(tp["invetx"] >= v for v in others)
    return flags

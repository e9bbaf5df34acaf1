"""Scenario configuration: flat key=value text files with full-scale default values.

The format is line oriented, diff friendly and parseable from any language:
`key = value`, `#` comments, blank lines ignored.  Serializing the defaults
and re-parsing them yields an identical config.
"""

import dataclasses
from dataclasses import dataclass

from .metrics import KINDS


@dataclass
class ScenarioConfig:
    # topology
    nodes: int = 50
    width: float = 1000.0
    height: float = 1000.0
    comm_range: float = 250.0
    p_max: float = 1.0
    r_inner: float = 125.0
    bandwidth_bps: int = 2_000_000
    prop_delay_us: int = 1
    asym_fraction: float = 0.0
    asym_multiplier: float = 0.3
    # sweep
    metrics: str = "hop,etx,invetx,ett,ml,md"
    rates: str = "1,2,3,4,5,6,7,8,9,10"
    topologies: int = 5
    base_seed: int = 1
    duration_s: float = 900.0
    # probing and routing
    probe_period_s: float = 1.0
    window_s: float = 10.0
    pair_interval_s: float = 60.0
    full_dump_period_s: float = 15.0
    dead_link_threshold: float = 0.1
    liveness_timeout_s: float = 45.0
    route_candidates: int = 4
    # traffic
    flows: int = 20
    packet_size: int = 640
    warmup_s: float = 30.0
    rtt: bool = False
    # data plane
    retx_limit: int = 3
    ttl: int = 32
    # per-metric route computation delay (seconds)
    comp_delay_hop_s: float = 0.001
    comp_delay_invetx_s: float = 0.01
    comp_delay_md_s: float = 0.05
    comp_delay_etx_s: float = 0.25
    comp_delay_ml_s: float = 0.25
    comp_delay_ett_s: float = 0.5
    # output
    out_dir: str = "results"

    def metric_list(self):
        return [m.strip() for m in self.metrics.split(",") if m.strip()]

    def rate_list(self):
        return [float(r) for r in self.rates.split(",") if r.strip()]


_FIELDS = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}


def _parse_value(name, text):
    kind = _FIELDS[name]
    text = text.strip()
    if kind in (bool, "bool"):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError("bad boolean for %s: %r" % (name, text))
    if kind in (int, "int"):
        return int(text)
    if kind in (float, "float"):
        return float(text)
    return text


def parse_config(text):
    cfg = ScenarioConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError("line %d: expected key = value" % lineno)
        key, value = line.split("=", 1)
        key = key.strip()
        if key not in _FIELDS:
            raise ValueError("line %d: unknown key %r" % (lineno, key))
        setattr(cfg, key, _parse_value(key, value))
    return cfg


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(cfg):
    lines = []
    for f in dataclasses.fields(ScenarioConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append("%s = %s" % (f.name, value))
    return "\n".join(lines) + "\n"


def validate_config(cfg):
    """Return a list of violated-invariant messages; empty means valid."""
    errors = []
    if cfg.nodes < 2:
        errors.append("nodes must be >= 2")
    if cfg.width <= 0 or cfg.height <= 0:
        errors.append("area dimensions must be positive")
    if cfg.comm_range <= 0:
        errors.append("comm_range must be positive")
    if not 0.0 <= cfg.p_max <= 1.0:
        errors.append("p_max must be in [0, 1]")
    if not 0.0 <= cfg.asym_fraction <= 1.0:
        errors.append("asym_fraction must be in [0, 1]")
    if not 0.0 <= cfg.asym_multiplier <= 1.0:
        errors.append("asym_multiplier must be in [0, 1]")
    if cfg.bandwidth_bps <= 0:
        errors.append("bandwidth_bps must be positive")
    unknown = [m for m in cfg.metric_list() if m not in KINDS]
    if unknown:
        errors.append("unknown metrics: %s" % ",".join(unknown))
    if not cfg.metric_list():
        errors.append("metrics must name at least one metric")
    try:
        rates = cfg.rate_list()
    except ValueError:
        errors.append("rates must be a comma list of numbers")
        rates = []
    if any(r < 1 for r in rates):
        errors.append("rate must be >= 1")
    if not rates:
        errors.append("rates must name at least one rate")
    if cfg.probe_period_s <= 0:
        errors.append("probe_period_s must be positive")
    if cfg.window_s < cfg.probe_period_s:
        errors.append("window_s must be >= probe_period_s")
    if cfg.pair_interval_s <= 0:
        errors.append("pair_interval_s must be positive")
    if cfg.full_dump_period_s <= 0:
        errors.append("full_dump_period_s must be positive")
    if not 0.0 <= cfg.dead_link_threshold <= 1.0:
        errors.append("dead_link_threshold must be in [0, 1]")
    if cfg.flows < 1:
        errors.append("flows must be >= 1")
    if cfg.flows > cfg.nodes * (cfg.nodes - 1):
        errors.append("flows exceeds the number of ordered node pairs")
    if cfg.packet_size <= 0:
        errors.append("packet_size must be positive")
    if cfg.duration_s <= 0:
        errors.append("duration_s must be positive")
    if cfg.topologies < 1:
        errors.append("topologies must be >= 1")
    if cfg.retx_limit < 0:
        errors.append("retx_limit must be >= 0")
    if cfg.ttl < 1:
        errors.append("ttl must be >= 1")
    if cfg.route_candidates < 0:
        errors.append("route_candidates must be >= 0")
    if cfg.warmup_s < 0:
        errors.append("warmup_s must be >= 0")
    return errors

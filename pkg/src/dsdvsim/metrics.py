"""Link-quality metric computations and probe measurement state.

Per-link values, path aggregation and the comparison direction for all six
metrics, plus the sliding-window delivery-ratio estimator and the packet-pair
dispersion helpers.  Everything here is stateless or owned by a single node,
so test oracles can call the pure functions directly.
"""

import math
from collections import deque
from dataclasses import dataclass

INF = math.inf

KINDS = ("hop", "etx", "invetx", "ett", "ml", "md")

# Metrics that measure delivery ratios via periodic broadcast probes.
PROBE_KINDS = ("etx", "invetx", "ml", "ett")
# Metrics that run packet-pair cycles.
PAIR_KINDS = ("ett", "md")

PAIR_SMALL_BYTES = 137
PAIR_LARGE_BYTES = 1137


@dataclass(frozen=True)
class MetricValue:
    kind: str
    value: float


class MetricSpace:
    """Aggregation rule and comparison direction for one metric kind.

    Unusable/broken sentinels: +inf for minimized metrics, 0 for the
    multiplicative maximized one (a dead link zeroes the success product) and
    -inf for the additive maximized one, whose identity is legitimately 0.
    A link is unusable when its own value already says "cannot deliver":
    zero success for maximized kinds, +inf for minimized ones.
    """

    def __init__(self, kind, maximize, multiplicative):
        self.kind = kind
        self.maximize = maximize
        self.multiplicative = multiplicative
        self.identity = 1.0 if multiplicative else 0.0
        if maximize:
            self.worst = 0.0 if multiplicative else -INF
        else:
            self.worst = INF

    def usable(self, value):
        if self.maximize:
            return value > 0.0 if self.multiplicative else value > -INF
        return value < INF

    def link_usable(self, value):
        return value > 0.0 if self.maximize else value < INF

    def combine(self, link_value, path_value):
        """Extend a path value by one link; unusable on either side stays unusable."""
        if not self.link_usable(link_value) or not self.usable(path_value):
            return self.worst
        if self.multiplicative:
            return link_value * path_value
        return link_value + path_value

    def better(self, a, b):
        return a > b if self.maximize else a < b


SPACES = {
    "hop": MetricSpace("hop", maximize=False, multiplicative=False),
    "etx": MetricSpace("etx", maximize=False, multiplicative=False),
    "invetx": MetricSpace("invetx", maximize=True, multiplicative=False),
    "ett": MetricSpace("ett", maximize=False, multiplicative=False),
    "ml": MetricSpace("ml", maximize=True, multiplicative=True),
    "md": MetricSpace("md", maximize=False, multiplicative=False),
}


def etx_link(d_f, d_r):
    """Expected transmissions for one link; +inf when either ratio is zero."""
    p = d_f * d_r
    if p <= 0.0:
        return INF
    return 1.0 / p


def invetx_link(d_f, d_r):
    return d_f * d_r


def ml_link(d_f, d_r):
    return d_f * d_r


def ett_link(etx_value, frame_bytes, bandwidth_bps):
    """Transmission-time-scaled ETX, in seconds."""
    if etx_value == INF:
        return INF
    return etx_value * (frame_bytes * 8.0 / bandwidth_bps)


def md_dispersion(t_recv1_us, t_recv2_us):
    """Packet-pair dispersion in microseconds; None discards reordered samples.

    Both timestamps come from the receiver clock, so any constant clock
    offset cancels exactly.
    """
    disp = t_recv2_us - t_recv1_us
    if disp <= 0:
        return None
    return disp


def estimate_bandwidth(samples_us, large_bytes=PAIR_LARGE_BYTES):
    """Large-probe size over the minimum dispersion sample, in bits/second."""
    if not samples_us:
        return None
    return large_bytes * 8.0 / (min(samples_us) / 1_000_000.0)


def path_metric(kind, link_values):
    """Aggregate per-link values into a path value under the kind's rule."""
    space = SPACES[kind]
    total = space.identity
    for v in link_values:
        total = space.combine(v, total)
    return total


class ProbeWindow:
    """Reception timestamps from one neighbor over a sliding window."""

    __slots__ = ("window_us", "period_us", "stamps")

    def __init__(self, window_us, period_us):
        self.window_us = window_us
        self.period_us = period_us
        self.stamps = deque()

    def add(self, t_us):
        self.stamps.append(t_us)

    def count(self, now_us):
        """Probes received in (now - w, now]."""
        stamps = self.stamps
        floor = now_us - self.window_us
        while stamps and stamps[0] <= floor:
            stamps.popleft()
        return len(stamps)

    def ratio(self, now_us):
        """Received count over the expected count w/period, clamped to [0, 1]."""
        expected = self.window_us / self.period_us
        if expected <= 0:
            return 0.0
        return min(self.count(now_us) / expected, 1.0)

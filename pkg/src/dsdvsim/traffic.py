"""CBR traffic selection and per-run statistics.

RunStats holds raw counters; throughput, end-to-end delay and normalized
routing load are derived quantities computed after the run.  Packets sent
during the warm-up window are flagged so the CSV can carry both the headline
(all packets) and the steady-state view.
"""

import random
from collections import Counter
from dataclasses import dataclass

ROUTING_CATEGORIES = ("metric_probe", "pair_probe", "pair_ack",
                      "full_dump", "inc_dump")


@dataclass(frozen=True)
class CbrFlow:
    src: int
    dst: int
    rate: float          # packets per second
    packet_size: int     # bytes
    start_us: int
    stop_us: int


def pick_flows(n_nodes, n_pairs, rate, packet_size, seed, start_us, stop_us):
    """Draw distinct ordered source-destination pairs, deterministic per seed."""
    if n_pairs > n_nodes * (n_nodes - 1):
        raise ValueError("more flows than ordered node pairs")
    rng = random.Random("%s/flows" % seed)
    pairs = [(a, b) for a in range(n_nodes) for b in range(n_nodes) if a != b]
    chosen = rng.sample(pairs, n_pairs)
    return [CbrFlow(src, dst, rate, packet_size, start_us, stop_us)
            for src, dst in chosen]


class RunStats:
    def __init__(self, warmup_us=0):
        self.warmup_us = warmup_us
        self.data_sent = 0
        self.data_sent_warm = 0          # sent during warm-up
        self.data_delivered = 0
        self.drops = Counter()
        self.routing = dict.fromkeys(ROUTING_CATEGORIES, 0)
        self.delays = []                 # (uid, sent_us, delivered_us, warm)
        self.rtt = []                    # (uid, sent_us, echoed_us)
        self._outstanding = {}           # uid -> (sent_us, warm)

    # -- recording ---------------------------------------------------------

    def count_routing(self, category, n=1):
        self.routing[category] += n

    def record_sent(self, uid, now_us):
        warm = now_us < self.warmup_us
        self.data_sent += 1
        if warm:
            self.data_sent_warm += 1
        self._outstanding[uid] = (now_us, warm)

    def record_delivered(self, uid, now_us):
        sent_us, warm = self._outstanding.pop(uid)
        self.data_delivered += 1
        self.delays.append((uid, sent_us, now_us, warm))

    def record_drop(self, uid, cause):
        self._outstanding.pop(uid)
        self.drops[cause] += 1

    def record_rtt(self, uid, sent_us, now_us):
        self.rtt.append((uid, sent_us, now_us))

    def finalize(self):
        """Account packets still in flight at the end of the run as drops."""
        for _uid in list(self._outstanding):
            self.record_drop(_uid, "in_flight")

    # -- derived quantities ------------------------------------------------

    def routing_total(self):
        return sum(self.routing.values())

    def throughput_bps(self, packet_size, duration_s):
        if duration_s <= 0:
            raise ValueError("duration must be positive")
        return self.data_delivered * packet_size * 8.0 / duration_s

    def e2ed_s(self, rtt_mode=False, steady=False):
        """Mean delay of delivered packets, or None when nothing was delivered."""
        if rtt_mode:
            vals = [(t1 - t0) for _u, t0, t1 in self.rtt]
        else:
            vals = [(t1 - t0) for _u, t0, t1, warm in self.delays
                    if not (steady and warm)]
        if not vals:
            return None
        return sum(vals) / len(vals) / 1_000_000.0

    def nrl(self):
        """Routing packets transmitted per delivered data packet."""
        if self.data_delivered < 1:
            return None
        return self.routing_total() / self.data_delivered

    def delivered_steady(self):
        return sum(1 for _u, _t0, _t1, warm in self.delays if not warm)

    def check_conservation(self):
        assert self.data_sent == self.data_delivered + sum(self.drops.values()), \
            "data packet conservation violated"
        assert self.routing_total() == sum(self.routing[c] for c in ROUTING_CATEGORIES)

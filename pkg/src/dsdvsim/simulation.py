"""Protocol nodes and the per-run simulation wiring.

One Simulation owns one Engine, one Topology, one metric kind and one
RunStats; nothing is shared between runs, so independent runs can execute in
parallel processes with bit-identical results.

Probe machinery per metric kind:
  * etx / invetx / ml / ett broadcast a 1 Hz metric probe carrying, per
    neighbor, the count of that neighbor's probes received in the window, so
    every receiver learns its own forward delivery ratio.
  * ett and md additionally run packet-pair cycles (137 B + 1137 B
    back-to-back).  For ett the receiver acknowledges the dispersion and the
    sender keeps the last 10 samples; for md the receiver keeps the samples
    and piggybacks the minimum on its route updates, so md stays forward-only
    on the probing path.
  * hop sends no probes; liveness comes from hearing route updates.
"""

from collections import deque

from . import metrics
from .dsdv import RoutingTable
from .engine import Engine
from .simtime import us
from .topology import Topology  # noqa: F401  (re-exported for callers)
from .traffic import RunStats

PROBE_BASE_BYTES = 32
PROBE_ENTRY_BYTES = 8
UPDATE_BASE_BYTES = 64
UPDATE_ENTRY_BYTES = 20
PAIR_OBS_BYTES = 8
PAIR_ACK_BYTES = 64

# Packet kind -> routing-load category (data is not routing load).
ROUTING_KIND = {
    "metric_probe": "metric_probe",
    "pair_small": "pair_probe",
    "pair_large": "pair_probe",
    "pair_ack": "pair_ack",
    "full_dump": "full_dump",
    "inc_dump": "inc_dump",
}


class Packet:
    __slots__ = ("kind", "size", "src", "dst", "payload", "created_us",
                 "uid", "hops_left")

    def __init__(self, kind, size, src, dst, payload, created_us, uid,
                 hops_left=0):
        self.kind = kind
        self.size = size
        self.src = src
        self.dst = dst
        self.payload = payload
        self.created_us = created_us
        self.uid = uid
        self.hops_left = hops_left


class _NeighborState:
    __slots__ = ("window", "df_ratio", "df_at_us", "pair_samples", "md_obs",
                 "md_fwd_us", "md_fwd_at_us", "last_heard_us", "pending_pair")

    def __init__(self, window_us, period_us):
        self.window = metrics.ProbeWindow(window_us, period_us)
        self.df_ratio = 0.0
        self.df_at_us = None
        self.pair_samples = deque(maxlen=10)   # sender side (ett)
        self.md_obs = deque(maxlen=10)         # receiver side (md)
        self.md_fwd_us = None                  # piggybacked back by the neighbor
        self.md_fwd_at_us = None
        self.last_heard_us = None
        self.pending_pair = None               # (pair uid, first arrival)


class Node:
    def __init__(self, sim, nid):
        self.sim = sim
        self.id = nid
        self.metric = sim.metric
        self.table = RoutingTable(nid, sim.metric, cap=sim.route_candidates)
        self.nbr = {}  # sender id -> _NeighborState
        self.uses_probes = sim.metric in metrics.PROBE_KINDS
        self.uses_pairs = sim.metric in metrics.PAIR_KINDS
        self.last_trigger_us = -10**12
        self._nbr_sorted = []  # (id, state) pairs in id order

    # -- lifecycle ---------------------------------------------------------

    def start(self):
        sim = self.sim
        ph = sim.engine.stream("phase/%d" % self.id)
        if self.uses_probes:
            sim.engine.schedule(round(ph.uniform(0.05, 0.95) * sim.probe_period_us),
                                self._tick_probe)
        sim.engine.schedule(round(ph.uniform(0.05, 0.95) * sim.dump_period_us),
                            self._tick_dump)
        if self.uses_pairs:
            first = sim.dump_period_us + round(ph.uniform(0.05, 0.95) * us(5.0))
            sim.engine.schedule(first, self._tick_pair)
        sim.engine.schedule(round(ph.uniform(0.05, 0.95) * us(1.0)),
                            self._tick_link_check)

    def _state(self, sender):
        st = self.nbr.get(sender)
        if st is None:
            st = self.nbr[sender] = _NeighborState(self.sim.window_us,
                                                   self.sim.probe_period_us)
            self._nbr_sorted = sorted(self.nbr.items())
        return st

    # -- link metric toward a neighbor --------------------------------------

    def link_metric(self, j):
        sim = self.sim
        now = sim.engine.now
        st = self.nbr.get(j)
        space = self.table.space
        if st is None:
            return space.worst
        if self.metric == "hop":
            if st.last_heard_us is not None and now - st.last_heard_us <= sim.liveness_us:
                return 1.0
            return space.worst
        if self.metric == "md":
            if st.md_fwd_us is not None and now - st.md_fwd_at_us <= sim.liveness_us:
                return st.md_fwd_us / 1_000_000.0
            return space.worst
        d_r = st.window.ratio(now)
        d_f = st.df_ratio
        if st.df_at_us is None or now - st.df_at_us > 2 * sim.window_us:
            d_f = 0.0  # stale piggyback: neighbor presumed unreachable forward
        # a ratio under the dead-link floor means the link counts as broken,
        # so it must not be usable for route selection either
        if d_r < sim.dead_link_threshold:
            d_r = 0.0
        if d_f < sim.dead_link_threshold:
            d_f = 0.0
        if self.metric == "etx":
            return metrics.etx_link(d_f, d_r)
        if self.metric in ("invetx", "ml"):
            return d_f * d_r
        # ett
        etx = metrics.etx_link(d_f, d_r)
        bw = metrics.estimate_bandwidth(st.pair_samples)
        if bw is None:
            bw = sim.bandwidth_bps  # nominal prior until a pair cycle completes
        return metrics.ett_link(etx, sim.packet_size, bw)

    # -- timers --------------------------------------------------------------

    def _tick_probe(self):
        sim = self.sim
        now = sim.engine.now
        payload = {}
        for j, st in self._nbr_sorted:
            c = st.window.count(now)
            if c:
                payload[j] = c
        size = PROBE_BASE_BYTES + PROBE_ENTRY_BYTES * len(payload)
        pkt = Packet("metric_probe", size, self.id, None, payload, now,
                     sim.next_uid())
        sim.broadcast(pkt)
        sim.engine.schedule_in(sim.probe_period_us, self._tick_probe)

    def _tick_dump(self):
        sim = self.sim
        now = sim.engine.now
        self.table.bump_own_seq()
        entries = self.table.dump_entries()
        payload = {"entries": entries}
        size = UPDATE_BASE_BYTES + UPDATE_ENTRY_BYTES * len(entries)
        if self.metric == "md":
            obs = {}
            for j, st in self._nbr_sorted:
                if st.md_obs:
                    obs[j] = min(st.md_obs)
            payload["pair_obs"] = obs
            size += PAIR_OBS_BYTES * len(obs)
        pkt = Packet("full_dump", size, self.id, None, payload, now,
                     sim.next_uid())
        sim.broadcast(pkt)
        sim.engine.schedule_in(sim.dump_period_us, self._tick_dump)

    def _tick_pair(self):
        sim = self.sim
        now = sim.engine.now
        small_tx = sim.tx_us(metrics.PAIR_SMALL_BYTES)
        for j, st in self._nbr_sorted:
            if st.last_heard_us is None or now - st.last_heard_us > sim.liveness_us:
                continue
            pair_uid = sim.next_uid()
            small = Packet("pair_small", metrics.PAIR_SMALL_BYTES, self.id, j,
                           {"pair": pair_uid}, now, sim.next_uid())
            large = Packet("pair_large", metrics.PAIR_LARGE_BYTES, self.id, j,
                           {"pair": pair_uid}, now, sim.next_uid())
            sim.unicast(small, j, self.id)
            sim.unicast(large, j, self.id, extra_delay_us=small_tx)  # back-to-back
        sim.engine.schedule_in(sim.pair_interval_us, self._tick_pair)

    def _tick_link_check(self):
        sim = self.sim
        now = sim.engine.now
        active = self.table.active_next_hops()
        for j, st in self._nbr_sorted:
            if j not in active:
                continue
            if self.uses_probes:
                dead = (now >= sim.window_us
                        and st.window.ratio(now) < sim.dead_link_threshold)
            else:
                dead = (st.last_heard_us is None
                        or now - st.last_heard_us > sim.liveness_us)
            if not dead:
                continue
            changed = self.table.mark_broken_via(j, now)
            if changed and now - self.last_trigger_us >= us(1.0):
                entries = self.table.dump_entries(dests=changed)
                size = UPDATE_BASE_BYTES + UPDATE_ENTRY_BYTES * len(entries)
                pkt = Packet("inc_dump", size, self.id, None,
                             {"entries": entries}, now, sim.next_uid())
                sim.broadcast(pkt)
                self.last_trigger_us = now
        sim.engine.schedule_in(us(1.0), self._tick_link_check)

    # -- packet reception ----------------------------------------------------

    def receive(self, pkt, frm):
        kind = pkt.kind
        if kind == "data":
            self.handle_data(pkt)
        elif kind == "metric_probe":
            self._on_probe(pkt, frm)
        elif kind in ("full_dump", "inc_dump"):
            self._on_update(pkt, frm)
        elif kind == "pair_small":
            self._on_pair_small(pkt, frm)
        elif kind == "pair_large":
            self._on_pair_large(pkt, frm)
        elif kind == "pair_ack":
            self._on_pair_ack(pkt, frm)

    def _on_probe(self, pkt, frm):
        now = self.sim.engine.now
        st = self._state(frm)
        st.window.add(now)
        st.last_heard_us = now
        count = pkt.payload.get(self.id)
        if count is not None:
            st.df_ratio = min(count / self.sim.expected_probes, 1.0)
            st.df_at_us = now

    def _on_update(self, pkt, frm):
        sim = self.sim
        now = sim.engine.now
        st = self._state(frm)
        st.last_heard_us = now
        if self.metric == "md":
            obs = pkt.payload.get("pair_obs")
            if obs is not None:
                mine = obs.get(self.id)
                if mine is not None:
                    st.md_fwd_us = mine
                    st.md_fwd_at_us = now
        # Route recomputation is charged the per-metric processing delay
        # before the new table takes effect.
        sim.engine.schedule_in(sim.comp_delay_us, self._apply_update,
                               pkt.payload["entries"], frm)

    def _apply_update(self, entries, frm):
        self.table.process_update(frm, entries, self.link_metric(frm),
                                  self.sim.engine.now)

    def _on_pair_small(self, pkt, frm):
        st = self._state(frm)
        st.pending_pair = (pkt.payload["pair"], self.sim.engine.now)

    def _on_pair_large(self, pkt, frm):
        sim = self.sim
        now = sim.engine.now
        st = self._state(frm)
        if st.pending_pair is None or st.pending_pair[0] != pkt.payload["pair"]:
            return
        disp = metrics.md_dispersion(st.pending_pair[1], now)
        st.pending_pair = None
        if disp is None:
            return
        if self.metric == "md":
            st.md_obs.append(disp)
        else:  # ett: acknowledge the dispersion back to the sender
            ack = Packet("pair_ack", PAIR_ACK_BYTES, self.id, frm,
                         {"disp": disp}, now, sim.next_uid())
            sim.unicast(ack, frm, self.id)

    def _on_pair_ack(self, pkt, frm):
        self._state(frm).pair_samples.append(pkt.payload["disp"])

    # -- data plane ----------------------------------------------------------

    def handle_data(self, pkt):
        sim = self.sim
        now = sim.engine.now
        echo_of = pkt.payload.get("echo")
        if pkt.dst == self.id:
            if echo_of is not None:
                sim.stats.record_rtt(echo_of, pkt.payload["t0"], now)
            else:
                sim.stats.record_delivered(pkt.uid, now)
                sim.trace_event("deliver", pkt, self.id)
                if sim.rtt_mode:
                    reply = Packet("data", pkt.size, self.id, pkt.src,
                                   {"echo": pkt.uid, "t0": pkt.created_us},
                                   now, sim.next_uid(), hops_left=sim.ttl)
                    self.handle_data(reply)
            return
        if pkt.hops_left <= 0:
            self._drop(pkt, "ttl", echo_of)
            return
        nh = self.table.next_hop(pkt.dst)
        if nh is None or nh == self.id:
            self._drop(pkt, "no_route", echo_of)
            return
        pkt.hops_left -= 1
        if not sim.unicast(pkt, nh, self.id, arq=True):
            self._drop(pkt, "link_loss", echo_of)

    def _drop(self, pkt, cause, echo_of):
        if echo_of is None:
            self.sim.stats.record_drop(pkt.uid, cause)
            self.sim.trace_event("drop:%s" % cause, pkt, self.id)


class Simulation:
    """One deterministic run: (topology, metric, rate, seed) -> RunStats."""

    def __init__(self, topology, metric, cfg, seed, rate, trace=None):
        if metric not in metrics.KINDS:
            raise ValueError("unknown metric kind %r" % metric)
        self.topology = topology
        self.metric = metric
        self.cfg = cfg
        self.seed = seed
        self.rate = rate
        self.engine = Engine(seed)
        self.trace = trace

        self.probe_period_us = us(cfg.probe_period_s)
        self.window_us = us(cfg.window_s)
        self.expected_probes = self.window_us / self.probe_period_us
        self.pair_interval_us = us(cfg.pair_interval_s)
        self.dump_period_us = us(cfg.full_dump_period_s)
        self.liveness_us = us(cfg.liveness_timeout_s)
        self.comp_delay_us = us(getattr(cfg, "comp_delay_%s_s" % metric))
        self.dead_link_threshold = cfg.dead_link_threshold
        self.packet_size = cfg.packet_size
        self.bandwidth_bps = topology.link_model.bandwidth_bps
        self.prop_us = topology.link_model.prop_delay_us
        self.retx_limit = cfg.retx_limit
        self.ttl = cfg.ttl
        self.route_candidates = cfg.route_candidates
        self.rtt_mode = cfg.rtt
        self.duration_us = us(cfg.duration_s)

        self.stats = RunStats(warmup_us=us(cfg.warmup_s))
        self.nodes = [Node(self, i) for i in range(topology.n)]
        self._uid = 0
        self._loss_rng = [self.engine.stream("loss/%d" % i)
                          for i in range(topology.n)]
        self._reach = [[(j, topology.delivery_probability(i, j))
                        for j in topology.neighbors(i)]
                       for i in range(topology.n)]
        self._p = [dict(pairs) for pairs in self._reach]
        self._tx_cache = {}

    def next_uid(self):
        self._uid += 1
        return self._uid

    def tx_us(self, size_bytes):
        tx = self._tx_cache.get(size_bytes)
        if tx is None:
            tx = round(size_bytes * 8 * 1_000_000 / self.bandwidth_bps)
            self._tx_cache[size_bytes] = tx
        return tx

    def trace_event(self, outcome, pkt, where):
        if self.trace is not None:
            self.trace.append((self.engine.now, pkt.kind, pkt.src, pkt.dst,
                               pkt.uid, where, outcome))

    # -- delivery service ----------------------------------------------------

    def broadcast(self, pkt):
        cat = ROUTING_KIND.get(pkt.kind)
        if cat:
            self.stats.count_routing(cat)
        src = pkt.src
        random = self._loss_rng[src].random
        delay = self.tx_us(pkt.size) + self.prop_us
        nodes = self.nodes
        schedule_in = self.engine.schedule_in
        for r, p in self._reach[src]:
            if random() < p:
                schedule_in(delay, nodes[r].receive, pkt, src)

    def unicast(self, pkt, to, sender, arq=False, extra_delay_us=0):
        """Single-receiver transmission; returns True when a copy will arrive.

        `sender` is the transmitting node (for forwarded data it differs from
        pkt.src).  With arq=True the per-hop retransmission limit applies and
        each attempt adds one transmission time; probes and acks get one shot.
        """
        cat = ROUTING_KIND.get(pkt.kind)
        if cat:
            self.stats.count_routing(cat)
        p = self._p[sender].get(to)
        if p is None:
            p = self.topology.delivery_probability(sender, to)
        random = self._loss_rng[sender].random
        tx = self.tx_us(pkt.size)
        attempts = 1 + (self.retx_limit if arq else 0)
        for k in range(1, attempts + 1):
            if random() < p:
                self.engine.schedule_in(extra_delay_us + k * tx + self.prop_us,
                                        self.nodes[to].receive, pkt, sender)
                return True
        return False

    # -- run -----------------------------------------------------------------

    def run(self, flows=()):
        for node in self.nodes:
            node.start()
        for i, flow in enumerate(flows):
            period_us = round(1_000_000 / flow.rate)
            frng = self.engine.stream("flow/%d" % i)
            first = flow.start_us + round(frng.uniform(0.05, 0.95) * period_us)
            self.engine.schedule(first, self._inject, flow, period_us)
        self.engine.run_until(self.duration_us)
        self.stats.finalize()
        self.stats.check_conservation()
        return self.stats

    def _inject(self, flow, period_us):
        now = self.engine.now
        pkt = Packet("data", flow.packet_size, flow.src, flow.dst, {}, now,
                     self.next_uid(), hops_left=self.ttl)
        self.stats.record_sent(pkt.uid, now)
        self._dispatch_data(pkt, flow.src)
        nxt = now + period_us
        if nxt < flow.stop_us:
            self.engine.schedule(nxt, self._inject, flow, period_us)

    def _dispatch_data(self, pkt, at_node):
        self.nodes[at_node].handle_data(pkt)

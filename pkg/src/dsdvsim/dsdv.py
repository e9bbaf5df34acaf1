"""DSDV routing state: sequence-numbered tables and metric-aware selection.

Advertisements carry (dest, seq, path value, path) tuples.  The path is used
only to reject candidates that would route through the receiving node; this
keeps maximize-direction metrics from inflating around cycles, which plain
next-hop distance vectors cannot detect.

For each destination a node keeps the candidates of the newest sequence
number it has seen (one per advertised path, capped).  The selected route is
the best candidate under the metric's comparator, with ties kept on the
incumbent.  Marking a route broken bumps its sequence number to odd and sets
the metric to the worst value, exactly as in classic DSDV.
"""

from .metrics import SPACES


class Candidate:
    __slots__ = ("seq", "value", "path", "via", "installed_at")

    def __init__(self, seq, value, path, via, installed_at):
        self.seq = seq
        self.value = value
        self.path = path
        self.via = via
        self.installed_at = installed_at


class RoutingTable:
    def __init__(self, node, kind, cap=0, advertise_all=False):
        self.node = node
        self.kind = kind
        self.space = SPACES[kind]
        self.cap = cap                      # stored candidates per dest; 0 = unlimited
        self.advertise_all = advertise_all  # advertise alternates, not just the selection
        self.own_seq = 0
        self.cands = {}     # dest -> list[Candidate], all sharing the newest seq
        self.selected = {}  # dest -> Candidate (via=None when broken)
        self._active = None  # cached active_next_hops(), dropped on any change

    def bump_own_seq(self):
        self.own_seq += 2

    def next_hop(self, dest):
        """Next hop of the valid entry, or None; a node routes to itself directly."""
        if dest == self.node:
            return self.node
        sel = self.selected.get(dest)
        if sel is None or not self.space.usable(sel.value):
            return None
        return sel.via

    def route_cost(self, dest):
        if dest == self.node:
            return self.space.identity
        sel = self.selected.get(dest)
        if sel is None:
            return self.space.worst
        return sel.value

    def active_next_hops(self):
        if self._active is None:
            space_usable = self.space.usable
            self._active = {sel.via for sel in self.selected.values()
                            if sel.via is not None and space_usable(sel.value)}
        return self._active

    def _entry_for(self, dest):
        if dest == self.node:
            return (self.node, self.own_seq, self.space.identity, (self.node,))
        sel = self.selected[dest]
        return (dest, sel.seq, sel.value, sel.path)

    def dump_entries(self, dests=None):
        """Advertised entries: own identity route plus one (or all) per destination."""
        entries = [self._entry_for(self.node)]
        for dest in sorted(self.selected if dests is None else dests):
            if dest == self.node:
                continue
            entries.append(self._entry_for(dest))
            if self.advertise_all:
                sel = self.selected[dest]
                for c in self.cands.get(dest, ()):
                    if c is not sel:
                        entries.append((dest, c.seq, c.value, c.path))
        return entries

    def process_update(self, via, entries, link_value, now):
        """Fold a neighbor's advertisement into the table.

        link_value is this node's current metric for the link toward `via`.
        Returns the set of destinations whose selection changed.
        """
        space = self.space
        me = self.node
        changed = set()
        link_usable = space.link_usable(link_value)
        selected = self.selected
        cands = self.cands
        selected_get = selected.get
        usable = space.usable
        better = space.better
        combine = space.combine
        worst = space.worst
        cap = self.cap
        for dest, seq, value, path in entries:
            if dest == me or me in path:
                continue
            cur = selected_get(dest)
            newest = cur.seq if cur is not None else -1
            if seq < newest:
                continue
            if (seq & 1) or not usable(value):
                # Broken-route advertisement: adopt the brokenness if newer.
                if seq > newest:
                    selected[dest] = Candidate(seq, worst, (), None, now)
                    cands[dest] = []
                    changed.add(dest)
                continue
            if not link_usable:
                continue
            cand_value = combine(link_value, value)
            if not usable(cand_value):
                continue
            key = (me,) + path
            if seq > newest:
                cand = Candidate(seq, cand_value, key, via, now)
                cands[dest] = [cand]
                selected[dest] = cand
                changed.add(dest)
                continue
            # Equal sequence number: merge into the candidate list.
            lst = cands.get(dest)
            if lst is None:
                lst = cands[dest] = []
            for i, c in enumerate(lst):
                if c.path == key:
                    if c.value == cand_value:
                        key = None  # verbatim repeat of a stored advert
                        break
                    cand = Candidate(seq, cand_value, key, via, now)
                    lst[i] = cand
                    if cur is c:
                        cur = cand
                        selected[dest] = cand
                    break
            else:
                cand = Candidate(seq, cand_value, key, via, now)
                lst.append(cand)
                if cap and len(lst) > cap:
                    keep = sorted(lst, key=lambda c: c.value, reverse=space.maximize)
                    if cur is not None and cur in keep[cap:]:
                        keep.remove(cur)
                        keep.insert(cap - 1, cur)
                    del lst[:]
                    lst.extend(keep[:cap])
            if key is None:
                continue
            best = cur if (cur is not None and usable(cur.value)) else None
            for c in lst:
                if best is None or better(c.value, best.value):
                    best = c
            if best is not None and best is not cur:
                selected[dest] = best
                changed.add(dest)
        if changed:
            self._active = None
        return changed

    def mark_broken_via(self, neighbor, now):
        """Break every route whose next hop is `neighbor`; returns changed dests."""
        space = self.space
        changed = []
        for dest in sorted(self.selected):
            sel = self.selected[dest]
            if sel.via != neighbor:
                lst = self.cands.get(dest)
                if lst:
                    self.cands[dest] = [c for c in lst if c.via != neighbor]
                continue
            self.selected[dest] = Candidate(sel.seq + 1, space.worst, (), None, now)
            self.cands[dest] = []
            changed.append(dest)
        if changed:
            self._active = None
        return changed

    def dump_text(self, now_us=None):
        """Plain-text table dump (dest, next_hop, metric, seq, time) for oracles."""
        lines = []
        for dest in sorted(self.selected):
            sel = self.selected[dest]
            nh = sel.via if sel.via is not None else "-"
            lines.append("%s %s %r %d %s" % (dest, nh, sel.value, sel.seq,
                                             sel.installed_at if now_us is None else now_us))
        return "\n".join(lines)


def synchronous_convergence(n_nodes, neighbors_of, link_value, kind,
                            cap=0, max_rounds=None):
    """Run full-dump exchange rounds on frozen link metrics until quiescence.

    Each node advertises once per round from a snapshot taken at the round
    start, so the exchange is synchronous and deterministic.  Sequence
    numbers are bumped once up front: within a single sequence epoch the
    equal-seq better-metric adoption rule alone drives convergence, which is
    what the exhaustive-path oracle checks against.

    link_value(a, b) is the metric of the directed link a -> b as seen at a.
    Returns the list of converged RoutingTable objects.
    """
    tables = [RoutingTable(i, kind, cap=cap, advertise_all=True)
              for i in range(n_nodes)]
    for t in tables:
        t.bump_own_seq()
    if max_rounds is None:
        max_rounds = 2 * n_nodes + 4
    for _ in range(max_rounds):
        dumps = [t.dump_entries() for t in tables]
        any_change = False
        for src in range(n_nodes):
            for nb in sorted(neighbors_of(src)):
                if tables[nb].process_update(src, dumps[src],
                                             link_value(nb, src), 0):
                    any_change = True
        if not any_change:
            break
    return tables

"""Deterministic discrete-event scheduler.

Events fire in (time, insertion order) so equal-time events run in the order
they were scheduled.  Every random draw comes from a named substream seeded
from the run seed, which makes the full decision sequence a pure function of
(config, seed) regardless of wall-clock or interleaving concerns.
"""

import heapq
import random


class Engine:
    def __init__(self, seed):
        self.seed = seed
        self.now = 0
        self._heap = []
        self._counter = 0
        self._cancelled = set()
        self._streams = {}

    def stream(self, name):
        """Named pseudorandom substream, created lazily and cached."""
        rng = self._streams.get(name)
        if rng is None:
            rng = self._streams[name] = random.Random("%s/%s" % (self.seed, name))
        return rng

    def schedule(self, fire_at_us, fn, *args):
        if fire_at_us < self.now:
            raise RuntimeError("scheduling in the past (%d < %d)" % (fire_at_us, self.now))
        self._counter = c = self._counter + 1
        ev = (fire_at_us, c, fn, args)
        heapq.heappush(self._heap, ev)
        return ev

    def schedule_in(self, delay_us, fn, *args):
        return self.schedule(self.now + delay_us, fn, *args)

    def cancel(self, ev):
        self._cancelled.add(ev[1])

    def run_until(self, end_us):
        """Process every event with fire_at <= end_us; leave now = end_us."""
        heap = self._heap
        pop = heapq.heappop
        cancelled = self._cancelled
        while heap and heap[0][0] <= end_us:
            t, c, fn, args = pop(heap)
            if cancelled and c in cancelled:
                cancelled.discard(c)
                continue
            self.now = t
            fn(*args)
        self.now = end_us

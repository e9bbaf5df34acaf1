"""Static node placement and the wireless link model.

A Topology is immutable after construction: node positions, the neighbor
relation and the per-direction delivery probabilities never change during a
run, so one topology can be shared by every metric variant of a sweep.
"""

import math
import random
from dataclasses import dataclass, field


@dataclass(frozen=True)
class LinkModel:
    """Distance-based delivery probability plus bandwidth and propagation.

    The delivery probability is a two-segment function of distance: p_max up
    to r_inner, then linearly decreasing to 0 at comm_range.  Selected
    directions may carry a multiplier < 1 (link asymmetry), and tests may pin
    exact per-direction probabilities through `overrides`.
    """

    comm_range: float
    p_max: float = 1.0
    r_inner: float = 0.0
    bandwidth_bps: int = 2_000_000
    prop_delay_us: int = 1
    direction_factor: dict = field(default_factory=dict)  # (a, b) -> multiplier
    overrides: dict = field(default_factory=dict)         # (a, b) -> probability

    def probability(self, distance, a=None, b=None):
        if a is not None:
            override = self.overrides.get((a, b))
            if override is not None:
                return min(max(override, 0.0), 1.0)
        if distance > self.comm_range:
            return 0.0
        if distance <= self.r_inner or self.comm_range <= self.r_inner:
            p = self.p_max
        else:
            p = self.p_max * (self.comm_range - distance) / (self.comm_range - self.r_inner)
        if a is not None:
            p *= self.direction_factor.get((a, b), 1.0)
        return min(max(p, 0.0), 1.0)


class Topology:
    """Immutable node placement with a precomputed neighbor relation."""

    def __init__(self, positions, width, height, comm_range, link_model):
        self.positions = tuple((float(x), float(y)) for x, y in positions)
        self.width = float(width)
        self.height = float(height)
        self.comm_range = float(comm_range)
        self.link_model = link_model
        for x, y in self.positions:
            if not (0.0 <= x <= self.width and 0.0 <= y <= self.height):
                raise ValueError("node position outside area")
        self._adjacency = tuple(
            tuple(b for b in range(self.n)
                  if b != a and self.distance(a, b) <= self.comm_range)
            for a in range(self.n)
        )

    @property
    def n(self):
        return len(self.positions)

    def distance(self, a, b):
        ax, ay = self.positions[a]
        bx, by = self.positions[b]
        return math.hypot(ax - bx, ay - by)

    def neighbors(self, node):
        """All nodes within comm_range, excluding the node itself."""
        return self._adjacency[node]

    def delivery_probability(self, a, b):
        """Ground-truth delivery probability for a single transmission a -> b."""
        if a == b:
            raise ValueError("no self link")
        return self.link_model.probability(self.distance(a, b), a, b)

    def save(self, path):
        """Write one `id x y` line per node (plain text, reusable across runs)."""
        with open(path, "w", encoding="utf-8") as fh:
            for i, (x, y) in enumerate(self.positions):
                fh.write("%d %r %r\n" % (i, x, y))

    @staticmethod
    def load(path, width, height, comm_range, link_model):
        positions = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                _i, x, y = line.split()
                positions.append((float(x), float(y)))
        return Topology(positions, width, height, comm_range, link_model)


def build_random_topology(n, width, height, comm_range, seed, *,
                          p_max=1.0, r_inner=None, bandwidth_bps=2_000_000,
                          prop_delay_us=1, asym_fraction=0.0,
                          asym_multiplier=0.3, overrides=None):
    """Place n nodes uniformly at random; deterministic for a given seed.

    A fraction of in-range links may get a one-direction delivery multiplier
    so that metrics blind to asymmetry can be told apart from the rest.
    """
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if width <= 0 or height <= 0:
        raise ValueError("area dimensions must be positive")
    if comm_range <= 0:
        raise ValueError("comm_range must be positive")
    if r_inner is None:
        r_inner = comm_range / 2.0
    rng = random.Random("%s/place" % seed)
    positions = [(rng.uniform(0.0, width), rng.uniform(0.0, height))
                 for _ in range(n)]

    direction_factor = {}
    if asym_fraction > 0.0:
        arng = random.Random("%s/asym" % seed)
        for a in range(n):
            ax, ay = positions[a]
            for b in range(a + 1, n):
                bx, by = positions[b]
                if math.hypot(ax - bx, ay - by) > comm_range:
                    continue
                if arng.random() < asym_fraction:
                    pair = (a, b) if arng.random() < 0.5 else (b, a)
                    direction_factor[pair] = asym_multiplier

    model = LinkModel(comm_range=comm_range, p_max=p_max, r_inner=r_inner,
                      bandwidth_bps=bandwidth_bps, prop_delay_us=prop_delay_us,
                      direction_factor=direction_factor,
                      overrides=dict(overrides or {}))
    return Topology(positions, width, height, comm_range, model)

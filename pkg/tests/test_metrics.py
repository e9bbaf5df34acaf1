import math

import pytest
from hypothesis import given, strategies as st

from dsdvsim import metrics
from dsdvsim.metrics import (
    INF, SPACES, ProbeWindow, estimate_bandwidth, etx_link, ett_link,
    invetx_link, md_dispersion, ml_link, path_metric,
)

TOL = 1e-12


# (d_f, d_r, expected 1/(d_f*d_r))
ETX_CASES = [
    (1.0, 1.0, 1.0),
    (0.5, 0.5, 4.0),
    (0.5, 1.0, 2.0),
    (1.0, 0.5, 2.0),
    (0.25, 1.0, 4.0),
    (0.8, 0.8, 1.5625),
    (0.9, 0.9, 1.0 / 0.81),
    (0.7, 0.9, 1.0 / 0.63),
    (0.1, 0.1, 100.0),
    (0.2, 0.5, 10.0),
    (0.4, 0.25, 10.0),
    (0.6, 0.5, 1.0 / 0.3),
    (1.0, 0.1, 10.0),
    (0.3, 0.3, 1.0 / 0.09),
    (0.75, 0.8, 1.0 / 0.6),
    (0.9, 1.0, 1.0 / 0.9),
    (0.95, 0.95, 1.0 / 0.9025),
    (0.01, 1.0, 100.0),
    (0.5, 0.2, 10.0),
    (0.625, 0.8, 2.0),
    (0.0, 1.0, INF),
    (1.0, 0.0, INF),
    (0.0, 0.0, INF),
]

PRODUCT_CASES = [
    (1.0, 1.0, 1.0),
    (0.5, 0.5, 0.25),
    (0.9, 1.0, 0.9),
    (0.9, 0.8, 0.72),
    (0.7, 0.9, 0.63),
    (0.0, 1.0, 0.0),
    (1.0, 0.0, 0.0),
    (0.0, 0.0, 0.0),
    (0.1, 0.1, 0.01),
    (0.2, 0.5, 0.1),
    (0.25, 1.0, 0.25),
    (0.8, 0.8, 0.64),
    (0.3, 0.3, 0.09),
    (0.6, 0.5, 0.3),
    (0.75, 0.8, 0.6),
    (0.95, 0.95, 0.9025),
    (0.01, 1.0, 0.01),
    (0.5, 0.2, 0.1),
    (0.625, 0.8, 0.5),
    (0.4, 0.25, 0.1),
    (1.0, 0.1, 0.1),
]

# (etx, frame bytes, bandwidth b/s, expected seconds)
ETT_CASES = [
    (1.0, 640, 10_000_000, 5.12e-4),
    (4.0, 640, 10_000_000, 2.048e-3),
    (2.0, 640, 10_000_000, 1.024e-3),
    (1.0, 640, 2_000_000, 2.56e-3),
    (1.0, 1137, 2_000_000, 4.548e-3),
    (1.0, 137, 2_000_000, 5.48e-4),
    (1.0, 1, 8, 1.0),
    (3.0, 1, 8, 3.0),
    (1.5, 640, 2_000_000, 3.84e-3),
    (10.0, 640, 10_000_000, 5.12e-3),
    (1.0, 1000, 8_000_000, 1e-3),
    (2.5, 1000, 8_000_000, 2.5e-3),
    (1.0, 512, 1_000_000, 4.096e-3),
    (7.0, 512, 1_000_000, 2.8672e-2),
    (1.0, 64, 2_000_000, 2.56e-4),
    (1.0, 640, 54_000_000, 640 * 8 / 54e6),
    (2.0, 640, 54_000_000, 2 * 640 * 8 / 54e6),
    (100.0, 640, 2_000_000, 0.256),
    (1.0, 1500, 2_000_000, 6e-3),
    (4.0, 1500, 2_000_000, 2.4e-2),
    (INF, 640, 2_000_000, INF),
]

# (t1 us, t2 us, expected us or None)
MD_CASES = [
    (5_000_000, 5_002_000, 2_000),
    (0, 1, 1),
    (0, 4548, 4548),
    (1_000_000, 1_000_910, 910),
    (10, 10, None),
    (10, 9, None),
    (7, 3, None),
    (123_456, 123_457, 1),
    (0, 1_000_000, 1_000_000),
    (999, 1999, 1000),
    (50, 4598, 4548),
    (3_700_000, 3_702_000, 2_000),      # same gap as the first case, shifted
    (100, 90, None),
    (2, 2, None),
    (0, 910, 910),
    (1_000, 5_548, 4548),
    (8_000_000, 8_000_001, 1),
    (600, 1510, 910),
    (42, 4590, 4548),
    (5, 4, None),
    (0, 2_000, 2_000),
]

# (kind, link values, expected path value)
PATH_CASES = [
    ("etx", [1.0, 4.0], 5.0),
    ("etx", [1.0], 1.0),
    ("etx", [2.0, 2.0, 2.0], 6.0),
    ("etx", [], 0.0),
    ("etx", [1.0, INF], INF),
    ("hop", [1.0, 1.0, 1.0], 3.0),
    ("hop", [1.0], 1.0),
    ("hop", [], 0.0),
    ("invetx", [0.9, 0.8], 1.7),
    ("invetx", [1.0, 1.0, 1.0], 3.0),
    ("invetx", [0.63], 0.63),
    ("invetx", [0.5, 0.0], -INF),
    ("ml", [0.9, 0.8], 0.72),
    ("ml", [1.0, 1.0], 1.0),
    ("ml", [0.5, 0.5, 0.5], 0.125),
    ("ml", [], 1.0),
    ("ml", [0.9, 0.0], 0.0),
    ("md", [0.001, 0.002], 0.003),
    ("md", [0.0009], 0.0009),
    ("md", [], 0.0),
    ("ett", [5.12e-4, 2.048e-3], 2.56e-3),
]


def test_etx_link_cases():
    for d_f, d_r, want in ETX_CASES:
        assert etx_link(d_f, d_r) == pytest.approx(want, abs=TOL)


def test_invetx_link_cases():
    for d_f, d_r, want in PRODUCT_CASES:
        assert invetx_link(d_f, d_r) == pytest.approx(want, abs=TOL)


def test_ml_link_cases():
    for d_f, d_r, want in PRODUCT_CASES:
        assert ml_link(d_f, d_r) == pytest.approx(want, abs=TOL)


def test_ett_link_cases():
    for etx, frame, bw, want in ETT_CASES:
        assert ett_link(etx, frame, bw) == pytest.approx(want, abs=TOL)


def test_md_dispersion_cases():
    for t1, t2, want in MD_CASES:
        assert md_dispersion(t1, t2) == want


def test_path_metric_cases():
    for kind, values, want in PATH_CASES:
        assert path_metric(kind, values) == pytest.approx(want, abs=TOL)


@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_etx_invetx_duality(d_f, d_r):
    # same product, reciprocal values: exact, not approximate
    assert etx_link(d_f, d_r) == 1.0 / invetx_link(d_f, d_r)


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=8))
def test_ml_path_below_weakest_link(values):
    path = path_metric("ml", values)
    assert path <= min(values) + TOL
    assert 0.0 <= path <= 1.0


@given(st.integers(0, 10**9), st.integers(0, 10**9),
       st.integers(-10**9, 10**9))
def test_md_dispersion_offset_invariant(t1, t2, delta):
    assert md_dispersion(t1, t2) == md_dispersion(t1 + delta, t2 + delta)


@given(st.lists(st.floats(1.0, 1e6), min_size=1, max_size=10))
def test_bandwidth_uses_minimum_sample(samples):
    est = estimate_bandwidth(samples)
    assert est == metrics.PAIR_LARGE_BYTES * 8.0 / (min(samples) / 1e6)


def test_bandwidth_no_samples():
    assert estimate_bandwidth([]) is None
    assert estimate_bandwidth(()) is None


def test_bandwidth_example():
    # 1137-byte probe over a 10 Mb/s link: dispersion is one transmission time
    disp_us = 1137 * 8 / 10e6 * 1e6
    est = estimate_bandwidth([disp_us])
    assert est == pytest.approx(10e6, rel=1e-9)


def test_spaces_worst_is_unusable():
    for kind, space in SPACES.items():
        assert not space.usable(space.worst), kind
        assert not space.link_usable(space.worst), kind


def test_spaces_identity_usable_for_start():
    # a node's own route advert carries the identity value and must be adoptable
    for kind, space in SPACES.items():
        assert space.usable(space.identity), kind


def test_combine_dead_link_poisons_path():
    for kind, space in SPACES.items():
        v = space.combine(space.worst, space.identity)
        assert not space.usable(v), kind


def test_combine_accumulates():
    assert SPACES["etx"].combine(2.0, 3.0) == 5.0
    assert SPACES["ml"].combine(0.5, 0.5) == 0.25
    assert SPACES["invetx"].combine(0.9, 1.8) == pytest.approx(2.7)
    assert SPACES["md"].combine(0.001, 0.004) == pytest.approx(0.005)


def test_better_direction():
    assert SPACES["etx"].better(1.0, 2.0)
    assert not SPACES["etx"].better(2.0, 1.0)
    assert SPACES["invetx"].better(2.0, 1.0)
    assert SPACES["ml"].better(0.9, 0.5)
    assert not SPACES["ml"].better(0.5, 0.9)
    # strict comparison: equal values are not "better" (incumbent wins ties)
    for space in SPACES.values():
        assert not space.better(1.0, 1.0)


def test_probe_window_counts_and_prunes():
    w = ProbeWindow(10_000_000, 1_000_000)  # 10 s window, 1 s period
    for t in range(0, 10):
        w.add(t * 1_000_000)
    assert w.count(9_000_000) == 10
    # anything at or before now - w falls out (half-open window)
    assert w.count(10_000_000) == 9
    assert w.count(11_000_000) == 8
    assert w.count(25_000_000) == 0


def test_probe_window_ratio():
    w = ProbeWindow(10_000_000, 1_000_000)
    now = 10_000_000
    assert w.ratio(now) == 0.0
    for t in range(1, 8):
        w.add(t * 1_000_000)
    assert w.ratio(now) == pytest.approx(0.7)
    for t in range(8, 20):
        w.add(t * 1_000_000)
    assert w.ratio(19_000_000) == 1.0  # clamped


def test_metric_value_carrier():
    mv = metrics.MetricValue("etx", 4.0)
    assert mv.kind == "etx" and mv.value == 4.0

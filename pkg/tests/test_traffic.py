import pytest

from dsdvsim.traffic import CbrFlow, RunStats, pick_flows


def test_pick_flows_basics():
    flows = pick_flows(50, 20, 5.0, 640, seed=1, start_us=0, stop_us=900_000_000)
    assert len(flows) == 20
    assert len({(f.src, f.dst) for f in flows}) == 20
    for f in flows:
        assert f.src != f.dst
        assert 0 <= f.src < 50 and 0 <= f.dst < 50
        assert f.rate == 5.0 and f.packet_size == 640


def test_pick_flows_deterministic():
    a = pick_flows(50, 20, 5.0, 640, seed=9, start_us=0, stop_us=1)
    b = pick_flows(50, 20, 5.0, 640, seed=9, start_us=0, stop_us=1)
    c = pick_flows(50, 20, 5.0, 640, seed=10, start_us=0, stop_us=1)
    assert a == b
    assert a != c


def test_pick_flows_two_nodes():
    flows = pick_flows(2, 1, 1.0, 640, seed=1, start_us=0, stop_us=1)
    assert len(flows) == 1
    assert {flows[0].src, flows[0].dst} == {0, 1}


def test_pick_flows_too_many_rejected():
    with pytest.raises(ValueError):
        pick_flows(3, 7, 1.0, 640, seed=1, start_us=0, stop_us=1)
    # exactly n*(n-1) is still fine
    assert len(pick_flows(3, 6, 1.0, 640, seed=1, start_us=0, stop_us=1)) == 6


def _stats_with_traffic():
    st = RunStats(warmup_us=1_000_000)
    st.record_sent(1, 0)            # warm-up packet
    st.record_sent(2, 2_000_000)
    st.record_sent(3, 3_000_000)
    st.record_sent(4, 4_000_000)
    st.record_delivered(1, 500_000)
    st.record_delivered(2, 2_002_000)
    st.record_drop(3, "no_route")
    return st  # uid 4 still outstanding


def test_conservation_after_finalize():
    st = _stats_with_traffic()
    st.finalize()
    assert st.data_sent == 4
    assert st.data_delivered == 2
    assert st.drops["no_route"] == 1
    assert st.drops["in_flight"] == 1
    st.check_conservation()


def test_throughput_arithmetic():
    st = RunStats()
    for uid in range(900):
        st.record_sent(uid, 0)
        st.record_delivered(uid, 1)
    assert st.throughput_bps(640, 900.0) == pytest.approx(5120.0)
    with pytest.raises(ValueError):
        st.throughput_bps(640, 0)


def test_e2ed_mean_and_steady_view():
    st = _stats_with_traffic()
    st.finalize()
    # delays: 0.5 s (warm-up) and 0.002 s
    assert st.e2ed_s() == pytest.approx((0.5 + 0.002) / 2)
    assert st.e2ed_s(steady=True) == pytest.approx(0.002)
    assert st.delivered_steady() == 1


def test_e2ed_none_when_nothing_delivered():
    st = RunStats()
    st.record_sent(1, 0)
    st.finalize()
    assert st.e2ed_s() is None


def test_e2ed_rtt_mode():
    st = RunStats()
    st.record_rtt(1, 0, 2_000)
    st.record_rtt(2, 0, 4_000)
    assert st.e2ed_s(rtt_mode=True) == pytest.approx(0.003)


def test_nrl():
    st = RunStats()
    assert st.nrl() is None  # undefined with zero deliveries
    st.record_sent(1, 0)
    st.record_delivered(1, 1)
    st.count_routing("metric_probe", 30)
    st.count_routing("full_dump", 10)
    assert st.routing_total() == 40
    assert st.nrl() == 40.0


def test_unknown_routing_category_rejected():
    st = RunStats()
    with pytest.raises(KeyError):
        st.count_routing("carrier_pigeon")


def test_flow_is_frozen():
    f = CbrFlow(0, 1, 2.0, 640, 0, 10)
    with pytest.raises(Exception):
        f.src = 5

"""Simulation harness: event scheduler, links, topology, traffic model,
pcap files, and the end-to-end fabric scenario."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ofswitch import messages as m
from ofswitch.datapath import Datapath
from ofswitch.harness import (
    Fabric,
    FlowSpec,
    Host,
    Link,
    Scheduler,
    SimClock,
    TrafficProfile,
    bounded_pareto,
    build_spine_leaf,
    classify,
    install_routes,
    mean_fct_by_class,
    run_scenario,
)
from ofswitch.harness.pcap import read_pcap, replay, write_pcap
from ofswitch.harness.traffic import ELEPHANT_MIN_BYTES, MOUSE_MAX_BYTES
from ofswitch.oxm import MatchSet
from ofswitch.pkt import build


# -- scheduler -------------------------------------------------------------------


def test_scheduler_runs_in_time_order():
    sched = Scheduler(SimClock())
    seen = []
    sched.at(2.0, lambda: seen.append("b"))
    sched.at(1.0, lambda: seen.append("a"))
    sched.at(3.0, lambda: seen.append("c"))
    sched.run()
    assert seen == ["a", "b", "c"]


def test_scheduler_fifo_at_equal_times():
    sched = Scheduler(SimClock())
    seen = []
    for tag in range(5):
        sched.at(1.0, lambda t=tag: seen.append(t))
    sched.run()
    assert seen == [0, 1, 2, 3, 4]


def test_scheduler_rejects_the_past():
    clock = SimClock()
    sched = Scheduler(clock)
    sched.at(5.0, lambda: None)
    sched.run()
    assert clock.now() == 5.0
    with pytest.raises(ValueError):
        sched.at(4.0, lambda: None)


def test_scheduler_events_can_schedule_more():
    clock = SimClock()
    sched = Scheduler(clock)
    seen = []

    def ping(n):
        seen.append((clock.now(), n))
        if n < 3:
            sched.after(1.0, lambda: ping(n + 1))

    sched.at(0.0, lambda: ping(0))
    sched.run()
    assert seen == [(0.0, 0), (1.0, 1), (2.0, 2), (3.0, 3)]


def test_run_until_advances_idle_clock():
    clock = SimClock()
    sched = Scheduler(clock)
    sched.run(until=7.5)
    assert clock.now() == 7.5


# -- links -----------------------------------------------------------------------


def make_link(sched, **kw):
    kw.setdefault("capacity_bps", 1e6)
    kw.setdefault("delay", 0.010)
    link = Link(sched, **kw)
    a = Host("a", "02:00:00:00:00:01", "10.0.0.1")
    b = Host("b", "02:00:00:00:00:02", "10.0.0.2")
    link.attach_host(0, a)
    link.attach_host(1, b)
    return link, a, b


def test_link_delivery_time_oracle():
    # serialization (len*8/capacity) plus propagation delay, computed by hand
    clock = SimClock()
    sched = Scheduler(clock)
    link, a, b = make_link(sched)
    frame = b"\x00" * 1250  # 10000 bits -> 10 ms at 1 Mbit/s
    a.send(frame)
    sched.run()
    assert b.received == [(pytest.approx(0.020), frame)]


def test_link_serializes_back_to_back_frames():
    clock = SimClock()
    sched = Scheduler(clock)
    link, a, b = make_link(sched)
    frame = b"\x00" * 1250
    a.send(frame)  # occupies the wire until t=0.010
    a.send(frame)  # must wait, arrives 0.010 later
    sched.run()
    times = [t for t, _ in b.received]
    assert times == [pytest.approx(0.020), pytest.approx(0.030)]


def test_link_directions_are_independent():
    sched = Scheduler(SimClock())
    link, a, b = make_link(sched)
    a.send(b"\x00" * 1250)
    b.send(b"\x00" * 1250)
    sched.run()
    assert len(a.received) == 1 and len(b.received) == 1
    assert a.received[0][0] == pytest.approx(0.020)


def test_link_queue_overflow_drops():
    sched = Scheduler(SimClock())
    link, a, b = make_link(sched, queue_bytes=3000)
    frame = b"\x00" * 1250
    for _ in range(4):
        a.send(frame)
    sched.run()
    # the frame on the wire counts towards the backlog: the first two fit
    # under the 3000-byte bound, the rest are dropped
    assert len(b.received) == 2
    assert link.dropped == 2


def test_host_sink_callback():
    sched = Scheduler(SimClock())
    link, a, b = make_link(sched)
    got = []
    b.sink = lambda now, frame: got.append(len(frame))
    a.send(b"\x00" * 100)
    sched.run()
    assert got == [100]
    assert b.received == []


def test_link_feeds_switch_port(clock):
    sched = Scheduler(SimClock())
    dp = Datapath(datapath_id=9, clock=sched.clock.now)
    dp.ports.add(1)
    link = Link(sched, capacity_bps=1e9, delay=0.001)
    link.attach_switch(0, dp, 1)
    b = Host("b", "02:00:00:00:00:02", "10.0.0.2")
    link.attach_host(1, b)
    b.send(b"\x00" * 60)
    sched.run()
    assert dp.ports.get(1).rx_packets == 1


# -- topology --------------------------------------------------------------------


def test_spine_leaf_shape():
    fab = build_spine_leaf(2, 3, 4)
    assert len(fab.spines) == 2 and len(fab.leaves) == 3
    assert [s.datapath_id for s in fab.spines] == [100, 101]
    assert [l.datapath_id for l in fab.leaves] == [200, 201, 202]
    assert len(fab.hosts) == 12
    # each leaf: ports 1..2 uplinks, 3..6 hosts; each spine: ports 1..3
    for leaf in fab.leaves:
        assert sorted(p.port_no for p in leaf.ports) == [1, 2, 3, 4, 5, 6]
    for spine in fab.spines:
        assert sorted(p.port_no for p in spine.ports) == [1, 2, 3]


def test_host_addressing_is_positional():
    fab = build_spine_leaf(2, 2, 2)
    first = fab.hosts[1 * fab.hosts_per_leaf + 0]  # leaf 1, slot 0
    assert first.ip == "10.0.1.1"
    assert first.mac == "02:00:00:00:01:01"
    # attached to leaf 1 on the first access port after the two uplinks
    assert fab.host_leaf(first) == (1, 3)


def test_fabric_cross_leaf_path_exists():
    """A frame injected at a host reaches a host on another leaf once
    routes are installed."""
    fab = build_spine_leaf(2, 2, 2)
    install_routes(fab)
    src, dst = fab.hosts[0], fab.hosts[fab.hosts_per_leaf]
    frame = build.udp4_frame(dst.mac, src.mac, src.ip, dst.ip, 5, 5, b"hi")
    src.send(frame)
    fab.sched.run()
    assert [f for _, f in dst.received] == [frame]


# -- traffic model ---------------------------------------------------------------


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_bounded_pareto_stays_in_bounds(seed):
    import random
    rng = random.Random(seed)
    x = bounded_pareto(rng, 1.2, 600.0, 2e7)
    assert 600.0 <= x <= 2e7


def test_classify_boundaries():
    assert classify(MOUSE_MAX_BYTES - 1) == "mouse"
    assert classify(MOUSE_MAX_BYTES) == "rabbit"
    assert classify(ELEPHANT_MIN_BYTES) == "rabbit"
    assert classify(ELEPHANT_MIN_BYTES + 1) == "elephant"


def test_traffic_profile_deterministic():
    a = TrafficProfile(seed=7, duration=0.2).generate(8, 1e9)
    b = TrafficProfile(seed=7, duration=0.2).generate(8, 1e9)
    assert a == b
    c = TrafficProfile(seed=8, duration=0.2).generate(8, 1e9)
    assert a != c


def test_traffic_profile_covers_all_classes():
    flows = TrafficProfile(seed=1, duration=0.2).generate(8, 1e9)
    kinds = {f.kind for f in flows}
    assert kinds == {"mouse", "rabbit", "elephant"}
    assert all(0.0 <= f.start <= 0.2 for f in flows)
    assert all(f.src != f.dst for f in flows)


def test_flow_spec_kind():
    assert FlowSpec(0.0, 0, 1, 500).kind == "mouse"
    assert FlowSpec(0.0, 0, 1, 50_000_000).kind == "elephant"


# -- pcap ------------------------------------------------------------------------


def test_pcap_roundtrip(tmp_path):
    path = tmp_path / "t.pcap"
    packets = [(0.0, b"\x01" * 60), (0.5, b"\x02" * 100), (1.25, b"\x03" * 64)]
    write_pcap(path, packets)
    again = read_pcap(path)
    assert [(pytest.approx(t), f) for t, f in again] == packets


def test_pcap_replay_into_switch():
    sched = Scheduler(SimClock())
    dp = Datapath(datapath_id=3, clock=sched.clock.now)
    dp.ports.add(1)
    dp.flow_mod(m.FlowMod(command=m.OFPFC_ADD, priority=1,
                          match=MatchSet.from_pairs({}),
                          instructions=[m.ApplyActions([m.OutputAction(1)])]))
    replay(sched, dp, 1, [(0.1, b"\x00" * 60), (0.2, b"\x00" * 64)])
    sched.run()
    assert dp.ports.get(1).rx_packets == 2
    assert dp.ports.get(1).tx_packets == 2


# -- scenario --------------------------------------------------------------------


def test_small_scenario_report_format():
    fab = build_spine_leaf(2, 2, 2, queue_bytes=32 * 1024 * 1024)
    report = run_scenario(fab, TrafficProfile(seed=3, load=0.05, duration=0.02))
    lines = report.splitlines()
    assert lines[0].startswith("scenario load=0.05 seed=3 flows=")
    assert lines[1].startswith("frame_drops=")
    assert [ln.split()[0] for ln in lines[2:]] == [
        "class=mouse", "class=rabbit", "class=elephant"]
    fct = mean_fct_by_class(report)
    assert set(fct) == {"mouse", "rabbit", "elephant"}
    assert all(v > 0 for v in fct.values())


def test_scenario_repeat_is_byte_identical():
    def once():
        fab = build_spine_leaf(2, 2, 2, queue_bytes=32 * 1024 * 1024)
        return run_scenario(fab, TrafficProfile(seed=5, load=0.05, duration=0.02))

    assert once() == once()


def test_load_scenario_config(tmp_path):
    from ofswitch.harness import load_scenario
    cfg = {"n_spine": 2, "n_leaf": 2, "hosts_per_leaf": 2,
           "seed": 11, "load": 0.05, "duration": 0.02}
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(cfg))
    fab, profile = load_scenario(path)
    assert isinstance(fab, Fabric)
    assert profile.seed == 11 and profile.load == 0.05

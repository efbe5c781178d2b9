"""End-to-end simulation scenarios on a spine/leaf fabric.

Routes are installed through real protocol sessions (bytes through the
codec, not direct method calls), traffic flows are paced onto the access
links, and the result is a plain-text report that is byte-identical for
identical inputs.
"""

from __future__ import annotations

import json
import math

from .. import messages as m
from .. import wire
from ..channel import SwitchConnection
from ..errors import UnroutableFlow
from ..oxm import MatchSet
from .links import Host
from .topology import Fabric, build_spine_leaf
from .traffic import CLASS_NAMES, FlowSpec, TrafficProfile
from ..pkt import build

ECMP_GROUP_ID = 1
_HEADER_BYTES = 42  # ethernet + ipv4 + udp


class _ControlSession:
    """Drives one switch through its controller channel in-process."""

    def __init__(self, dp):
        self.replies: list[bytes] = []
        self.conn = SwitchConnection(dp, self.replies.append, attach=False)
        self.conn.start()
        self._xid = 0
        self.send(m.Hello())

    def send(self, body) -> None:
        self._xid += 1
        self.conn.feed(wire.pack(m.OfMessage(self._xid, body)))
        for raw in self.replies:
            msg = wire.unpack(raw)
            if isinstance(msg.body, m.Error):
                raise RuntimeError(
                    f"switch rejected setup message: type={msg.body.err_type} "
                    f"code={msg.body.code}"
                )
        self.replies.clear()


def install_routes(fab: Fabric) -> None:
    """Address-based forwarding: exact host routes at the owning leaf,
    per-leaf prefixes at every spine, and an ECMP select group for the
    uplinks at every leaf."""
    for i, spine in enumerate(fab.spines):
        sess = _ControlSession(spine)
        for j in range(fab.n_leaf):
            match = MatchSet.from_pairs({
                "eth_type": 0x0800,
                "ipv4_dst": (f"10.0.{j}.0", "255.255.255.0"),
            })
            sess.send(m.FlowMod(
                command=m.OFPFC_ADD, table_id=0, priority=100, match=match,
                instructions=[m.ApplyActions([m.OutputAction(fab.spine_port_to_leaf(j))])],
            ))
    for j, leaf in enumerate(fab.leaves):
        sess = _ControlSession(leaf)
        buckets = [m.Bucket([m.OutputAction(fab.leaf_port_to_spine(i))])
                   for i in range(fab.n_spine)]
        sess.send(m.GroupMod(m.OFPGC_ADD, m.OFPGT_SELECT, ECMP_GROUP_ID, buckets))
        for h in range(fab.hosts_per_leaf):
            host = fab.hosts[j * fab.hosts_per_leaf + h]
            match = MatchSet.from_pairs({"eth_type": 0x0800, "ipv4_dst": host.ip})
            sess.send(m.FlowMod(
                command=m.OFPFC_ADD, table_id=0, priority=200, match=match,
                instructions=[m.ApplyActions([m.OutputAction(fab.n_spine + 1 + h)])],
            ))
        for k in range(fab.n_leaf):
            if k == j:
                continue
            match = MatchSet.from_pairs({
                "eth_type": 0x0800,
                "ipv4_dst": (f"10.0.{k}.0", "255.255.255.0"),
            })
            sess.send(m.FlowMod(
                command=m.OFPFC_ADD, table_id=0, priority=100, match=match,
                instructions=[m.ApplyActions([m.GroupAction(ECMP_GROUP_ID)])],
            ))


class _FlowTracker:
    def __init__(self, flows: list[FlowSpec], payload_bytes: int):
        self.flows = flows
        self.payload_bytes = payload_bytes
        self.expected = [max(1, math.ceil(f.size_bytes / payload_bytes)) for f in flows]
        self.received = [0] * len(flows)
        self.finish = [None] * len(flows)

    def packets_for(self, index: int) -> int:
        return self.expected[index]

    def on_frame(self, now: float, frame: bytes) -> None:
        if len(frame) < _HEADER_BYTES + 4:
            return
        flow_id = int.from_bytes(frame[_HEADER_BYTES:_HEADER_BYTES + 4], "big")
        if flow_id >= len(self.flows):
            return
        self.received[flow_id] += 1
        if self.received[flow_id] == self.expected[flow_id]:
            self.finish[flow_id] = now


def run_scenario(fab: Fabric, profile: TrafficProfile,
                 access_bps: float = 1e9, mtu_payload: int = 8958) -> str:
    """Run one traffic mix to completion and return the report text."""
    install_routes(fab)
    flows = profile.generate(len(fab.hosts), access_bps)
    by_ip = {h.ip: h for h in fab.hosts}
    tracker = _FlowTracker(flows, mtu_payload)
    for host in fab.hosts:
        host.sink = tracker.on_frame

    sched = fab.sched
    for idx, f in enumerate(flows):
        src, dst = fab.hosts[f.src], fab.hosts[f.dst]
        if dst.ip not in by_ip or src.ip not in by_ip:
            raise UnroutableFlow(f"flow {idx} endpoints are not in the fabric")
        _schedule_flow(sched, src, dst, idx, f, tracker, access_bps, mtu_payload)
    sched.run()

    frame_drops = sum(link.dropped for link in fab.links)
    return _report(profile, flows, tracker, frame_drops)


def _schedule_flow(sched, src: Host, dst: Host, idx: int, f: FlowSpec,
                   tracker: _FlowTracker, access_bps: float, mtu_payload: int) -> None:
    n = tracker.packets_for(idx)
    tag = idx.to_bytes(4, "big")
    last_size = f.size_bytes - (n - 1) * mtu_payload
    gap = (mtu_payload + _HEADER_BYTES) * 8.0 / access_bps  # sender-side pacing

    def emit(k: int) -> None:
        payload_len = mtu_payload if k < n - 1 else max(4, last_size)
        payload = tag + b"\x00" * (payload_len - 4)
        frame = build.udp4_frame(dst.mac, src.mac, src.ip, dst.ip,
                                 10000 + (idx % 50000), 20000, payload)
        src.send(frame)

    for k in range(n):
        sched.at(f.start + k * gap, emit, k)


def _report(profile: TrafficProfile, flows: list[FlowSpec],
            tracker: _FlowTracker, frame_drops: int) -> str:
    lines = [
        f"scenario load={profile.load:.2f} seed={profile.seed} flows={len(flows)}",
        f"frame_drops={frame_drops}",
    ]
    for kind in CLASS_NAMES:
        idxs = [i for i, f in enumerate(flows) if f.kind == kind]
        done = [i for i in idxs if tracker.finish[i] is not None]
        fcts = sorted(tracker.finish[i] - flows[i].start for i in done)
        if fcts:
            mean = sum(fcts) / len(fcts)
            lines.append(
                f"class={kind} flows={len(idxs)} completed={len(done)} "
                f"mean_fct={mean:.9f} min_fct={fcts[0]:.9f} max_fct={fcts[-1]:.9f}"
            )
        else:
            lines.append(f"class={kind} flows={len(idxs)} completed=0")
    return "\n".join(lines) + "\n"


def mean_fct_by_class(report: str) -> dict[str, float]:
    """Pull the per-class mean completion times back out of a report."""
    out = {}
    for line in report.splitlines():
        if line.startswith("class="):
            fields = dict(part.split("=", 1) for part in line.split())
            if "mean_fct" in fields:
                out[fields["class"]] = float(fields["mean_fct"])
    return out


def load_scenario(path: str) -> tuple[Fabric, TrafficProfile]:
    """Build a fabric and profile from a JSON description file."""
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    fab = build_spine_leaf(
        cfg.get("spines", 2), cfg.get("leaves", 2), cfg.get("hosts_per_leaf", 4),
        fabric_bps=cfg.get("fabric_bps", 1e9),
        access_bps=cfg.get("access_bps", 1e9),
        delay=cfg.get("delay", 10e-6),
        queue_bytes=cfg.get("queue_bytes", 32 * 1024 * 1024),
    )
    profile = TrafficProfile(
        seed=cfg.get("seed", 1),
        load=cfg.get("load", 0.1),
        duration=cfg.get("duration", 1.0),
    )
    return fab, profile

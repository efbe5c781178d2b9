"""Two-tier (spine/leaf) fabric construction.

Leaf switch j uses ports 1..S for its uplinks to spines 1..S and ports
S+1..S+H for its hosts.  Spine switch i uses ports 1..L, one per leaf.
Host h on leaf j gets address 10.0.<j>.<h+1> and a locally administered
MAC that encodes its coordinates.
"""

from __future__ import annotations

from ..datapath import Datapath
from .clock import Scheduler, SimClock
from .links import Host, Link

SPINE_DPID_BASE = 100
LEAF_DPID_BASE = 200


class Fabric:
    def __init__(self, sched: Scheduler, n_spine: int, n_leaf: int, hosts_per_leaf: int):
        self.sched = sched
        self.n_spine = n_spine
        self.n_leaf = n_leaf
        self.hosts_per_leaf = hosts_per_leaf
        self.spines: list[Datapath] = []
        self.leaves: list[Datapath] = []
        self.hosts: list[Host] = []
        self.links: list[Link] = []

    def host_leaf(self, host: Host) -> tuple[int, int]:
        """(leaf index, access port on that leaf) for a host."""
        i = self.hosts.index(host)
        leaf = i // self.hosts_per_leaf
        return leaf, self.n_spine + 1 + (i % self.hosts_per_leaf)

    def spine_port_to_leaf(self, leaf_index: int) -> int:
        return leaf_index + 1

    def leaf_port_to_spine(self, spine_index: int) -> int:
        return spine_index + 1


def host_mac(leaf: int, slot: int) -> str:
    return f"02:00:00:00:{leaf:02x}:{slot + 1:02x}"


def host_ip(leaf: int, slot: int) -> str:
    return f"10.0.{leaf}.{slot + 1}"


def build_spine_leaf(n_spine: int, n_leaf: int, hosts_per_leaf: int,
                     sched: Scheduler | None = None,
                     fabric_bps: float = 1e9, access_bps: float = 1e9,
                     delay: float = 10e-6,
                     queue_bytes: int = 512 * 1024) -> Fabric:
    if n_spine < 1 or n_leaf < 1 or hosts_per_leaf < 1:
        raise ValueError("spine, leaf and host counts must all be at least 1")
    sched = sched if sched is not None else Scheduler(SimClock())
    fab = Fabric(sched, n_spine, n_leaf, hosts_per_leaf)
    clock = sched.clock

    for i in range(n_spine):
        dp = Datapath(datapath_id=SPINE_DPID_BASE + i, clock=clock)
        for p in range(1, n_leaf + 1):
            dp.ports.add(p, name=f"s{i}p{p}")
        fab.spines.append(dp)
    for j in range(n_leaf):
        dp = Datapath(datapath_id=LEAF_DPID_BASE + j, clock=clock)
        for p in range(1, n_spine + hosts_per_leaf + 1):
            dp.ports.add(p, name=f"l{j}p{p}")
        fab.leaves.append(dp)

    for i, spine in enumerate(fab.spines):
        for j, leaf in enumerate(fab.leaves):
            link = Link(sched, fabric_bps, delay, queue_bytes)
            link.attach_switch(0, spine, fab.spine_port_to_leaf(j))
            link.attach_switch(1, leaf, fab.leaf_port_to_spine(i))
            fab.links.append(link)

    for j, leaf in enumerate(fab.leaves):
        for h in range(hosts_per_leaf):
            host = Host(f"h{j}.{h}", host_mac(j, h), host_ip(j, h))
            link = Link(sched, access_bps, delay, queue_bytes)
            link.attach_switch(0, leaf, n_spine + 1 + h)
            link.attach_host(1, host)
            fab.hosts.append(host)
            fab.links.append(link)
    return fab

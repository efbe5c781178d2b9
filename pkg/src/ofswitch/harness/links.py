"""In-memory links and hosts.

A link joins two endpoints -- switch ports or hosts -- with a serialization
rate, a propagation delay, and a bounded FIFO queue per direction.  Frames
that would exceed the queue bound are counted and dropped, which is where
congestion loss comes from in simulations.
"""

from __future__ import annotations

from .clock import Scheduler


class _Channel:
    """One direction of a link."""

    def __init__(self, capacity_bps: float, delay: float, queue_bytes: int):
        self.capacity_bps = float(capacity_bps)
        self.delay = float(delay)
        self.queue_bytes = queue_bytes
        self.next_free = 0.0
        self.tx_frames = 0
        self.tx_bytes = 0
        self.dropped = 0

    def send(self, sched: Scheduler, frame: bytes, deliver) -> bool:
        now = sched.clock.now()
        start = max(now, self.next_free)
        backlog_bytes = (start - now) * self.capacity_bps / 8.0
        if backlog_bytes + len(frame) > self.queue_bytes:
            self.dropped += 1
            return False
        done = start + len(frame) * 8.0 / self.capacity_bps
        self.next_free = done
        self.tx_frames += 1
        self.tx_bytes += len(frame)
        sched.at(done + self.delay, deliver, frame)
        return True


class _PortGlue:
    """Attachment object a switch port transmits into."""

    def __init__(self, link: "Link", side: int):
        self.link = link
        self.side = side

    def send(self, frame: bytes) -> bool:
        return self.link.send_from(self.side, frame)


class Link:
    def __init__(self, sched: Scheduler, capacity_bps: float = 1e9,
                 delay: float = 10e-6, queue_bytes: int = 512 * 1024):
        self.sched = sched
        self.channels = (_Channel(capacity_bps, delay, queue_bytes),
                         _Channel(capacity_bps, delay, queue_bytes))
        self._deliver = [None, None]  # receive function for each side

    def attach_switch(self, side: int, datapath, port_no: int) -> None:
        port = datapath.ports.get(port_no)
        port.attachment = _PortGlue(self, side)
        self._deliver[side] = lambda frame: datapath.receive_packet(port_no, frame)

    def attach_host(self, side: int, host: "Host") -> None:
        host.link = self
        host.side = side
        self._deliver[side] = host.receive

    def send_from(self, side: int, frame: bytes) -> bool:
        deliver = self._deliver[1 - side]
        if deliver is None:
            return False
        return self.channels[side].send(self.sched, frame, deliver)

    @property
    def dropped(self) -> int:
        return self.channels[0].dropped + self.channels[1].dropped


class Host:
    """A traffic endpoint: sends frames into its access link and records
    what arrives."""

    def __init__(self, name: str, mac: str, ip: str):
        self.name = name
        self.mac = mac
        self.ip = ip
        self.link: Link | None = None
        self.side = 0
        self.received: list[tuple[float, bytes]] = []
        self.rx_bytes = 0
        self.sink = None  # optional callable(now, frame) replacing the log

    def send(self, frame: bytes) -> bool:
        if self.link is None:
            raise RuntimeError(f"host {self.name} is not attached to a link")
        return self.link.send_from(self.side, frame)

    def receive(self, frame: bytes) -> None:
        now = self.link.sched.clock.now()
        self.rx_bytes += len(frame)
        if self.sink is not None:
            self.sink(now, frame)
        else:
            self.received.append((now, frame))

"""Port registry: numbered ports with link state, counters and an
attachment that carries frames off-switch."""

from __future__ import annotations

from .errors import BadPort


class Port:
    def __init__(self, port_no: int, name: str = "", hw_addr: bytes = b"\x00" * 6):
        self.port_no = port_no
        self.name = name or f"port{port_no}"
        self.hw_addr = hw_addr
        self.link_up = True
        self.rx_packets = 0
        self.tx_packets = 0
        self.rx_bytes = 0
        self.tx_bytes = 0
        self.rx_dropped = 0
        self.tx_dropped = 0
        self.attachment = None  # object with send(frame), or None

    def transmit(self, frame: bytes) -> bool:
        if not self.link_up:
            self.tx_dropped += 1
            return False
        self.tx_packets += 1
        self.tx_bytes += len(frame)
        if self.attachment is not None:
            self.attachment.send(frame)
        return True


class PortRegistry:
    def __init__(self):
        self._ports: dict[int, Port] = {}

    def add(self, port_no: int, name: str = "", hw_addr: bytes = b"\x00" * 6) -> Port:
        if port_no in self._ports:
            raise BadPort(f"port {port_no} already exists")
        p = Port(port_no, name, hw_addr)
        self._ports[port_no] = p
        return p

    def get(self, port_no: int) -> Port:
        p = self._ports.get(port_no)
        if p is None:
            raise BadPort(f"port {port_no} does not exist")
        return p

    def exists(self, port_no: int) -> bool:
        return port_no in self._ports

    def is_live(self, port_no: int) -> bool:
        p = self._ports.get(port_no)
        return p is not None and p.link_up

    def set_state(self, port_no: int, up: bool) -> None:
        self.get(port_no).link_up = up

    def all(self) -> list[Port]:
        return [self._ports[n] for n in sorted(self._ports)]

    def __iter__(self):
        return iter(self.all())

    def __len__(self):
        return len(self._ports)

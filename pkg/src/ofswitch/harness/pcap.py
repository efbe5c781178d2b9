"""Classic pcap capture files: read, write, and replay into a switch port."""

from __future__ import annotations

import struct

_MAGIC_BE = 0xA1B2C3D4
_MAGIC_LE = 0xD4C3B2A1
_LINKTYPE_ETHERNET = 1


def read_pcap(path: str) -> list[tuple[float, bytes]]:
    """[(timestamp, frame), ...] from a capture file."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 24:
        raise ValueError("capture file too short for a header")
    magic = struct.unpack(">I", data[:4])[0]
    if magic == _MAGIC_BE:
        endian = ">"
    elif magic == _MAGIC_LE:
        endian = "<"
    else:
        raise ValueError(f"not a capture file (magic {magic:#x})")
    out = []
    pos = 24
    while pos + 16 <= len(data):
        ts_sec, ts_usec, caplen, _origlen = struct.unpack_from(endian + "IIII", data, pos)
        pos += 16
        if pos + caplen > len(data):
            raise ValueError("truncated packet record")
        out.append((ts_sec + ts_usec / 1e6, data[pos:pos + caplen]))
        pos += caplen
    return out


def write_pcap(path: str, packets: list[tuple[float, bytes]]) -> None:
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IHHiIII", _MAGIC_BE, 2, 4, 0, 0, 65535,
                             _LINKTYPE_ETHERNET))
        for ts, frame in packets:
            sec = int(ts)
            usec = int(round((ts - sec) * 1e6))
            fh.write(struct.pack(">IIII", sec, usec, len(frame), len(frame)))
            fh.write(frame)


def replay(sched, datapath, port_no: int, packets: list[tuple[float, bytes]],
           start_at: float = 0.0) -> None:
    """Schedule captured frames into a switch port, offsets preserved."""
    if not packets:
        return
    t0 = packets[0][0]
    for ts, frame in packets:
        sched.at(start_at + (ts - t0), datapath.receive_packet, port_no, frame)

"""Frame builders used by the harness, demos and tests."""

from __future__ import annotations

import struct

from ..oxm import encode_value
from . import checksum as ck


def mac(addr: str) -> bytes:
    return encode_value("eth_src", addr)


def ip4(addr: str) -> bytes:
    return encode_value("ipv4_src", addr)


def ethernet(dst, src, ethertype: int, payload: bytes = b"", pad_to: int = 0) -> bytes:
    frame = mac(dst) if isinstance(dst, str) else bytes(dst)
    frame += mac(src) if isinstance(src, str) else bytes(src)
    frame += struct.pack("!H", ethertype) + payload
    if len(frame) < pad_to:
        frame += b"\x00" * (pad_to - len(frame))
    return frame


def vlan_tagged(dst, src, vid: int, ethertype: int, payload: bytes = b"",
                pcp: int = 0, tpid: int = 0x8100) -> bytes:
    tag = struct.pack("!HH", tpid, (pcp << 13) | (vid & 0x0FFF))
    inner = struct.pack("!H", ethertype) + payload
    head = (mac(dst) if isinstance(dst, str) else bytes(dst))
    head += mac(src) if isinstance(src, str) else bytes(src)
    return head + tag + inner


def qinq(dst, src, s_vid: int, c_vid: int, ethertype: int, payload: bytes = b"") -> bytes:
    s_tag = struct.pack("!HH", 0x88A8, s_vid & 0x0FFF)
    c_tag = struct.pack("!HH", 0x8100, c_vid & 0x0FFF)
    head = (mac(dst) if isinstance(dst, str) else bytes(dst))
    head += mac(src) if isinstance(src, str) else bytes(src)
    return head + s_tag[:2] + s_tag[2:] + c_tag + struct.pack("!H", ethertype) + payload


def ipv4(src, dst, proto: int, payload: bytes = b"", dscp: int = 0, ecn: int = 0,
         ttl: int = 64, ident: int = 0) -> bytes:
    src_b = ip4(src) if isinstance(src, str) else bytes(src)
    dst_b = ip4(dst) if isinstance(dst, str) else bytes(dst)
    total = 20 + len(payload)
    hdr = struct.pack(
        "!BBHHHBBH4s4s",
        0x45, (dscp << 2) | ecn, total, ident, 0, ttl, proto, 0, src_b, dst_b,
    )
    hdr = bytearray(hdr)
    ck.write_ipv4_checksum(hdr, 0, 20)
    return bytes(hdr) + payload


def udp(sport: int, dport: int, payload: bytes = b"") -> bytes:
    return struct.pack("!HHHH", sport, dport, 8 + len(payload), 0) + payload


def tcp(sport: int, dport: int, payload: bytes = b"", seq: int = 0, flags: int = 0x10) -> bytes:
    hdr = struct.pack("!HHIIBBHHH", sport, dport, seq, 0, 5 << 4, flags, 8192, 0, 0)
    return hdr + payload


def udp4_frame(eth_dst, eth_src, ip_src, ip_dst, sport, dport, payload=b"",
               dscp: int = 0, pad_to: int = 60) -> bytes:
    seg = udp(sport, dport, payload)
    pkt = ipv4(ip_src, ip_dst, 17, seg, dscp=dscp)
    frame = bytearray(ethernet(eth_dst, eth_src, 0x0800, pkt))
    ck.write_l4_checksum(frame, "ipv4", 14, "udp", 34, 34 + len(seg))
    if len(frame) < pad_to:
        frame += b"\x00" * (pad_to - len(frame))
    return bytes(frame)


def tcp4_frame(eth_dst, eth_src, ip_src, ip_dst, sport, dport, payload=b"",
               pad_to: int = 60) -> bytes:
    seg = tcp(sport, dport, payload)
    pkt = ipv4(ip_src, ip_dst, 6, seg)
    frame = bytearray(ethernet(eth_dst, eth_src, 0x0800, pkt))
    ck.write_l4_checksum(frame, "ipv4", 14, "tcp", 34, 34 + len(seg))
    if len(frame) < pad_to:
        frame += b"\x00" * (pad_to - len(frame))
    return bytes(frame)


def arp_frame(op: int, sha, spa, tha, tpa, eth_dst=None) -> bytes:
    sha_b = mac(sha) if isinstance(sha, str) else bytes(sha)
    tha_b = mac(tha) if isinstance(tha, str) else bytes(tha)
    spa_b = ip4(spa) if isinstance(spa, str) else bytes(spa)
    tpa_b = ip4(tpa) if isinstance(tpa, str) else bytes(tpa)
    body = struct.pack("!HHBBH", 1, 0x0800, 6, 4, op) + sha_b + spa_b + tha_b + tpa_b
    dst = eth_dst if eth_dst is not None else (b"\xff" * 6 if op == 1 else tha_b)
    if isinstance(dst, str):
        dst = mac(dst)
    return ethernet(dst, sha_b, 0x0806, body, pad_to=60)

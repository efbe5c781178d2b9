"""In-place packet mutation: set-field and tag push/pop.

Set-field updates the buffer and the field map incrementally; a full
reparse must agree afterwards (that is the test oracle).  Tag push/pop
reparse, since they shift every later offset.
"""

from __future__ import annotations

from ..errors import FieldAbsent, PopEmpty
from ..oxm import encode_value
from . import checksum as ck
from .parse import (
    ETHERTYPE_MPLS,
    ETHERTYPE_VLAN,
    PacketHandle,
    parse,
)

# Pseudo-fields live only in the field map, not in the buffer.
PSEUDO_FIELDS = {"in_port", "in_phy_port", "metadata", "state", "tunnel_id"}


def _fix_checksums(handle: PacketHandle) -> None:
    lay = handle.layout
    if lay.l3_kind == "ipv4":
        ck.write_ipv4_checksum(handle.buffer, lay.l3_off, lay.l3_hlen)
    if lay.l4_kind and lay.l3_kind in ("ipv4", "ipv6"):
        ck.write_l4_checksum(
            handle.buffer, lay.l3_kind, lay.l3_off, lay.l4_kind, lay.l4_off, lay.l4_end
        )


def _write_vid(handle, value: bytes) -> None:
    off = handle.layout.vlan_tags[0]
    vid = int.from_bytes(value, "big") & 0x0FFF
    tci = int.from_bytes(handle.buffer[off + 2:off + 4], "big")
    tci = (tci & 0xF000) | vid
    handle.buffer[off + 2:off + 4] = tci.to_bytes(2, "big")
    handle.fields["vlan_vid"] = (0x1000 | vid).to_bytes(2, "big")


def _write_pcp(handle, value: bytes) -> None:
    off = handle.layout.vlan_tags[0]
    tci = int.from_bytes(handle.buffer[off + 2:off + 4], "big")
    tci = (tci & 0x1FFF) | ((value[0] & 0x07) << 13)
    handle.buffer[off + 2:off + 4] = tci.to_bytes(2, "big")


def _write_tos(handle, dscp=None, ecn=None) -> None:
    lay = handle.layout
    if lay.l3_kind == "ipv4":
        tos = handle.buffer[lay.l3_off + 1]
        if dscp is not None:
            tos = (dscp << 2) | (tos & 0x03)
        if ecn is not None:
            tos = (tos & 0xFC) | ecn
        handle.buffer[lay.l3_off + 1] = tos
    else:  # ipv6 traffic class straddles the first two bytes
        off = lay.l3_off
        tc = ((handle.buffer[off] & 0x0F) << 4) | (handle.buffer[off + 1] >> 4)
        if dscp is not None:
            tc = (dscp << 2) | (tc & 0x03)
        if ecn is not None:
            tc = (tc & 0xFC) | ecn
        handle.buffer[off] = (handle.buffer[off] & 0xF0) | (tc >> 4)
        handle.buffer[off + 1] = (handle.buffer[off + 1] & 0x0F) | ((tc & 0x0F) << 4)


def _write_mpls(handle, label=None, tc=None, bos=None) -> None:
    off = handle.layout.mpls_entries[0]
    entry = int.from_bytes(handle.buffer[off:off + 4], "big")
    if label is not None:
        entry = (entry & 0x00000FFF) | ((label & 0xFFFFF) << 12)
    if tc is not None:
        entry = (entry & ~0x00000E00) | ((tc & 0x07) << 9)
    if bos is not None:
        entry = (entry & ~0x00000100) | ((bos & 0x01) << 8)
    handle.buffer[off:off + 4] = entry.to_bytes(4, "big")


def apply_set_field(handle: PacketHandle, name: str, value) -> None:
    """Rewrite one header field in place; checksums are recomputed."""
    if name not in handle.fields:
        raise FieldAbsent(f"packet carries no {name}")
    vb = encode_value(name, value) if name != "vlan_vid_inner" else value

    if name in PSEUDO_FIELDS:
        handle.fields[name] = vb
        if name == "in_port":
            handle.in_port = int.from_bytes(vb, "big")
        return

    lay = handle.layout
    buf = handle.buffer
    if name == "eth_dst":
        buf[0:6] = vb
    elif name == "eth_src":
        buf[6:12] = vb
    elif name == "eth_type":
        buf[lay.eth_type_off:lay.eth_type_off + 2] = vb
    elif name == "vlan_vid":
        _write_vid(handle, vb)
        return  # vid writer maintains the presence bit in the field map
    elif name == "vlan_pcp":
        _write_pcp(handle, vb)
    elif name == "ip_dscp":
        _write_tos(handle, dscp=vb[0] & 0x3F)
    elif name == "ip_ecn":
        _write_tos(handle, ecn=vb[0] & 0x03)
    elif name == "ipv4_src":
        buf[lay.l3_off + 12:lay.l3_off + 16] = vb
    elif name == "ipv4_dst":
        buf[lay.l3_off + 16:lay.l3_off + 20] = vb
    elif name == "ip_proto":
        raise FieldAbsent("ip_proto is not writable")
    elif name in ("tcp_src", "udp_src"):
        buf[lay.l4_off:lay.l4_off + 2] = vb
    elif name in ("tcp_dst", "udp_dst"):
        buf[lay.l4_off + 2:lay.l4_off + 4] = vb
    elif name == "icmpv4_type" or name == "icmpv6_type":
        buf[lay.l4_off] = vb[0]
    elif name == "icmpv4_code" or name == "icmpv6_code":
        buf[lay.l4_off + 1] = vb[0]
    elif name == "arp_op":
        buf[lay.l3_off + 6:lay.l3_off + 8] = vb
    elif name == "arp_sha":
        buf[lay.l3_off + 8:lay.l3_off + 14] = vb
    elif name == "arp_spa":
        buf[lay.l3_off + 14:lay.l3_off + 18] = vb
    elif name == "arp_tha":
        buf[lay.l3_off + 18:lay.l3_off + 24] = vb
    elif name == "arp_tpa":
        buf[lay.l3_off + 24:lay.l3_off + 28] = vb
    elif name == "ipv6_src":
        buf[lay.l3_off + 8:lay.l3_off + 24] = vb
    elif name == "ipv6_dst":
        buf[lay.l3_off + 24:lay.l3_off + 40] = vb
    elif name == "ipv6_flabel":
        word = int.from_bytes(buf[lay.l3_off:lay.l3_off + 4], "big")
        word = (word & ~0xFFFFF) | (int.from_bytes(vb, "big") & 0xFFFFF)
        buf[lay.l3_off:lay.l3_off + 4] = word.to_bytes(4, "big")
    elif name == "mpls_label":
        _write_mpls(handle, label=int.from_bytes(vb, "big"))
    elif name == "mpls_tc":
        _write_mpls(handle, tc=vb[0])
    elif name == "mpls_bos":
        _write_mpls(handle, bos=vb[0])
    else:
        raise FieldAbsent(f"{name} is not writable")

    handle.fields[name] = vb
    _fix_checksums(handle)


def _reparse_into(handle: PacketHandle) -> None:
    fresh = parse(bytes(handle.buffer), handle.in_port)
    carry = {k: handle.fields[k] for k in PSEUDO_FIELDS if k in handle.fields}
    handle.fields = fresh.fields
    handle.fields.update(carry)
    handle.layout = fresh.layout


def push_tag(handle: PacketHandle, kind: str, ethertype: int | None = None) -> None:
    """Insert a VLAN tag or MPLS stack entry; field values copy the old
    outermost tag when one exists, else start zeroed."""
    buf = handle.buffer
    lay = handle.layout
    if kind == "vlan":
        tpid = ethertype if ethertype is not None else ETHERTYPE_VLAN
        tci = 0
        if lay.vlan_tags:
            tci = int.from_bytes(buf[lay.vlan_tags[0] + 2:lay.vlan_tags[0] + 4], "big")
        tag = tpid.to_bytes(2, "big") + tci.to_bytes(2, "big")
        buf[12:12] = tag
    elif kind == "mpls":
        tpid = ethertype if ethertype is not None else ETHERTYPE_MPLS
        if lay.mpls_entries:
            first = lay.mpls_entries[0]
            entry = int.from_bytes(buf[first:first + 4], "big") & ~0x100
        else:
            ttl = 64
            if lay.l3_kind == "ipv4":
                ttl = buf[lay.l3_off + 8]
            elif lay.l3_kind == "ipv6":
                ttl = buf[lay.l3_off + 7]
            entry = 0x100 | ttl  # bottom of stack, TTL copied from IP
        pos = lay.eth_type_off
        buf[pos:pos + 2] = tpid.to_bytes(2, "big")
        buf[pos + 2:pos + 2] = entry.to_bytes(4, "big")
    else:
        raise ValueError(f"unknown tag kind {kind!r}")
    _reparse_into(handle)


def pop_tag(handle: PacketHandle, kind: str, ethertype: int | None = None) -> None:
    buf = handle.buffer
    lay = handle.layout
    if kind == "vlan":
        if not lay.vlan_tags:
            raise PopEmpty("no VLAN tag to pop")
        off = lay.vlan_tags[0]
        del buf[off:off + 4]
    elif kind == "mpls":
        if not lay.mpls_entries:
            raise PopEmpty("no MPLS entry to pop")
        off = lay.mpls_entries[0]
        last = len(lay.mpls_entries) == 1
        del buf[off:off + 4]
        if last:
            new_type = ethertype if ethertype is not None else 0x0800
            buf[lay.eth_type_off:lay.eth_type_off + 2] = new_type.to_bytes(2, "big")
    else:
        raise ValueError(f"unknown tag kind {kind!r}")
    _reparse_into(handle)

"""In-memory representation of OpenFlow 1.3 messages.

Only the message subset the switch speaks is modelled as typed variants;
everything else decodes to :class:`Unsupported` so the channel can answer
with a bad-request error instead of dropping the connection.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield
from typing import List, Optional

from .oxm import MatchSet

OFP_VERSION = 0x04
OFP_HEADER_LEN = 8

# message types
OFPT_HELLO = 0
OFPT_ERROR = 1
OFPT_ECHO_REQUEST = 2
OFPT_ECHO_REPLY = 3
OFPT_EXPERIMENTER = 4
OFPT_FEATURES_REQUEST = 5
OFPT_FEATURES_REPLY = 6
OFPT_PACKET_IN = 10
OFPT_FLOW_REMOVED = 11
OFPT_PACKET_OUT = 13
OFPT_FLOW_MOD = 14
OFPT_GROUP_MOD = 15
OFPT_MULTIPART_REQUEST = 18
OFPT_MULTIPART_REPLY = 19
OFPT_METER_MOD = 29

# reserved ports
OFPP_MAX = 0xFFFFFF00
OFPP_IN_PORT = 0xFFFFFFF8
OFPP_TABLE = 0xFFFFFFF9
OFPP_NORMAL = 0xFFFFFFFA
OFPP_FLOOD = 0xFFFFFFFB
OFPP_ALL = 0xFFFFFFFC
OFPP_CONTROLLER = 0xFFFFFFFD
OFPP_LOCAL = 0xFFFFFFFE
OFPP_ANY = 0xFFFFFFFF

OFPG_ANY = 0xFFFFFFFF
OFPG_ALL = 0xFFFFFFFC
OFPTT_ALL = 0xFF
OFP_NO_BUFFER = 0xFFFFFFFF
OFPCML_NO_BUFFER = 0xFFFF

# flow-mod commands
OFPFC_ADD = 0
OFPFC_MODIFY = 1
OFPFC_MODIFY_STRICT = 2
OFPFC_DELETE = 3
OFPFC_DELETE_STRICT = 4

# flow-mod flags
OFPFF_SEND_FLOW_REM = 1 << 0
OFPFF_CHECK_OVERLAP = 1 << 1

# flow-removed reasons
OFPRR_IDLE_TIMEOUT = 0
OFPRR_HARD_TIMEOUT = 1
OFPRR_DELETE = 2

# packet-in reasons
OFPR_NO_MATCH = 0
OFPR_ACTION = 1

# group commands / types
OFPGC_ADD = 0
OFPGC_MODIFY = 1
OFPGC_DELETE = 2
OFPGT_ALL = 0
OFPGT_SELECT = 1
OFPGT_INDIRECT = 2
OFPGT_FF = 3

# meter commands / flags / bands
OFPMC_ADD = 0
OFPMC_MODIFY = 1
OFPMC_DELETE = 2
OFPMF_KBPS = 1 << 0
OFPMF_PKTPS = 1 << 1
OFPMF_BURST = 1 << 2
OFPMF_STATS = 1 << 3
OFPMBT_DROP = 1
OFPMBT_DSCP_REMARK = 2

# multipart kinds
OFPMP_FLOW = 1
OFPMP_PORT_STATS = 4
OFPMP_GROUP = 6
OFPMP_METER = 9
OFPMP_PORT_DESC = 13
OFPMP_EXPERIMENTER = 0xFFFF

# error types
OFPET_HELLO_FAILED = 0
OFPET_BAD_REQUEST = 1
OFPET_BAD_ACTION = 2
OFPET_BAD_INSTRUCTION = 3
OFPET_BAD_MATCH = 4
OFPET_FLOW_MOD_FAILED = 5
OFPET_GROUP_MOD_FAILED = 6
OFPET_METER_MOD_FAILED = 12
OFPET_EXPERIMENTER = 0xFFFF

# a few error codes the switch emits
OFPHFC_INCOMPATIBLE = 0
OFPBRC_BAD_TYPE = 1
OFPBRC_BAD_LEN = 2
OFPBRC_BAD_TABLE_ID = 9
OFPFMFC_OVERLAP = 1
OFPFMFC_BAD_TABLE_ID = 2
OFPBIC_BAD_TABLE_ID = 2
OFPBMC_BAD_FIELD = 6
OFPGMFC_INVALID_GROUP = 10
OFPGMFC_UNKNOWN_GROUP = 0xF0  # internal rendering only
OFPMMFC_UNKNOWN_METER = 8


@dataclass(frozen=True)
class OfHeader:
    version: int
    msg_type: int
    length: int
    xid: int


# -- actions -----------------------------------------------------------------

@dataclass(frozen=True)
class OutputAction:
    port: int
    max_len: int = OFPCML_NO_BUFFER


@dataclass(frozen=True)
class GroupAction:
    group_id: int


@dataclass(frozen=True)
class PushVlanAction:
    ethertype: int = 0x8100


@dataclass(frozen=True)
class PopVlanAction:
    pass


@dataclass(frozen=True)
class PushMplsAction:
    ethertype: int = 0x8847


@dataclass(frozen=True)
class PopMplsAction:
    ethertype: int = 0x0800


@dataclass(frozen=True)
class SetFieldAction:
    field: "OxmFieldLike"


@dataclass(frozen=True)
class ExperimenterAction:
    experimenter_id: int
    payload: bytes


@dataclass(frozen=True)
class SetStateAction:
    """Fast-path state write against a stateful flow table."""

    table_id: int
    next_state: int
    idle_timeout: int = 0
    idle_rollback: int = 0
    hard_timeout: int = 0
    hard_rollback: int = 0
    use_lookup_scope: bool = False  # default: key extracted with update scope


@dataclass(frozen=True)
class PktGenAction:
    """Emit a registered packet template, substituting trigger fields."""

    template_id: int
    stop_processing: bool = False  # True drops the triggering packet afterwards


Action = object  # documentation alias; actions are the dataclasses above
OxmFieldLike = object


# -- instructions --------------------------------------------------------------

@dataclass(frozen=True)
class GotoTable:
    table_id: int


@dataclass(frozen=True)
class WriteMetadata:
    metadata: int
    mask: int = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class WriteActions:
    actions: tuple

    def __init__(self, actions):
        object.__setattr__(self, "actions", tuple(actions))


@dataclass(frozen=True)
class ApplyActions:
    actions: tuple

    def __init__(self, actions):
        object.__setattr__(self, "actions", tuple(actions))


@dataclass(frozen=True)
class ClearActions:
    pass


@dataclass(frozen=True)
class MeterInstruction:
    meter_id: int


# -- group / meter pieces -------------------------------------------------------

@dataclass(frozen=True)
class Bucket:
    actions: tuple
    weight: int = 0
    watch_port: int = OFPP_ANY
    watch_group: int = OFPG_ANY

    def __init__(self, actions, weight=0, watch_port=OFPP_ANY, watch_group=OFPG_ANY):
        object.__setattr__(self, "actions", tuple(actions))
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "watch_port", watch_port)
        object.__setattr__(self, "watch_group", watch_group)


@dataclass(frozen=True)
class DropBand:
    rate: int
    burst: int = 0


@dataclass(frozen=True)
class DscpRemarkBand:
    rate: int
    burst: int = 0
    prec_level: int = 1


# -- message bodies --------------------------------------------------------------

@dataclass(frozen=True)
class Hello:
    pass


@dataclass(frozen=True)
class Error:
    err_type: int
    code: int
    data: bytes = b""


@dataclass(frozen=True)
class EchoRequest:
    payload: bytes = b""


@dataclass(frozen=True)
class EchoReply:
    payload: bytes = b""


@dataclass(frozen=True)
class FeaturesRequest:
    pass


@dataclass(frozen=True)
class FeaturesReply:
    datapath_id: int
    n_buffers: int
    n_tables: int
    capabilities: int
    aux_id: int = 0


@dataclass
class FlowMod:
    table_id: int = 0
    command: int = OFPFC_ADD
    match: MatchSet = dfield(default_factory=MatchSet)
    priority: int = 0
    idle_timeout: int = 0
    hard_timeout: int = 0
    cookie: int = 0
    cookie_mask: int = 0
    flags: int = 0
    instructions: list = dfield(default_factory=list)
    buffer_id: int = OFP_NO_BUFFER
    out_port: int = OFPP_ANY
    out_group: int = OFPG_ANY

    def __eq__(self, other):
        if not isinstance(other, FlowMod):
            return NotImplemented
        return (
            (self.table_id, self.command, self.priority, self.idle_timeout,
             self.hard_timeout, self.cookie, self.cookie_mask, self.flags,
             self.buffer_id, self.out_port, self.out_group)
            == (other.table_id, other.command, other.priority, other.idle_timeout,
                other.hard_timeout, other.cookie, other.cookie_mask, other.flags,
                other.buffer_id, other.out_port, other.out_group)
            and self.match == other.match
            and tuple(self.instructions) == tuple(other.instructions)
        )


@dataclass
class GroupMod:
    command: int
    group_type: int
    group_id: int
    buckets: list = dfield(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, GroupMod):
            return NotImplemented
        return (self.command, self.group_type, self.group_id, tuple(self.buckets)) == (
            other.command, other.group_type, other.group_id, tuple(other.buckets))


@dataclass
class MeterMod:
    command: int
    flags: int
    meter_id: int
    bands: list = dfield(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, MeterMod):
            return NotImplemented
        return (self.command, self.flags, self.meter_id, tuple(self.bands)) == (
            other.command, other.flags, other.meter_id, tuple(other.bands))


@dataclass
class PacketIn:
    buffer_id: int
    reason: int
    table_id: int
    match: MatchSet
    payload: bytes
    cookie: int = 0
    total_len: Optional[int] = None

    def __eq__(self, other):
        if not isinstance(other, PacketIn):
            return NotImplemented
        return (
            (self.buffer_id, self.reason, self.table_id, self.payload, self.cookie)
            == (other.buffer_id, other.reason, other.table_id, other.payload, other.cookie)
            and self.match == other.match
            and (self.total_len or len(self.payload)) == (other.total_len or len(other.payload))
        )


@dataclass
class PacketOut:
    buffer_id: int
    in_port: int
    actions: list
    payload: bytes

    def __eq__(self, other):
        if not isinstance(other, PacketOut):
            return NotImplemented
        return (self.buffer_id, self.in_port, tuple(self.actions), self.payload) == (
            other.buffer_id, other.in_port, tuple(other.actions), other.payload)


@dataclass
class FlowRemoved:
    cookie: int
    priority: int
    reason: int
    table_id: int
    duration_sec: int
    duration_nsec: int
    idle_timeout: int
    hard_timeout: int
    packet_count: int
    byte_count: int
    match: MatchSet


@dataclass
class MultipartRequest:
    kind: int
    body: object = None
    flags: int = 0


@dataclass
class MultipartReply:
    kind: int
    body: object = None
    flags: int = 0

    def __eq__(self, other):
        if not isinstance(other, MultipartReply):
            return NotImplemented
        mine = tuple(self.body) if isinstance(self.body, list) else self.body
        theirs = tuple(other.body) if isinstance(other.body, list) else other.body
        return (self.kind, self.flags, mine) == (other.kind, other.flags, theirs)


@dataclass(frozen=True)
class Experimenter:
    experimenter_id: int
    exp_type: int
    payload: bytes = b""


@dataclass(frozen=True)
class Unsupported:
    msg_type: int
    raw: bytes


# -- multipart bodies -------------------------------------------------------------

@dataclass
class FlowStatsRequest:
    table_id: int = OFPTT_ALL
    out_port: int = OFPP_ANY
    out_group: int = OFPG_ANY
    cookie: int = 0
    cookie_mask: int = 0
    match: MatchSet = dfield(default_factory=MatchSet)

    def __eq__(self, other):
        if not isinstance(other, FlowStatsRequest):
            return NotImplemented
        return (self.table_id, self.out_port, self.out_group, self.cookie,
                self.cookie_mask) == (other.table_id, other.out_port, other.out_group,
                                      other.cookie, other.cookie_mask) and self.match == other.match


@dataclass
class FlowStats:
    table_id: int
    duration_sec: int
    duration_nsec: int
    priority: int
    idle_timeout: int
    hard_timeout: int
    flags: int
    cookie: int
    packet_count: int
    byte_count: int
    match: MatchSet
    instructions: list

    def __eq__(self, other):
        if not isinstance(other, FlowStats):
            return NotImplemented
        return (
            (self.table_id, self.duration_sec, self.duration_nsec, self.priority,
             self.idle_timeout, self.hard_timeout, self.flags, self.cookie,
             self.packet_count, self.byte_count)
            == (other.table_id, other.duration_sec, other.duration_nsec, other.priority,
                other.idle_timeout, other.hard_timeout, other.flags, other.cookie,
                other.packet_count, other.byte_count)
            and self.match == other.match
            and tuple(self.instructions) == tuple(other.instructions)
        )

    def __hash__(self):
        return hash((self.table_id, self.priority, self.cookie))


@dataclass(frozen=True)
class PortStatsRequest:
    port_no: int = OFPP_ANY


@dataclass(frozen=True)
class PortStats:
    port_no: int
    rx_packets: int
    tx_packets: int
    rx_bytes: int
    tx_bytes: int
    rx_dropped: int
    tx_dropped: int
    rx_errors: int = 0
    tx_errors: int = 0
    duration_sec: int = 0
    duration_nsec: int = 0


@dataclass(frozen=True)
class PortDescRequest:
    pass


@dataclass(frozen=True)
class PortDesc:
    port_no: int
    hw_addr: bytes
    name: str
    config: int = 0
    state: int = 0  # bit 0: link down


@dataclass(frozen=True)
class GroupStatsRequest:
    group_id: int = OFPG_ALL


@dataclass(frozen=True)
class GroupStats:
    group_id: int
    ref_count: int
    packet_count: int
    byte_count: int
    bucket_stats: tuple = ()


@dataclass(frozen=True)
class MeterStatsRequest:
    meter_id: int = 0xFFFFFFFF


@dataclass(frozen=True)
class MeterStats:
    meter_id: int
    flow_count: int
    packet_in_count: int
    byte_in_count: int


@dataclass(frozen=True)
class StateStatsRequest:
    """Experimenter multipart body: dump a table's state entries."""

    table_id: int


@dataclass(frozen=True)
class StateStats:
    table_id: int
    entries: tuple  # of (key bytes, state int)


# -- top-level message ---------------------------------------------------------------

_BODY_TYPE = {
    Hello: OFPT_HELLO,
    Error: OFPT_ERROR,
    EchoRequest: OFPT_ECHO_REQUEST,
    EchoReply: OFPT_ECHO_REPLY,
    Experimenter: OFPT_EXPERIMENTER,
    FeaturesRequest: OFPT_FEATURES_REQUEST,
    FeaturesReply: OFPT_FEATURES_REPLY,
    PacketIn: OFPT_PACKET_IN,
    FlowRemoved: OFPT_FLOW_REMOVED,
    PacketOut: OFPT_PACKET_OUT,
    FlowMod: OFPT_FLOW_MOD,
    GroupMod: OFPT_GROUP_MOD,
    MultipartRequest: OFPT_MULTIPART_REQUEST,
    MultipartReply: OFPT_MULTIPART_REPLY,
    MeterMod: OFPT_METER_MOD,
}


@dataclass
class OfMessage:
    xid: int
    body: object

    @property
    def msg_type(self) -> int:
        if isinstance(self.body, Unsupported):
            return self.body.msg_type
        return _BODY_TYPE[type(self.body)]

    @property
    def header(self) -> OfHeader:
        from . import wire  # local import to avoid a cycle

        return OfHeader(OFP_VERSION, self.msg_type, len(wire.pack(self)), self.xid)

    def __eq__(self, other):
        if not isinstance(other, OfMessage):
            return NotImplemented
        return self.xid == other.xid and self.body == other.body


def body_msg_type(body) -> int:
    if isinstance(body, Unsupported):
        return body.msg_type
    return _BODY_TYPE[type(body)]

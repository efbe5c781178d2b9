"""User-space OpenFlow 1.3 software switch.

A pure-Python match-action pipeline with a binary wire codec, stateful
forwarding extensions, an in-process network harness for deterministic
experiments, and a small command-line administration tool.
"""

from .datapath import Datapath, PacketInEvent, PipelineResult
from .oxm import MatchSet, OxmField, make_field
from .pkt.parse import PacketHandle, parse

__version__ = "0.1.0"

__all__ = [
    "Datapath",
    "PacketInEvent",
    "PipelineResult",
    "MatchSet",
    "OxmField",
    "make_field",
    "PacketHandle",
    "parse",
    "__version__",
]

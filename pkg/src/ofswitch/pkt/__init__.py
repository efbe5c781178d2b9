from .parse import PacketHandle, parse
from .edit import apply_set_field, push_tag, pop_tag

__all__ = ["PacketHandle", "parse", "apply_set_field", "push_tag", "pop_tag"]

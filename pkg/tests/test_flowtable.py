"""Flow table semantics: ordering, replacement, selection, timeouts."""

import pytest

from ofswitch import messages as m
from ofswitch.errors import BadInstruction, BadTableId, OverlapError
from ofswitch.flowtable import FlowEntry, FlowTable
from ofswitch.oxm import MatchSet


def entry(priority, seq, pairs=None, **kw):
    return FlowEntry(MatchSet.from_pairs(pairs or {}), priority, [],
                     insertion_seq=seq, **kw)


def test_priority_order_then_insertion_order():
    t = FlowTable(0)
    a = entry(10, 1, {"in_port": 1})
    b = entry(20, 2, {"in_port": 1})
    c = entry(20, 3, {"eth_type": 0x0800})
    for e in (a, b, c):
        t.insert(e)
    assert t.entries == [b, c, a]


def test_lookup_picks_highest_priority_match():
    t = FlowTable(0)
    low = entry(1, 1, {"in_port": 2})
    high = entry(9, 2, {"in_port": 2})
    t.insert(low)
    t.insert(high)
    got = t.lookup({"in_port": (2).to_bytes(4, "big")}, 0.0, 100)
    assert got is high
    assert high.packet_count == 1 and high.byte_count == 100
    assert low.packet_count == 0


def test_equal_priority_first_inserted_wins():
    t = FlowTable(0)
    first = entry(5, 1, {"in_port": 3})
    second = entry(5, 2, {"in_port": 3, "eth_type": 0x0800})
    t.insert(first)
    t.insert(second)
    fields = {"in_port": (3).to_bytes(4, "big"), "eth_type": b"\x08\x00"}
    assert t.lookup(fields) is first


def test_identical_match_and_priority_replaces():
    t = FlowTable(0)
    old = entry(5, 1, {"in_port": 1})
    new = entry(5, 2, {"in_port": 1})
    t.insert(old)
    replaced = t.insert(new)
    assert replaced is old
    assert len(t) == 1


def test_table_miss_is_priority_zero_empty_match():
    miss = entry(0, 1)
    assert miss.is_table_miss()
    assert not entry(1, 1).is_table_miss()
    assert not entry(0, 1, {"in_port": 1}).is_table_miss()


def test_miss_entry_catches_everything():
    t = FlowTable(0)
    t.insert(entry(0, 1))
    assert t.lookup({"eth_type": b"\x86\xdd"}) is not None


def test_strict_select_needs_exact_match_and_priority():
    t = FlowTable(0)
    e = entry(5, 1, {"in_port": 1})
    t.insert(e)
    assert t.select(MatchSet.from_pairs({"in_port": 1}), True, 5) == [e]
    assert t.select(MatchSet.from_pairs({"in_port": 1}), True, 6) == []
    assert t.select(MatchSet(), True, 5) == []


def test_nonstrict_select_is_subset_based():
    t = FlowTable(0)
    narrow = entry(5, 1, {"in_port": 1, "eth_type": 0x0800})
    wide = entry(5, 2, {"in_port": 1})
    other = entry(5, 3, {"in_port": 2})
    for e in (narrow, wide, other):
        t.insert(e)
    got = t.select(MatchSet.from_pairs({"in_port": 1}), False)
    assert set(map(id, got)) == {id(narrow), id(wide)}
    assert t.select(MatchSet(), False) == t.entries


def test_cookie_filter_on_select():
    t = FlowTable(0)
    a = entry(5, 1, {"in_port": 1}, cookie=0x11)
    b = entry(5, 2, {"in_port": 2}, cookie=0x22)
    t.insert(a)
    t.insert(b)
    got = t.select(MatchSet(), False, cookie=0x22, cookie_mask=0xFF)
    assert got == [b]


def test_hard_timeout_boundary_inclusive(clock):
    e = entry(1, 1, hard_timeout=10)
    e.install_time = e.last_match_time = 0.0
    assert not e.expired(9.999)
    assert e.expired(10.0)
    assert e.expiry_reason(10.0) == m.OFPRR_HARD_TIMEOUT


def test_idle_timeout_resets_on_match():
    t = FlowTable(0)
    e = entry(1, 1, {"in_port": 1}, idle_timeout=5)
    t.insert(e)
    t.lookup({"in_port": (1).to_bytes(4, "big")}, now=4.0)
    assert not e.expired(8.9)
    assert e.expired(9.0)
    assert e.expiry_reason(9.0) == m.OFPRR_IDLE_TIMEOUT


def test_timeout_index_only_tracks_entries_with_timeouts():
    t = FlowTable(0)
    t.insert(entry(1, 1, {"in_port": 1}))
    t.insert(entry(1, 2, {"in_port": 2}, idle_timeout=1))
    assert len(t.timeout_index) == 1


def test_goto_validation():
    ok = FlowEntry(MatchSet(), 1, [m.GotoTable(5)])
    ok.validate_instructions(2, 64)
    with pytest.raises(BadInstruction):
        FlowEntry(MatchSet(), 1, [m.GotoTable(2)]).validate_instructions(2, 64)
    with pytest.raises(BadInstruction):
        FlowEntry(MatchSet(), 1, [m.GotoTable(1)]).validate_instructions(2, 64)
    with pytest.raises(BadInstruction):
        FlowEntry(MatchSet(), 1, [m.GotoTable(64)]).validate_instructions(2, 64)
    with pytest.raises(BadInstruction):
        FlowEntry(MatchSet(), 1,
                  [m.GotoTable(5), m.GotoTable(6)]).validate_instructions(2, 64)


def test_flow_mod_check_overlap(datapath):
    fm1 = m.FlowMod(command=m.OFPFC_ADD, priority=5,
                    match=MatchSet.from_pairs({"in_port": 1}))
    datapath.flow_mod(fm1)
    overlapping = m.FlowMod(command=m.OFPFC_ADD, priority=5,
                            match=MatchSet.from_pairs({"eth_type": 0x0800}),
                            flags=m.OFPFF_CHECK_OVERLAP)
    with pytest.raises(OverlapError):
        datapath.flow_mod(overlapping)
    # different priority never overlaps
    overlapping.priority = 6
    datapath.flow_mod(overlapping)
    # disjoint matches at the same priority are fine
    disjoint = m.FlowMod(command=m.OFPFC_ADD, priority=5,
                         match=MatchSet.from_pairs({"in_port": 2}),
                         flags=m.OFPFF_CHECK_OVERLAP)
    datapath.flow_mod(disjoint)


def test_flow_mod_bad_table(datapath):
    with pytest.raises(BadTableId):
        datapath.flow_mod(m.FlowMod(command=m.OFPFC_ADD, table_id=64))


def test_delete_all_tables(datapath):
    for t in (0, 1, 5):
        datapath.flow_mod(m.FlowMod(command=m.OFPFC_ADD, table_id=t, priority=1,
                                    match=MatchSet.from_pairs({"in_port": 1})))
    datapath.flow_mod(m.FlowMod(command=m.OFPFC_DELETE, table_id=m.OFPTT_ALL))
    assert all(len(t) == 0 for t in datapath.tables)


def test_expire_notifies_with_flag(datapath, clock):
    removed = []
    datapath.flow_removed_sink = lambda e, reason, tid: removed.append((e, reason, tid))
    datapath.flow_mod(m.FlowMod(command=m.OFPFC_ADD, priority=1, hard_timeout=5,
                                match=MatchSet.from_pairs({"in_port": 1}),
                                flags=m.OFPFF_SEND_FLOW_REM))
    datapath.flow_mod(m.FlowMod(command=m.OFPFC_ADD, priority=2, hard_timeout=5,
                                match=MatchSet.from_pairs({"in_port": 2})))
    clock.advance(6)
    gone = datapath.expire()
    assert len(gone) == 2
    assert len(removed) == 1  # only the flagged entry is announced
    assert removed[0][1] == m.OFPRR_HARD_TIMEOUT

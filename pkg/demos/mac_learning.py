"""MAC learning entirely in the data plane.

A single stateful flow table remembers, per MAC address, which port last
sent from that address.  Unknown destinations are flooded; once a station
has spoken, traffic towards it is unicast — with no controller involved.

Run: python3 demos/mac_learning.py
"""

from ofswitch import messages as m
from ofswitch.datapath import Datapath
from ofswitch.oxm import MatchSet
from ofswitch.pkt import build
from ofswitch.stateful import StateTableConfig

N_PORTS = 4


def build_switch():
    dp = Datapath(datapath_id=1)
    for n in range(1, N_PORTS + 1):
        dp.ports.add(n)
    # key the state table on eth_dst for lookup, eth_src for update:
    # "state" becomes "the port this MAC was last seen on" (0 = unknown)
    dp.configure_state_table(StateTableConfig(0, ["eth_dst"], ["eth_src"]))
    for in_port in range(1, N_PORTS + 1):
        learn = m.SetStateAction(0, in_port)
        dp.flow_mod(m.FlowMod(
            command=m.OFPFC_ADD, priority=10,
            match=MatchSet.from_pairs({"in_port": in_port, "state": 0}),
            instructions=[m.ApplyActions([learn, m.OutputAction(m.OFPP_FLOOD)])]))
        for out_port in range(1, N_PORTS + 1):
            dp.flow_mod(m.FlowMod(
                command=m.OFPFC_ADD, priority=20,
                match=MatchSet.from_pairs({"in_port": in_port,
                                           "state": out_port}),
                instructions=[m.ApplyActions([learn,
                                              m.OutputAction(out_port)])]))
    return dp


def main():
    dp = build_switch()

    def mac(i):
        return f"02:00:00:00:00:{i:02x}"

    def send(port, src, dst, note):
        frame = build.udp4_frame(mac(dst), mac(src),
                                 f"10.0.0.{src}", f"10.0.0.{dst}", 5, 5, b"demo")
        res = dp.receive_packet(port, frame)
        print(f"{note}: host{src}@port{port} -> host{dst}, "
              f"egress ports {[p for p, _ in res.egress]}")

    send(1, 1, 2, "first packet, destination unknown (flooded)")
    send(2, 2, 1, "reply (source of the first packet was learned)")
    send(1, 1, 2, "second packet (both ends learned, unicast)")
    send(3, 3, 1, "a third station joins and speaks to host1")

    table = dp.state_tables[0]
    print("\nlearned state table (MAC -> port):")
    for key, entry in sorted(table.entries.items()):
        print(f"  {key.hex(':')} -> port {entry.state}")


if __name__ == "__main__":
    main()

"""Fast failover without the controller.

A FAST_FAILOVER group watches two ports and always forwards through the
first live one.  When the primary port goes down, the very next packet
takes the backup path — with the control channel silent throughout.

Run: python3 demos/fast_failover.py
"""

from ofswitch import messages as m
from ofswitch.channel import SwitchConnection
from ofswitch.datapath import Datapath
from ofswitch.oxm import MatchSet
from ofswitch.pkt import build
from ofswitch import wire


def main():
    dp = Datapath(datapath_id=1)
    for n in (1, 2, 3):
        dp.ports.add(n)

    # a controller session that records everything the switch tells it
    sent_to_controller = []
    conn = SwitchConnection(dp, sent_to_controller.append)
    conn.start()
    conn.feed(wire.pack(m.OfMessage(0, m.Hello())))
    conn.feed(wire.pack(m.OfMessage(1, m.GroupMod(
        m.OFPGC_ADD, m.OFPGT_FF, 1, [
            m.Bucket(actions=[m.OutputAction(2)], watch_port=2),
            m.Bucket(actions=[m.OutputAction(3)], watch_port=3)]))))
    conn.feed(wire.pack(m.OfMessage(2, m.FlowMod(
        command=m.OFPFC_ADD, priority=1, match=MatchSet.from_pairs({}),
        instructions=[m.ApplyActions([m.GroupAction(1)])]))))
    sent_to_controller.clear()  # configuration done; count from here

    frame = build.udp4_frame("02:00:00:00:00:02", "02:00:00:00:00:01",
                             "10.0.0.1", "10.0.0.2", 5, 5, b"demo")

    res = dp.receive_packet(1, frame)
    print(f"port 2 up:   packet egresses port {res.egress[0][0]} (primary)")

    dp.ports.set_state(2, up=False)
    print("port 2 goes down")
    for i in range(3):
        res = dp.receive_packet(1, frame)
        print(f"packet {i + 1}:    egresses port {res.egress[0][0]} (backup), "
              f"dropped={res.dropped}")

    dp.ports.set_state(2, up=True)
    res = dp.receive_packet(1, frame)
    print(f"port 2 back: packet egresses port {res.egress[0][0]} again")
    print(f"messages sent to the controller during all of this: "
          f"{len(sent_to_controller)}")


if __name__ == "__main__":
    main()

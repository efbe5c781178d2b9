"""In-switch ARP responder.

The switch owns a packet template holding a ready-made ARP reply for a
protected server address.  A flow entry matching ARP requests for that
address triggers the template; slots copy the asker's addresses from the
request into the reply, which leaves through the ingress port.  The server
and the controller never see the request.

Run: python3 demos/arp_responder.py
"""

from ofswitch import messages as m
from ofswitch.datapath import Datapath
from ofswitch.oxm import MatchSet
from ofswitch.pkt import build, parse
from ofswitch.stateful import PacketTemplate, TemplateSlot

SERVER_MAC = "02:00:00:00:00:99"
SERVER_IP = "10.0.0.99"


def build_switch():
    dp = Datapath(datapath_id=1)
    for n in range(1, 5):
        dp.ports.add(n)
    # an ARP reply frame with the asker's addresses left blank
    template = build.arp_frame(2, SERVER_MAC, SERVER_IP,
                               "00:00:00:00:00:00", "0.0.0.0")
    dp.register_template(PacketTemplate(1, template, [
        TemplateSlot(0, "arp_sha"),    # ethernet destination <- asker MAC
        TemplateSlot(32, "arp_sha"),   # ARP target hardware <- asker MAC
        TemplateSlot(38, "arp_spa"),   # ARP target protocol <- asker IP
    ], ("in_port",)))
    dp.flow_mod(m.FlowMod(
        command=m.OFPFC_ADD, priority=10,
        match=MatchSet.from_pairs({"eth_type": 0x0806, "arp_op": 1,
                                   "arp_tpa": SERVER_IP}),
        instructions=[m.ApplyActions([m.PktGenAction(1, stop_processing=True)])]))
    return dp


def main():
    dp = build_switch()
    asker_mac, asker_ip = "02:00:00:00:00:01", "10.0.0.1"
    request = build.arp_frame(1, asker_mac, asker_ip,
                              "00:00:00:00:00:00", SERVER_IP)
    print(f"host {asker_ip} asks on port 3: who has {SERVER_IP}?")
    res = dp.receive_packet(3, request)
    (port, reply), = res.egress
    fields = parse(reply, port).fields
    print(f"switch answers on port {port}: "
          f"{SERVER_IP} is at {fields['arp_sha'].hex(':')}")
    print(f"reply addressed to {fields['eth_dst'].hex(':')} "
          f"({'.'.join(map(str, fields['arp_tpa']))})")
    print(f"packets that reached the server: "
          f"{sum(p.tx_packets for p in dp.ports)}"
          f" (the reply) — the request itself was consumed")


if __name__ == "__main__":
    main()

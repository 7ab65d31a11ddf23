from .base import (
    Action, CancelTimer, DeferConfig, Drop, DuplicateOrigination, Forward, OutOfRange, Packet,
    ProtocolName, SetTimer, StaleTimer, defer_time,
)
from .baselines import FloodingNode, OdamNode, ProtocolNode, WpbmNode
from .odamc import OdamcNode
from .packet_list import PacketList, PacketListEntry

PROTOCOLS = tuple(p.value for p in ProtocolName)


def make_node(protocol: str, node_id: int, plane=None, defer=None, *, p_fwd=0.5, rng=None,
              l1_capacity=64, l0_capacity=64, angle_vertex="receiver",
              branch_polarity="prose", record_angles=False) -> ProtocolNode:
    protocol = ProtocolName(protocol)
    if protocol is ProtocolName.FLOODING:
        return FloodingNode(node_id, plane)
    if protocol is ProtocolName.WPBM:
        return WpbmNode(node_id, plane, p_fwd=p_fwd, rng=rng)
    if protocol is ProtocolName.ODAM:
        return OdamNode(node_id, plane, defer)
    return OdamcNode(node_id, plane, defer, l1_capacity=l1_capacity, l0_capacity=l0_capacity,
                     angle_vertex=angle_vertex, branch_polarity=branch_polarity,
                     record_angles=record_angles)


__all__ = [
    "Action", "CancelTimer", "DeferConfig", "Drop", "DuplicateOrigination", "FloodingNode",
    "Forward", "OdamNode", "OdamcNode", "OutOfRange", "PROTOCOLS", "Packet", "PacketList",
    "PacketListEntry", "ProtocolName", "ProtocolNode", "SetTimer", "StaleTimer", "WpbmNode",
    "defer_time", "make_node",
]

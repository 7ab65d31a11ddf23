import numpy as np
import pytest

from odamc import scenario as sc
from odamc.protocols import (
    CancelTimer, DeferConfig, Drop, DuplicateOrigination, FloodingNode, Forward, OdamcNode,
    OdamNode, OutOfRange, Packet, PacketList, PacketListEntry, SetTimer, WpbmNode, defer_time,
    make_node,
)
from odamc.simulation import run, run_static

DEFER = DeferConfig(max_defer_time=1.0, epsilon=2, range=300.0)


def _pkt(seq=0, origin=9, sender_pos=(-100.0, 0.0), sender=9):
    return Packet.originate(origin, seq, sender_pos, 0.0).stamped(sender, sender_pos)


# -- defer time

@pytest.mark.parametrize("d, expected", [(0.0, 1.0), (300.0, 0.0), (150.0, 0.75)])
def test_defer_time_examples(d, expected):
    assert defer_time(d, DEFER) == expected


@pytest.mark.parametrize("d", [-0.1, 300.1])
def test_defer_time_out_of_range(d):
    with pytest.raises(OutOfRange):
        defer_time(d, DEFER)


def test_defer_time_monotone():
    ds = np.linspace(0, 300, 301)
    ts = [defer_time(float(d), DEFER) for d in ds]
    assert all(a >= b for a, b in zip(ts, ts[1:]))


# -- LRU list

def _entry(k):
    return PacketListEntry(Packet.originate(0, k, (0, 0), 0.0), (0.0, 0.0))


def test_lru_evicts_oldest():
    pl = PacketList("L1", 2)
    assert pl.insert(_entry(1), 0.0) is None
    assert pl.insert(_entry(2), 1.0) is None
    assert pl.insert(_entry(3), 2.0).packet_id == (0, 1)


def test_lru_touch_refreshes():
    pl = PacketList("L1", 2)
    pl.insert(_entry(1), 0.0)
    pl.insert(_entry(2), 1.0)
    pl.touch((0, 1), 1.5)
    assert pl.insert(_entry(3), 2.0).packet_id == (0, 2)
    assert [e.packet_id for e in pl] == [(0, 1), (0, 3)]


def test_eviction_cancels_pending_timer():
    node = OdamcNode(0, defer=DEFER, l1_capacity=1)
    node.on_receive(_pkt(0), 0.0, (0.0, 0.0))
    node.timer_started((9, 0), 41)
    actions = node.on_receive(_pkt(1), 0.1, (0.0, 0.0))
    assert actions[0] == CancelTimer((9, 0), 41)
    assert isinstance(actions[1], SetTimer)
    # the evicted entry's timer is stale if it fires anyway
    assert node.on_timer_expiry((9, 0), 41, 0.5) == []


def test_originate_with_full_list_evicts():
    node = OdamcNode(0, defer=DEFER, l1_capacity=1)
    node.on_receive(_pkt(0), 0.0, (0.0, 0.0))
    node.timer_started((9, 0), 5)
    own = Packet.originate(0, 0, (0.0, 0.0), 1.0)
    assert set(node.on_originate(own, 1.0, (0.0, 0.0))) == {CancelTimer((9, 0), 5), Forward(own)}
    assert node.entry((9, 0)) is None


# -- baseline handlers

def test_flooding_node():
    n = FloodingNode(1)
    assert n.on_receive(_pkt(), 0.0, (0, 0)) == [Forward(_pkt())]
    assert isinstance(n.on_receive(_pkt(), 0.1, (0, 0))[0], Drop)


def test_double_origination_rejected():
    for proto in ("flooding", "wpbm", "odam", "odam-c"):
        node = make_node(proto, 3, defer=DEFER, rng=np.random.default_rng(0))
        pkt = Packet.originate(3, 0, (0.0, 0.0), 0.0)
        assert node.on_originate(pkt, 0.0, (0.0, 0.0)) == [Forward(pkt)]
        with pytest.raises(DuplicateOrigination):
            node.on_originate(pkt, 1.0, (0.0, 0.0))


def test_wpbm_probability_extremes():
    rng = np.random.default_rng(0)
    assert isinstance(WpbmNode(1, p_fwd=0.0, rng=rng).on_receive(_pkt(), 0, (0, 0))[0], Drop)
    assert isinstance(WpbmNode(1, p_fwd=1.0, rng=rng).on_receive(_pkt(), 0, (0, 0))[0], Forward)
    with pytest.raises(ValueError):
        WpbmNode(1, p_fwd=1.5, rng=rng)


def test_odam_suppression():
    n = OdamNode(1, defer=DEFER)
    assert n.on_receive(_pkt(), 0.0, (0.0, 0.0)) == [SetTimer((9, 0), defer_time(100.0, DEFER))]
    n.timer_started((9, 0), 7)
    assert n.on_receive(_pkt(), 0.1, (0.0, 0.0))[0] == CancelTimer((9, 0), 7)
    assert n.on_timer_expiry((9, 0), 7, 0.9) == []
    assert isinstance(n.on_receive(_pkt(), 0.2, (0.0, 0.0))[0], Drop)


# -- ODAM-C handlers

def _odamc_with_first_copy(**kw):
    node = OdamcNode(5, defer=DEFER, **kw)
    acts = node.on_receive(_pkt(sender_pos=(-100.0, 0.0)), 0.0, (0.0, 0.0))
    assert acts == [SetTimer((9, 0), defer_time(100.0, DEFER))]
    node.timer_started((9, 0), 11)
    return node


def test_odamc_same_side_duplicate_keeps_timer():
    node = _odamc_with_first_copy()
    acts = node.on_receive(_pkt(sender_pos=(-50.0, 0.0), sender=4), 0.1, (0.0, 0.0))
    assert [type(a) for a in acts] == [Drop]
    assert node.entry((9, 0)).list == "L1" and node.entry((9, 0)).timer == 11


def test_odamc_opposite_side_promotes_then_l0_copy_stops():
    node = _odamc_with_first_copy()
    acts = node.on_receive(_pkt(sender_pos=(120.0, 0.0), sender=6), 0.1, (0.0, 0.0))
    assert acts == [CancelTimer((9, 0), 11), SetTimer((9, 0), defer_time(120.0, DEFER))]
    assert node.entry((9, 0)).list == "L0"
    node.timer_started((9, 0), 12)
    acts = node.on_receive(_pkt(sender_pos=(-30.0, 0.0), sender=7), 0.2, (0.0, 0.0))
    assert acts[0] == CancelTimer((9, 0), 12) and isinstance(acts[1], Drop)
    assert node.on_timer_expiry((9, 0), 12, 1.0) == []


def test_odamc_timers_forward_and_entry_stays():
    node = _odamc_with_first_copy()
    assert node.on_timer_expiry((9, 0), 11, 0.9) == [Forward(_pkt())]
    assert node.entry((9, 0)).list == "L1"
    node.on_receive(_pkt(sender_pos=(120.0, 0.0), sender=6), 1.0, (0.0, 0.0))
    node.timer_started((9, 0), 13)
    assert node.on_timer_expiry((9, 0), 13, 1.5) == [Forward(_pkt())]
    assert node.entry((9, 0)).list == "L0"
    # expired L0 entry: further copies are dropped, no new timer
    acts = node.on_receive(_pkt(sender_pos=(50.0, 0.0), sender=8), 2.0, (0.0, 0.0))
    assert [type(a) for a in acts] == [Drop]


def test_odamc_degenerate_angle_is_same_side():
    node = _odamc_with_first_copy()
    acts = node.on_receive(_pkt(sender_pos=(0.0, 0.0), sender=4), 0.1, (0.0, 0.0), d=0.0)
    assert [type(a) for a in acts] == [Drop]
    assert node.entry((9, 0)).timer == 11


def test_odamc_pseudocode_polarity_stops_on_same_side():
    node = _odamc_with_first_copy(branch_polarity="pseudocode")
    acts = node.on_receive(_pkt(sender_pos=(-50.0, 0.0), sender=4), 0.1, (0.0, 0.0))
    assert acts[0] == CancelTimer((9, 0), 11)


def test_odamc_originator_promotes_on_first_return():
    node = OdamcNode(0, defer=DEFER)
    own = Packet.originate(0, 0, (0.0, 0.0), 0.0)
    node.on_originate(own, 0.0, (0.0, 0.0))
    acts = node.on_receive(own.stamped(1, (-200.0, 0.0)), 0.1, (0.0, 0.0))
    assert isinstance(acts[-1], SetTimer) and node.entry((0, 0)).list == "L0"


def test_bad_options_rejected():
    with pytest.raises(ValueError):
        OdamcNode(0, angle_vertex="middle")
    with pytest.raises(ValueError):
        OdamcNode(0, branch_polarity="either")


# -- small static topologies through the full simulator

def test_flooding_five_node_line():
    res = run_static([(200.0 * k, 0.0) for k in range(5)], "flooding")
    assert res.receivers() == {1, 2, 3, 4}
    assert sorted(n for n, _ in res.tx_counts) == [0, 1, 2, 3, 4]
    assert set(res.tx_counts.values()) == {1}


def test_wpbm_zero_only_origin_transmits():
    cfg = sc.ScenarioConfig().with_overrides(**{"protocol.p_fwd": 0.0})
    res = run_static([(200.0 * k, 0.0) for k in range(5)], "wpbm", cfg=cfg)
    assert list(res.tx_counts) == [(0, (0, 0))]
    assert res.receivers() == {1}


def test_relays_on_both_sides_inhibit_middle_node():
    # A originates; B and D rebroadcast from both sides of C, so C never forwards
    res = run_static([(0.0, 0.0), (-200.0, 0.0), (50.0, 0.0), (250.0, 0.0)], "odam-c",
                     record_angles=True)
    assert res.receivers() == {1, 2, 3}
    assert res.tx_counts[(2, (0, 0))] == 0
    # D is farther from A so fires first: an opposite-side copy promotes C to L0,
    # then B's copy arrives while in L0 and stops the second-chance timer
    assert [d for _, d, _ in res.nodes[2].angle_log] == ["promote"]
    entry = res.nodes[2].entry((0, 0))
    assert entry.list == "L0" and entry.timer is None


def test_angle_log_branch_invariant():
    cfg = sc.preset("scenario3-small").with_overrides(last_send=700.0, sim_end=710.0,
                                                      protocol="odam-c")
    res = run(cfg, record_angles=True)
    seen = 0
    for node in res.nodes:
        for _, decision, theta in node.angle_log:
            seen += 1
            if decision == "ignore":
                assert theta < 90.0
            elif decision == "promote":
                assert theta is None or theta >= 90.0
    assert seen > 0


@pytest.mark.parametrize("proto, bound", [("flooding", 1), ("wpbm", 1), ("odam", 1),
                                          ("odam-c", 2)])
def test_forward_bound_small_run(proto, bound):
    cfg = sc.preset("scenario3-small").with_overrides(last_send=700.0, sim_end=710.0,
                                                      protocol=proto)
    res = run(cfg)
    assert max(res.tx_counts.values()) <= bound

import numpy as np
import pytest

from odamc.engine import Engine, EventKind
from odamc.geometry import RingStrip
from odamc.medium import CollisionModel, Medium, RadioConfig, Transmission, neighbors
from odamc.mobility import Fleet


def test_neighbors_boundary_inclusive():
    xs = np.array([0.0, 300.0, 300.0001, -150.0])
    ys = np.zeros(4)
    idx, dist = neighbors((0.0, 0.0), xs, ys, 300.0, exclude=0)
    assert idx.tolist() == [1, 3]
    assert dist.tolist() == [300.0, 150.0]


def test_neighbors_on_ring():
    xs = np.array([10.0, 2990.0, 1500.0])
    idx, dist = neighbors((10.0, 0.0), xs, np.zeros(3), 300.0, ring_length=3000.0, exclude=0)
    assert idx.tolist() == [1]
    assert dist[0] == pytest.approx(20.0)


def _deliver(model, starts_and_senders, positions):
    """Run transmissions through a real engine and return delivered (node, sender) pairs."""
    fleet = Fleet.static(positions)
    cfg = RadioConfig(collision_model=model)
    med = Medium(cfg)
    eng = Engine()
    got = []
    eng.on(EventKind.RX, lambda ev: got.append((ev.time, ev.payload[0].node, ev.payload[1])))

    def tx(ev):
        sender = ev.payload
        t = Transmission(None, sender, positions[sender], ev.time, cfg.airtime)
        med.broadcast(t, fleet, lambda when, rec: eng.schedule(when, EventKind.RX, (rec, sender)),
                      eng.cancel)

    eng.on(EventKind.TX_START, tx)
    for start, sender in starts_and_senders:
        eng.schedule(start, EventKind.TX_START, sender)
    eng.run_until(1.0)
    return got, med


def test_rx_time_is_airtime_plus_propagation():
    got, _ = _deliver(CollisionModel.IDEAL, [(0.0, 0)], [(0.0, 0.0), (300.0, 0.0)])
    assert got == [(0.0 + 8000 / 6e6 + 300 / 3e8, 1, 0)]


def test_ideal_medium_delivers_overlapping_frames():
    pos = [(0.0, 0.0), (100.0, 0.0), (200.0, 0.0)]
    got, med = _deliver(CollisionModel.IDEAL, [(0.0, 0), (0.0005, 2)], pos)
    assert sorted((n, s) for _, n, s in got) == [(0, 2), (1, 0), (1, 2), (2, 0)]
    assert med.collisions == 0


def test_overlap_destroys_both_frames_at_shared_receiver():
    pos = [(0.0, 0.0), (100.0, 0.0), (200.0, 0.0)]
    got, med = _deliver(CollisionModel.AIRTIME_OVERLAP, [(0.0, 0), (0.0005, 2)], pos)
    assert sorted((n, s) for _, n, s in got) == [(0, 2), (2, 0)]
    assert med.collisions == 2


def test_back_to_back_frames_do_not_collide():
    pos = [(0.0, 0.0), (100.0, 0.0), (200.0, 0.0)]
    airtime = RadioConfig().airtime
    # second frame starts at the receiver exactly when the first ends there
    got, med = _deliver(CollisionModel.AIRTIME_OVERLAP, [(0.0, 0), (airtime, 2)], pos)
    assert sorted((n, s) for _, n, s in got if n == 1) == [(1, 0), (1, 2)]
    assert med.collisions == 0


def test_third_frame_overlapping_a_lost_one_is_lost():
    pos = [(0.0, 0.0), (100.0, 0.0), (200.0, 0.0), (100.0, 50.0)]
    a = RadioConfig().airtime
    got, _ = _deliver(CollisionModel.AIRTIME_OVERLAP, [(0.0, 0), (0.5 * a, 2), (1.2 * a, 3)], pos)
    assert not [1 for _, n, _s in got if n == 1]


def test_edge_loss_only_near_range():
    cfg = RadioConfig(edge_loss=1.0, edge_loss_start=0.5, collision_model=CollisionModel.IDEAL)
    med = Medium(cfg, rng=np.random.default_rng(0))
    pos = [(0.0, 0.0), (100.0, 0.0), (299.9, 0.0)]
    recs = med.broadcast(Transmission(None, 0, pos[0], 0.0, cfg.airtime), Fleet.static(pos),
                         lambda t, r: 1, lambda t: None)
    assert [r.voided for r in recs] == [False, True]


def test_ring_medium_wraps():
    cfg = RadioConfig(collision_model=CollisionModel.IDEAL)
    med = Medium(cfg, RingStrip(1000.0))
    pos = [(990.0, 0.0), (50.0, 0.0)]
    recs = med.broadcast(Transmission(None, 0, pos[0], 0.0, cfg.airtime), Fleet.static(pos),
                         lambda t, r: 1, lambda t: None)
    assert [(r.node, r.distance) for r in recs] == [(1, pytest.approx(60.0))]


@pytest.mark.parametrize("field, value", [("range", 0.0), ("data_rate", -1.0),
                                          ("edge_loss", 1.5), ("edge_loss_start", 1.0)])
def test_radio_config_validation(field, value):
    with pytest.raises(ValueError):
        RadioConfig(**{field: value})

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odamc import scenario as sc
from odamc.medium import CollisionModel
from odamc.mobility import FlowSpec

GOLDEN = Path(__file__).parent / "golden" / "presets.txt"


def test_table_presets():
    assert sc.preset("scenario1").vehicular_gap == 200.0
    assert sc.preset("scenario3").road.lane_count == 3
    assert sc.preset("scenario2").flow2.decel == 4.5
    s2 = sc.preset("scenario2")
    assert (s2.vehicle_count, s2.road.road_length) == (200, 22000.0)
    assert s2.flow1 == FlowSpec(120.0, 4.5, 1.0)
    assert s2.radio.range == 300.0 and s2.radio.data_rate == 6e6


def test_unknown_preset():
    with pytest.raises(sc.UnknownPreset):
        sc.preset("scenario9")


def test_preset_golden_file():
    text = "".join(f"[{name}]\n{sc.render(sc.preset(name))}" for name in sc.PRESETS)
    assert text == GOLDEN.read_text(encoding="utf-8")


def test_send_schedule_has_29_packets():
    times = sc.preset("scenario1").send_times()
    assert len(times) == 29 and times[0] == 600.0 and times[-1] == 2000.0


def test_parse_preset_alone():
    assert sc.parse("preset = scenario1\n") == sc.preset("scenario1")


def test_parse_rejects_single_vehicle():
    with pytest.raises(sc.ValidationError):
        sc.parse("vehicle_count = 1\n")


def test_parse_wpbm_with_p1():
    cfg = sc.parse("preset = scenario2\nprotocol = wpbm\nprotocol.p_fwd = 1.0  # flooding\n")
    assert cfg.protocol.name == "wpbm" and cfg.protocol.p_fwd == 1.0
    assert cfg.vehicle_count == 200


@pytest.mark.parametrize("text, line", [
    ("seed = 1\nnot a pair\n", 2),
    ("seed = 1\n\nbogus_key = 3\n", 3),
    ("seed = 1\nseed = 2\n", 2),
    ("# header\nradio.range = far\n", 2),
    ("preset = scenario7\n", 1),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(sc.ParseError) as info:
        sc.parse(text)
    assert info.value.line == line


def test_auto_defer_uses_mean_delay():
    cfg = sc.parse("defer.max_defer_time = auto\n")
    assert cfg.defer_config().max_defer_time == pytest.approx(2 * (8000 / 6e6 + 300 / 3e8))


@pytest.mark.parametrize("key, value", [("speed_dev", 1.0), ("protocol.p_fwd", 2.0),
                                        ("source_node", 500), ("vehicular_gap", 1.0),
                                        ("last_send", 3000.0)])
def test_overrides_validated(key, value):
    with pytest.raises(sc.ValidationError):
        sc.preset("scenario1").with_overrides(**{key: value})


@settings(max_examples=60, deadline=None)
@given(name=st.sampled_from(sc.PRESETS), seed=st.integers(0, 2**31),
       p_fwd=st.floats(0.0, 1.0), mdt=st.one_of(st.none(), st.floats(1e-4, 1.0)),
       model=st.sampled_from(list(CollisionModel)), eps=st.integers(1, 4),
       source=st.one_of(st.none(), st.integers(0, 99)))
def test_render_parse_roundtrip(name, seed, p_fwd, mdt, model, eps, source):
    cfg = sc.preset(name).with_overrides(**{
        "seed": seed, "protocol.p_fwd": p_fwd, "defer.max_defer_time": mdt,
        "radio.collision_model": model, "defer.epsilon": eps, "source_node": source})
    assert sc.parse(sc.render(cfg)) == cfg


def test_load(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text("preset = scenario3-small\nseed = 4\n", encoding="utf-8")
    cfg = sc.load(path)
    assert cfg.seed == 4 and cfg.vehicle_count == 120

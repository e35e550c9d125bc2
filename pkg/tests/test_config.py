import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lplc2.config import (
    CALIBRATED_THRESHOLDS,
    ConfigError,
    ModelConfig,
    alpha_for_delay,
    dump_config,
    load_config,
    parse_override,
    step_delays,
)

TAU_I = 1000.0 / 33.0


def test_empty_source_gives_table_defaults():
    for cfg in (load_config(), load_config(""), load_config({})):
        assert (cfg.r_de, cfg.r_di, cfg.r_dc) == (5, 11, 5)
        assert (cfg.sigma_e, cfg.sigma_i, cfg.sigma_c) == (10.0, 20.0, 20.0)
        assert cfg.epsilon == 0.2
        assert cfg.n_c == 5
        assert cfg.tau_1 == 80.0
        assert (cfg.tau_nc_start, cfg.tau_nc_end) == (80.0, 40.0)
        assert cfg.beta == 1.5
        assert (cfg.gamma_1, cfg.gamma_2) == (0.9, 0.5)
        assert cfg.r_af == 40
        assert cfg.t_a == 10.0
        assert cfg.t_d == 5000.0
        assert cfg.d_frames == 10
        assert cfg.frame_interval_ms == pytest.approx(TAU_I)
        assert cfg.fps == pytest.approx(33.0)


@pytest.mark.parametrize("doc,field", [
    ("sigma_e: 0", "sigma_e"),
    ("r_de: 11\nr_di: 5", "r_di"),
    ("epsilon: 0", "epsilon"),
    ("beta: -1", "beta"),
    ("n_c: 0", "n_c"),
    ("t_a: 0", "t_a"),
    ("t_d: -2", "t_d"),
    ("d_frames: 0", "d_frames"),
    ("tau_nc_start: 30\ntau_nc_end: 40", "tau_nc_start"),
    ("variant: triple", "variant"),
    ("boundary: wrap", "boundary"),
    ("r_af: 2.5", "r_af"),
])
def test_invalid_values_name_the_field(doc, field):
    with pytest.raises(ConfigError) as err:
        load_config(doc)
    assert err.value.field == field


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        load_config({"sigma_x": 3})
    with pytest.raises(ConfigError):
        ModelConfig().replace(nope=1)


def test_non_mapping_document_rejected():
    with pytest.raises(ConfigError):
        load_config("- 1\n- 2\n")


def test_config_from_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("t_a: 0.5\nvariant: single\n")
    cfg = load_config(p)
    assert cfg.t_a == 0.5 and cfg.variant == "single" and cfg.max_afs == 1
    cfg = load_config(str(p), overrides={"t_a": 2})
    assert cfg.t_a == 2.0 and isinstance(cfg.t_a, float)


def test_variant_caps():
    assert ModelConfig().max_afs is None
    assert ModelConfig(variant="center").max_afs == 1
    with pytest.raises(ConfigError):
        ModelConfig(variant="single", max_afs=3)
    assert ModelConfig(variant="single").replace(variant="multi").max_afs is None


def test_frozen():
    with pytest.raises(Exception):
        ModelConfig().t_a = 3.0


def test_round_trip_default_and_modified():
    for cfg in (ModelConfig(), ModelConfig(boundary="zero", variant="center", t_a=0.3)):
        assert load_config(dump_config(cfg)) == cfg


@given(t_a=st.floats(0.01, 100), d=st.integers(1, 50), variant=st.sampled_from(["multi", "single", "center"]))
def test_round_trip_property(t_a, d, variant):
    cfg = ModelConfig(t_a=t_a, d_frames=d, variant=variant)
    assert load_config(dump_config(cfg)) == cfg


def test_parse_override():
    assert parse_override("t_a=0.5") == ("t_a", 0.5)
    assert parse_override("variant=center") == ("variant", "center")
    assert parse_override("max_afs=null") == ("max_afs", None)
    with pytest.raises(ConfigError):
        parse_override("t_a")


def test_alpha_examples():
    assert alpha_for_delay(80.0, TAU_I) == pytest.approx(0.2747252747252747, abs=1e-15)
    assert alpha_for_delay(TAU_I, TAU_I) == 0.5
    assert alpha_for_delay(1e-12, TAU_I) == pytest.approx(1.0)


@given(a=st.floats(0.1, 1e4), b=st.floats(0.1, 1e4), ti=st.floats(0.1, 1e3))
def test_alpha_strictly_decreasing(a, b, ti):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert 0 < alpha_for_delay(hi, ti) < alpha_for_delay(lo, ti) < 1


def test_step_delays_linear():
    assert step_delays(ModelConfig()) == [80.0, 70.0, 60.0, 50.0, 40.0]
    assert step_delays(ModelConfig(n_c=1)) == [80.0]
    assert math.isclose(sum(step_delays(ModelConfig())) / 5, 60.0)


def test_with_fps():
    assert ModelConfig().with_fps(50).frame_interval_ms == 20.0
    with pytest.raises(ConfigError):
        ModelConfig().with_fps(0)


def test_calibrated_thresholds_are_valid():
    cfg = ModelConfig(**CALIBRATED_THRESHOLDS)
    assert cfg.t_a < ModelConfig().t_a

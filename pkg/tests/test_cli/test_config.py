from pathlib import Path

import numpy as np
import pytest

from gcckit.config import ExperimentConfig, load_config, locate_key, parse_config
from gcckit.enums import DomainKind, GccMode, MetricKind, RegionKind
from gcckit.errors import ConfigurationError

CONFIGS = Path(__file__).parents[2] / "configs"

MINIMAL = """\
[domain]
kind = "interval"

[region]
shape = "interval"
a = 0.3
b = 0.6
"""


def write(tmp_path, text, name="experiment.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


@pytest.mark.parametrize("name", ["interval", "square_strip", "disc", "halfplane", "levelset"])
def test_example_configs_validate(name):
    config = load_config(CONFIGS / f"{name}.toml")
    assert isinstance(config, ExperimentConfig)
    assert config.output.dir.endswith(name)


def test_defaults_are_filled_in(tmp_path):
    config = load_config(write(tmp_path, MINIMAL))
    assert config.domain.kind == DomainKind.INTERVAL
    assert config.metric.kind == MetricKind.FLAT
    assert config.observe.mode == GccMode.STRONG
    resolved = config.resolved()
    assert resolved["sampling"]["spacing"] == 0.05
    assert resolved["region"]["dilation"] == 0.0
    assert resolved["dyadic"]["ks"] is None
    assert resolved["dyadic"]["min_size"] == 6
    assert parse_config(resolved) == config


def test_unknown_key_is_named_with_its_line(tmp_path):
    with pytest.raises(ConfigurationError) as info:
        load_config(write(tmp_path, MINIMAL + "radiu = 0.2\n"))
    assert "region.radiu" in str(info.value)
    assert "(line 8)" in str(info.value)


def test_bad_value_is_named_with_its_line(tmp_path):
    text = MINIMAL + '\n[sampling]\nspacing = -1.0\n'
    with pytest.raises(ConfigurationError) as info:
        load_config(write(tmp_path, text))
    assert "sampling.spacing" in str(info.value)
    assert "(line 10)" in str(info.value)


def test_missing_domain_points_at_no_line(tmp_path):
    with pytest.raises(ConfigurationError, match="domain"):
        load_config(write(tmp_path, '[region]\nshape = "whole"\n'))


def test_level_set_needs_a_box(tmp_path):
    with pytest.raises(ConfigurationError, match="box"):
        load_config(write(tmp_path, '[domain]\nkind = "level_set"\nlevelset = "1 - x1^2 - x2^2"\n'))


def test_malformed_toml(tmp_path):
    with pytest.raises(ConfigurationError, match="experiment.toml"):
        load_config(write(tmp_path, "[domain\nkind = 1\n"))


def test_locate_key_follows_tables():
    text = '[domain]\nkind = "disc"\n\n[measure.symbols]\nbump = "x1"\n'
    assert locate_key(text, ("domain", "kind")) == 2
    assert locate_key(text, ("measure", "symbols", "bump")) == 5
    assert locate_key(text, ("domain", "radius")) == 1
    assert locate_key(text, ("measure", "hs", 0)) is None


def test_sections_build_their_objects():
    config = load_config(CONFIGS / "halfplane.toml")
    domain = config.domain.build()
    metric = config.metric.build(domain)
    assert domain.kind == DomainKind.HALF_PLANE
    x = np.array([np.pi / 2, 1.0])
    np.testing.assert_allclose(np.asarray(metric.g(x)), np.eye(2) / 1.2**2, rtol=1e-12)
    region = config.require_region().build(domain)
    assert region.kind == RegionKind.BOUNDARY


def test_region_is_required_by_control_commands(tmp_path):
    config = load_config(write(tmp_path, '[domain]\nkind = "interval"\n'))
    with pytest.raises(ConfigurationError, match=r"\[region\]"):
        config.require_region()


def test_divide_section_compiles_boundary_symbols():
    config = load_config(CONFIGS / "halfplane.toml")
    b, p, chi = config.divide.build()
    y, eta, zeta = np.array([[0.0]]), np.array([[2.0]]), np.array([1.0])
    np.testing.assert_allclose(np.asarray(b(y, eta, zeta)), [3.0])
    np.testing.assert_allclose(np.asarray(p(y, eta, zeta)), [-2.0])
    assert chi is None

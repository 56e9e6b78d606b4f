import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lawstar import sampling
from lawstar.config import config_from_system, emit_config, load_config, parse_config
from lawstar.errors import ConfigError
from lawstar.limits import validate_system
from lawstar.matstar import op_norm

MINIMAL = """
nodes:
  - {label: A, blocks: [1]}
"""

TWO_NODES = """\
nodes:
  - {label: a, blocks: [2]}
  - {label: b, blocks: [2, 1]}
order:
  - [a, b]
maps:
  - {source: b, target: a, kept_blocks: [0]}
"""


@pytest.mark.parametrize("name", ["three_node", "diag01", "harmonic_chain"])
def test_shipped_configs_load_and_round_trip(repo_root, name):
    cfg = load_config(str(repo_root / "configs" / f"{name}.yaml"))
    assert validate_system(cfg.system).ok
    again = parse_config(emit_config(cfg))
    assert again.semantic_key() == cfg.semantic_key()
    assert emit_config(again) == emit_config(cfg)


def test_minimal_config_parses():
    cfg = parse_config(MINIMAL)
    assert cfg.system.nodes == ("A",) and cfg.system.algebra("A").block_sizes == (1,)


def test_complex_entries_and_top_elements(repo_root):
    cfg = load_config(str(repo_root / "configs" / "three_node.yaml"))
    x = cfg.threads["x"]
    assert x("c").blocks[1][0, 2] == 1j
    # the swap on the second block moves the (0, 0) entry of the top block to (1, 1)
    assert x("b").blocks[1][1, 1] == 2


def test_chain_generators(repo_root):
    cfg = load_config(str(repo_root / "configs" / "harmonic_chain.yaml"))
    h = cfg.threads["h"]
    assert np.allclose([b[0, 0] for b in h(4).blocks], [1, 1 / 2, 1 / 3, 1 / 4])
    assert h.monotone and h.declared_bound == 1
    assert op_norm(cfg.threads["n"](7)) == pytest.approx(7)


def located(text, fragment):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert fragment in str(err.value), str(err.value)
    return str(err.value)


def test_missing_node_in_map_is_located():
    msg = located(TWO_NODES.replace("source: b", "source: z"), "line 7")
    assert "maps[0].source" in msg


def test_unknown_field_is_located():
    located(MINIMAL + "colour: red\n", "colour")
    located(TWO_NODES.replace("kept_blocks", "kept"), "maps[0]")


def test_bad_numbers_are_located():
    located(TWO_NODES.replace("blocks: [2, 1]", "blocks: [2, x]"), "nodes[1].blocks[1]")
    located(MINIMAL.replace("[1]", "[0]"), "nodes[0].blocks[0]")


def test_non_unitary_map_is_rejected():
    text = TWO_NODES.replace("kept_blocks: [0]}", "kept_blocks: [0], unitaries: [[[2, 0], [0, 1]]]}")
    located(text, "unitar")


def test_incoherent_coords_are_rejected():
    text = TWO_NODES + """\
elements:
  y:
    coords:
      a: [[[1, 0], [0, 1]]]
      b: [[[0, 0], [0, 0]], [[1]]]
"""
    located(text, "elements")


def test_malformed_yaml_is_a_config_error():
    with pytest.raises(ConfigError):
        parse_config("nodes: [\n")


@given(st.integers(0, 2**32 - 1))
def test_random_systems_round_trip(seed):
    rng = np.random.default_rng(seed)
    sys = sampling.random_system(rng)
    x = sampling.random_thread(rng, sys)
    cfg = config_from_system(sys, {"x": x}, name="r", seed=seed)
    text = emit_config(cfg)
    again = parse_config(text)
    assert validate_system(again.system).ok
    top = again.system.top()
    assert op_norm(again.threads["x"](top) - x(top)) == 0
    assert emit_config(again) == text

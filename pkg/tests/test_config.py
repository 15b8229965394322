import pytest

from mvgeo.config import SCHEMA, load_config
from mvgeo.errors import FormatError


def test_defaults():
    cfg = load_config()
    assert cfg["seed"] == 0
    assert cfg["width"] == 64
    assert cfg["hypotheses"] == 32
    assert cfg["mode"] == "keyframe"
    assert set(cfg) == set(SCHEMA)


def test_file_values_override_defaults(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("width = 32\nstep = 0.05\ntrajectory = arc\n")
    cfg = load_config(path)
    assert cfg["width"] == 32
    assert isinstance(cfg["width"], int)
    assert cfg["step"] == pytest.approx(0.05)
    assert cfg["trajectory"] == "arc"


def test_cli_overrides_win(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("width = 32\n")
    cfg = load_config(path, {"width": "16", "seed": "5"})
    assert cfg["width"] == 16
    assert cfg["seed"] == 5


def test_none_overrides_ignored():
    cfg = load_config(None, {"width": None})
    assert cfg["width"] == 64


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("girth = 32\n")
    with pytest.raises(FormatError):
        load_config(path)
    with pytest.raises(FormatError):
        load_config(None, {"girth": "32"})


def test_bad_value_rejected():
    with pytest.raises(FormatError):
        load_config(None, {"width": "not-a-number"})

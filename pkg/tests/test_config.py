import pytest

from sfuc_lab.config import KINDS, SCHEMAS, dump_config, load_config, parse_config
from sfuc_lab.errors import ConfigurationError


def test_defaults_filled():
    cfg = parse_config("[experiment]\nkind = ucp\n")
    assert cfg.params.keys() == SCHEMAS["ucp"].keys()
    assert cfg.params["L"] == [1.0, 3.0, 5.0] and cfg.seed == 0 and cfg.workers == 1


@pytest.mark.parametrize("kind", KINDS)
def test_round_trip(kind):
    cfg = parse_config(f"[experiment]\nkind = {kind}\nseed = 7\nworkers = 3\n")
    again = parse_config(dump_config(cfg))
    assert again.params == cfg.params
    assert (again.kind, again.seed, again.workers, again.output) == (kind, 7, 3, "out")


def test_values_parsed_by_type():
    cfg = parse_config("[experiment]\nkind = wegner\n[wegner]\neps = 0.3 0.1  # half widths\n"
                       "E = none\nkappa = 2\n")
    assert cfg.params["eps"] == [0.3, 0.1] and cfg.params["E"] is None
    assert cfg.params["kappa"] == 2.0


@pytest.mark.parametrize("text", [
    "[ucp]\nG = 1\n",
    "[experiment]\nkind = nope\n",
    "[experiment]\nkind = ucp\ncolour = red\n",
    "[experiment]\nkind = ucp\n[ucp]\nbogus = 1\n",
    "[experiment]\nkind = ucp\n[wegner]\nL = 1\n",
    "[experiment]\nkind = ucp\n[ucp]\nd = two\n",
    "[experiment]\nkind = ucp\nseed = x\n",
    "[experiment]\nkind = ghost\n[ghost]\nrefine = 1 2.5\n",
    "not an ini file",
])
def test_rejected(text):
    with pytest.raises(ConfigurationError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "absent.ini")


def test_echo_excludes_workers(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[experiment]\nkind = weights\nworkers = 4\noutput = res\n")
    cfg = load_config(p)
    assert "workers" not in cfg.echo()
    assert cfg.output_dir == (tmp_path / "res").resolve()

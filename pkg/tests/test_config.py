import pytest

from tcollapse.config import load_config, parse_config, preset_names, preset_path
from tcollapse.errors import ConfigurationError

BASE = """\
[problem]
name = demo
type = cauchy
t_final = 0.5

[flux]
name = burgers

[domain]
lo = -1
hi = 1
N = 40

[scheme]
M = 20
n = 10

[initial]
profile = riemann
u_l = 1
u_r = 0
"""


def test_minimal_config_defaults():
    cfg = parse_config(BASE)
    assert cfg.name == "demo" and cfg.problem == "cauchy"
    assert (cfg.N, cfg.M, cfg.n) == (40, 20, 10)
    assert cfg.closure == "extend"
    assert cfg.snapshots == (0.0, 0.5)
    assert cfg.initial == {"profile": "riemann", "u_l": 1.0, "u_r": 0.0, "x0": 0.0}
    assert cfg.verify["suites"] == ()


@pytest.mark.parametrize("presets", [preset_names()])
def test_all_presets_ship(presets):
    assert presets == ["advection-inflow", "burgers-rarefaction", "burgers-shock",
                       "paperfig1", "paperfig2"]


@pytest.mark.parametrize("name", preset_names())
def test_presets_load(name):
    cfg = load_config(preset_path(name))
    assert cfg.name == name


def test_error_names_line_of_bad_value():
    text = BASE.replace("N = 40", "N = forty")
    with pytest.raises(ConfigurationError, match=r"<string>:12: \[domain\] n: expected an integer"):
        parse_config(text)


def test_unknown_key_is_rejected_with_line():
    with pytest.raises(ConfigurationError, match=r":5: \[problem\] colour: unknown key"):
        parse_config(BASE.replace("t_final = 0.5", "t_final = 0.5\ncolour = red"))


def test_unknown_section():
    with pytest.raises(ConfigurationError, match="unknown section"):
        parse_config(BASE + "\n[extras]\nx = 1\n")


def test_key_outside_section():
    with pytest.raises(ConfigurationError, match=":1: key outside"):
        parse_config("x = 1\n" + BASE)


def test_duplicate_key_reports_line():
    with pytest.raises(ConfigurationError, match=":5:"):
        parse_config(BASE.replace("t_final = 0.5", "t_final = 0.5\nt_final = 0.7"))


def test_missing_required_key():
    with pytest.raises(ConfigurationError, match="u_r: missing required key"):
        parse_config(BASE.replace("u_r = 0\n", ""))


def test_missing_section():
    with pytest.raises(ConfigurationError, match=r"missing section \[scheme\]"):
        parse_config(BASE.replace("[scheme]\nM = 20\nn = 10\n", ""))


@pytest.mark.parametrize("key,value", [("t_final", "-1"), ("t_final", "nan")])
def test_non_positive_or_non_finite(key, value):
    with pytest.raises(ConfigurationError):
        parse_config(BASE.replace("t_final = 0.5", f"{key} = {value}"))


def test_snapshot_after_final_time():
    with pytest.raises(ConfigurationError, match="outside"):
        parse_config(BASE + "\n[output]\nsnapshots = 0, 0.6\n")


def test_ibvp_needs_sigma_and_boundary():
    text = BASE.replace("type = cauchy", "type = ibvp")
    with pytest.raises(ConfigurationError, match="sigma"):
        parse_config(text)
    with pytest.raises(ConfigurationError, match=r"\[boundary\]"):
        parse_config(text.replace("N = 40", "N = 40\nsigma = 0.1"))


def test_waveform_parsing():
    text = (BASE.replace("type = cauchy", "type = ibvp").replace("N = 40", "N = 40\nsigma = 0.1")
            + "\n[boundary]\nleft = step 0.1 0 1\nright = ramp 0 1 0 0.5\n")
    cfg = parse_config(text)
    assert cfg.boundary == {"left": ("step", 0.1, 0.0, 1.0), "right": ("ramp", 0.0, 1.0, 0.0, 0.5)}
    with pytest.raises(ConfigurationError, match="step takes 3 numbers"):
        parse_config(text.replace("step 0.1 0 1", "step 0.1"))


def test_unknown_suite():
    with pytest.raises(ConfigurationError, match="unknown suite"):
        parse_config(BASE + "\n[verify]\nsuites = everything\n")


def test_levels_format():
    cfg = parse_config(BASE + "\n[verify]\nlevels = 10:10:5, 20:20:10\n")
    assert cfg.verify["levels"] == ((10, 10, 5), (20, 20, 10))
    with pytest.raises(ConfigurationError, match="N:M:n"):
        parse_config(BASE + "\n[verify]\nlevels = 10x10\n")


def test_csv_initial_path_must_exist(tmp_path):
    text = BASE.replace("profile = riemann\nu_l = 1\nu_r = 0\n", "profile = csv\npath = nope.csv\n")
    with pytest.raises(ConfigurationError, match="file not found"):
        parse_config(text, base=tmp_path)
    (tmp_path / "u0.csv").write_text("x,u\n0,1\n1,2\n")
    cfg = parse_config(text.replace("nope.csv", "u0.csv"), base=tmp_path)
    assert cfg.initial["path"].endswith("u0.csv")


def test_flux_parameters_are_numbers():
    cfg = parse_config(BASE.replace("name = burgers", "name = advection\nc = -2"))
    assert cfg.flux_params == {"c": -2.0}
    with pytest.raises(ConfigurationError):
        parse_config(BASE.replace("name = burgers", "name = advection\nc = fast"))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError, match="cannot read"):
        load_config(tmp_path / "absent.ini")

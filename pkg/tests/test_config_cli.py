import io
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plaquemc import cli
from plaquemc.config import (
    ConfigError,
    config_hash,
    load_config,
    parse_config,
    parse_release,
    resolve_overrides,
    serialize_config,
)
from plaquemc.output import RunManifest, format_csv, write_csv
from plaquemc.rheology import FluidKind
from plaquemc.transport import ConstantFlow, PulsatileFlow

# --- configuration -------------------------------------------------------------


def test_empty_config_is_defaults():
    cfg = parse_config("")
    assert cfg.geometry.r_c == 3e-3 and cfg.geometry.r_p == 0.0
    assert cfg.fluid.kind is FluidKind.NEWTONIAN
    assert isinstance(cfg.flow, ConstantFlow) and cfg.flow.u_avg == 0.342
    assert (cfg.N, cfg.dt, cfg.t_end, cfg.seed) == (1000, 1e-4, 1.0, 0)


def test_model_defaults():
    hb = parse_config("[fluid]\nmodel = herschel_bulkley\n").fluid
    assert (hb.K, hb.n, hb.tau_y, hb.zeta) == (17e-3, 0.708, 5e-3, 0.05)


def test_pulsatile_section():
    cfg = parse_config("[flow]\nmode = pulsatile\nrelease = ed\n")
    assert isinstance(cfg.flow, PulsatileFlow)
    assert cfg.release_time == 0.4
    assert np.mean(cfg.u_avg_at(np.linspace(0, 0.9, 9001))) == pytest.approx(0.342, rel=1e-3)


def test_relative_plaque_and_stenosis_step():
    cfg = parse_config("[channel]\nr_p_rel = 0.75\n")
    assert cfg.geometry.r_p == pytest.approx(2.25e-3)
    assert cfg.dt == 1e-5


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[sim]\nseed = 1\nbogus = 2\n", "line 3"),
        ("[channel]\nr_c = abc\n", "line 2"),
        ("[channel]\nr_c = -1\n", "line 2"),
        ("[nope]\nx = 1\n", "unknown section"),
        ("[fluid]\nmodel = newtonian\nzeta = 0.1\n", "line 3"),
        ("[flow]\nrelease = ps\n", "requires mode = pulsatile"),
        ("[channel]\nr_p = 1e-3\nr_p_rel = 0.1\n", "either"),
        ("[channel]\nr_p_rel = 1.0\n", "full occlusion"),
        ("[sim]\nseed = 1\nseed = 2\n", "parse error"),
        ("[flow]\nmode = pulsatile\nwaveform = missing.csv\n", "line 3"),
    ],
)
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_parse_release():
    assert parse_release("PS") == 0.16
    assert parse_release("t=0.25") == 0.25
    with pytest.raises(ValueError):
        parse_release("t=2")
    with pytest.raises(ValueError):
        parse_release("noon")


config_texts = st.builds(
    lambda rel, model, mode, release, seed, n, d: "\n".join(
        [
            "[channel]",
            f"r_p_rel = {rel}",
            "[fluid]",
            f"model = {model}",
            "[particles]",
            f"N = {n}",
            *([f"D = {d}"] if d is not None else []),
            "[flow]",
            f"mode = {mode}",
            *([f"release = {release}"] if mode == "pulsatile" else []),
            "[sim]",
            f"seed = {seed}",
        ]
    ),
    st.floats(0, 0.95),
    st.sampled_from(["newtonian", "power_law", "herschel_bulkley"]),
    st.sampled_from(["constant", "pulsatile"]),
    st.sampled_from(["ps", "ed", "ld", "t=0.333"]),
    st.integers(0, 2**63),
    st.integers(1, 10**6),
    st.none() | st.floats(0, 1e-6),
)


@settings(max_examples=60)
@given(config_texts)
def test_round_trip_fixed_point(text):
    cfg = parse_config(text)
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert again.digest() == cfg.digest()
    assert serialize_config(again) == serialize_config(cfg)


def test_round_trip_with_waveform_file(tmp_path):
    (tmp_path / "w.csv").write_text("0,5\n0.3,9\n0.6,6\n")
    cfg_path = tmp_path / "run.ini"
    cfg_path.write_text("[flow]\nmode = pulsatile\nwaveform = w.csv\nperiod = 0.8\nrelease = t=0.1\n")
    cfg = load_config(cfg_path)
    again = parse_config(serialize_config(cfg))
    assert again.digest() == cfg.digest()
    assert cfg.flow.waveform.period == 0.8


def test_overrides():
    base = parse_config("")
    cfg = resolve_overrides(base, seed=5, release="ld", r_p_rel=0.75, particles=10)
    assert (cfg.seed, cfg.N) == (5, 10)
    assert isinstance(cfg.flow, PulsatileFlow) and cfg.release_time == 0.0
    assert cfg.dt == 1e-5
    pinned = parse_config("[sim]\ndt = 5e-5\n")
    assert resolve_overrides(pinned, r_p_rel=0.75).dt == 5e-5
    assert config_hash(resolve_overrides(base)) == config_hash(base)


# --- output ----------------------------------------------------------------------


def test_format_csv():
    text = format_csv(["a", "b"], [(1, 0.1), (np.int64(2), 1 / 3)])
    assert text == "a,b\n1,0.1\n2,0.333333333\n"
    with pytest.raises(ValueError):
        format_csv(["a"], [(1, 2)])


@given(st.lists(st.tuples(st.integers(-(10**9), 10**9), st.floats(-1e6, 1e6)), max_size=20))
def test_csv_values_survive(rows):
    text = format_csv(["i", "x"], rows)
    lines = text.split("\n")
    assert lines[-1] == "" and "\r" not in text and len(lines) == len(rows) + 2
    for line, (i, x) in zip(lines[1:], rows):
        a, b = line.split(",")
        assert int(a) == i
        assert float(b) == pytest.approx(x, rel=1e-8, abs=1e-300)


def test_write_csv_targets(tmp_path):
    buf = io.StringIO()
    write_csv(["x"], [(1.5,)], buf)
    write_csv(["x"], [(1.5,)], tmp_path / "x.csv")
    assert (tmp_path / "x.csv").read_bytes() == buf.getvalue().encode()


def test_manifest_round_trip(tmp_path):
    m = RunManifest({"a": 1}, "[sim]\n", "abc", 3, "0.1.0", ["cir.csv"], 1.25)
    m.write(tmp_path / "m.json")
    assert RunManifest.read(tmp_path / "m.json") == m


# --- command line ------------------------------------------------------------------


def csv_rows(path):
    return [line.split(",") for line in path.read_text().splitlines()]


def test_cli_profile(tmp_path):
    out = tmp_path / "p.csv"
    assert cli.main(["profile", "--samples", "5", "--out", str(out)]) == 0
    rows = csv_rows(out)
    assert rows[0] == ["rho_m", "u_newtonian_m_s", "u_power_law_m_s", "u_herschel_bulkley_m_s"]
    centre = [float(v) for v in rows[3]]
    assert centre[0] == 0.0 and centre[1] == pytest.approx(0.684)
    assert [float(v) for v in rows[1][1:]] == [0.0, 0.0, 0.0]


def test_cli_cir(tmp_path):
    out = tmp_path / "c.csv"
    assert cli.main(["cir", "analytic", "--t-max", "0.5", "--out", str(out)]) == 0
    rows = np.array([[float(v) for v in r] for r in csv_rows(out)[1:]])
    assert np.all(np.diff(rows[:, 0]) > 0)
    assert np.all(np.diff(rows[:, 1:], axis=0) >= 0)
    hb_front = rows[rows[:, 3] > 0][0]
    assert hb_front[3] == pytest.approx(0.0025, abs=1e-6)


def test_cli_venturi(tmp_path):
    out = tmp_path / "v.csv"
    assert cli.main(["venturi", "--lc", "0.05", "--samples", "4", "--out", str(out)]) == 0
    rows = csv_rows(out)
    assert rows[0] == ["l_c_m", "r_p_rel", "reduction", "speed_increase"]
    assert [round(float(r[3]), 4) for r in rows[1:]] == [0.0, 0.1538, 0.3043, 0.4286]


def test_cli_waveform(tmp_path):
    out = tmp_path / "w.csv"
    assert cli.main(["waveform", "--normalize", "0.342", "--out", str(out)]) == 0
    rows = csv_rows(out)
    assert len(rows) == 92 and rows[0][0] == "t_s"


def test_cli_simulate_outputs(tmp_path):
    out = tmp_path / "run"
    assert cli.main(["simulate", "--particles", "200", "--seed", "3", "--out", str(out), "--quiet"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 3 and manifest["outputs"] == ["cir.csv", "config.ini"]
    cfg = load_config(out / "config.ini")
    assert cfg.digest() == manifest["config_hash"]
    assert csv_rows(out / "cir.csv")[0] == ["t_release_s", "n_received"]


def test_cli_simulate_deterministic_across_threads(tmp_path, monkeypatch):
    outputs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("MC_PLAQUE_THREADS", threads)
        out = tmp_path / f"t{threads}"
        args = ["simulate", "--particles", "300", "--seed", "11", "--rp-rel", "0.5", "--out", str(out), "--quiet"]
        assert cli.main(args) == 0
        outputs.append((out / "cir.csv").read_bytes())
    assert outputs[0] == outputs[1]


def test_cli_exit_codes(tmp_path):
    assert cli.main(["frobnicate"]) == 1
    assert cli.main(["simulate", "--particles", "many"]) == 1
    bad = tmp_path / "bad.ini"
    bad.write_text("[channel]\nr_p_rel = 1.2\n")
    assert cli.main(["simulate", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.ini")]) == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "plaquemc", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "plaquemc" in proc.stdout

import json
import math
from pathlib import Path

import pandas as pd
import pytest

from qswap.main import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "swap.json"


def test_run_fig5_coherent_sources(tmp_path, capsys):
    assert main(["run", "--preset", "fig5", "--squeezing-db", "0", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "fig5_traces.csv").set_index("trace")
    assert list(frame.index) == ["i1", "i4", "i1+i4", "i1+i4+i_bell_plus", "shot_2beam"]
    assert frame.loc["i1+i4+i_bell_plus", "rel_db"] == pytest.approx(10 * math.log10(2), abs=1e-6)
    for name in ("i1", "i4", "i1+i4"):
        assert frame.loc[name, "rel_db"] == pytest.approx(0.0, abs=1e-6)
    assert (tmp_path / "fig5_criteria.csv").exists()
    assert "i1+i4" in capsys.readouterr().out


def test_reruns_are_byte_identical(tmp_path):
    for out in ("a", "b"):
        assert main(["run", "--preset", "fig8", "--out", str(tmp_path / out)]) == 0
    for name in ("fig8_traces.csv", "fig8_criteria.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_with_oracle_columns(tmp_path):
    assert main(["run", "--preset", "fig5", "--oracle", "50000", "--seed", "3", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "fig5_traces.csv")
    z = frame["z"].dropna()
    assert len(z) == 4
    assert (z.abs() <= 4).all()


def test_oracle_command(tmp_path):
    assert main(["oracle", "--preset", "phase", "--samples", "50000", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "phase_oracle.csv")
    assert set(frame["trace"]) == {"plus", "minus", "difference"}


def test_run_config(tmp_path):
    assert main(["run", "--config", str(CONFIG), "--out", str(tmp_path)]) == 0
    traces = pd.read_csv(tmp_path / "swap_config_traces.csv").set_index("trace")
    assert traces.loc["i1+i_out2", "rel_db"] < 0
    assert traces.loc["i1+i_out2", "rel_db"] == pytest.approx(-0.530, abs=0.01)
    criteria = pd.read_csv(tmp_path / "swap_config_criteria.csv")
    assert list(criteria["verdict"]) == ["violated"]


def test_missing_and_malformed_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 2
    bad.write_text(json.dumps({"sources": []}))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_tapping_a_dark_mode_is_a_physics_error(tmp_path):
    spec = {
        "name": "dark",
        "sources": [{"kind": "coherent", "label": "A", "power": 1.0},
                    {"kind": "coherent", "label": "B", "power": 0.0}],
        "taps": [{"name": "iA", "mode": "A"}, {"name": "iB", "mode": "B"}],
    }
    path = tmp_path / "dark.json"
    path.write_text(json.dumps(spec))
    assert main(["run", "--config", str(path), "--out", str(tmp_path)]) == 3


def test_unphysical_source_flags_are_rejected(tmp_path):
    assert main(["run", "--preset", "fig5", "--squeezing-db", "3", "--excess-db", "1",
                 "--out", str(tmp_path)]) == 2


def test_ppt_on_pure_swap_network(tmp_path, capsys):
    assert main(["criteria", "--preset", "swap", "--pure", "--which", "ppt", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "swap_criteria.csv")
    assert len(frame) == 7
    assert (frame["verdict"] == "violated").all()
    assert capsys.readouterr().out.count("violated") == 7


def test_criteria_on_config(tmp_path):
    assert main(["criteria", "--config", str(CONFIG), "--which", "duan", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "swap_config_criteria.csv")
    assert list(frame["criterion"]) == ["duan"]


def test_sweep_writes_table(tmp_path, capsys):
    assert main(["sweep", "--which", "squeezing", "--steps", "13", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "sweep_squeezing.csv")
    assert len(frame) == 13
    assert "crossed between 3 and 3.5" in capsys.readouterr().out


def test_vlf_on_pure_swap_network(tmp_path):
    assert main(["criteria", "--preset", "swap", "--pure", "--which", "vlf", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "swap_criteria.csv")
    assert len(frame) == 7
    assert set(frame["criterion"]) == {"vlf"}
    assert (frame["verdict"] == "violated").all()


def test_ppt_rows_record_pure_sources(tmp_path):
    assert main(["criteria", "--preset", "swap", "--pure", "--which", "ppt", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "swap_criteria.csv")
    assert all(json.loads(p)["mixed_sources"] is False for p in frame["params"])


def test_sweep_with_preset_traces(tmp_path):
    assert main(["sweep", "--which", "visibility", "--start", "1", "--stop", "1", "--steps", "1",
                 "--preset", "fig7", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "sweep_visibility.csv")
    assert "rel_db[i1+i5+i6+i4]" in frame.columns
    assert frame.loc[0, "rel_db[i1+i5+i6+i4]"] == pytest.approx(10 * math.log10(0.5), abs=1e-6)

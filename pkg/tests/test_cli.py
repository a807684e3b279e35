import json
import math
from pathlib import Path

import numpy as np
import pytest

from cli import run
from conftest import vertices
from relaying import __version__
from utils.output_utils import region_from_csv

CHANNELS = Path(__file__).resolve().parent.parent / "channel_data"
WEAK_DIRECT_HIGH = ["--p-db", "10", "--g-ar-db", "0", "--g-br-db", "5", "--g-ab-db", "-7"]
UNIT = ["--p-db", "0", "--g-ar-db", "0", "--g-br-db", "0", "--g-ab-db", "-100"]


def test_region_pentagon(capsys):
    code = run(["region", "--protocol", "mabc", "--bound", "inner", *UNIT, "--delta", "0.5,0.5"])
    assert code == 0
    region = region_from_csv(capsys.readouterr().out)
    h = 0.5 * math.log2(3.0) - 0.5
    assert vertices(region) == pytest.approx(np.array([(0, 0), (0.5, 0), (0.5, h), (h, 0.5), (0, 0.5)]))


def test_region_json_has_metadata(capsys):
    assert run(["region", "--protocol", "tdbc", "--optimized", *WEAK_DIRECT_HIGH, "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["metadata"]["version"] == __version__
    assert payload["metadata"]["parameters"]["protocol"] == "tdbc"
    assert payload["metadata"]["parameters"]["mu_grid_size"] == 201
    assert payload["vertices"][0] == [0.0, 0.0]


def test_delta_is_renormalized_within_tolerance(capsys):
    assert run(["region", "--protocol", "dt", *UNIT, "--delta", "0.5,0.5000000001"]) == 0


@pytest.mark.parametrize("delta", ["0.5,0.4", "0.5", "a,b", "1.5,-0.5"])
def test_bad_delta_is_a_usage_error(capsys, delta):
    assert run(["region", "--protocol", "mabc", *UNIT, "--delta", delta]) == 2
    assert "error [delta]" in capsys.readouterr().err


def test_hbc_outer_is_a_computation_error(capsys):
    assert run(["region", "--protocol", "hbc", "--bound", "outer", *WEAK_DIRECT_HIGH]) == 3
    err = capsys.readouterr().err
    assert "error [bound]" in err
    assert "HBC outer bound" in err


def test_unknown_flag_and_missing_gain(capsys):
    assert run(["region", "--protocol", "mabc", "--bogus"]) == 2
    assert run(["region", "--protocol", "mabc", "--p-db", "0"]) == 2
    assert "error [g_ab_db]" in capsys.readouterr().err


def test_unknown_bound_and_protocol():
    assert run(["region", "--protocol", "mabc", "--bound", "tight", *UNIT]) == 2
    assert run(["optimize", "--protocol", "xyz", *UNIT]) == 2


def test_help_exits_cleanly(capsys):
    assert run(["sweep", "--help"]) == 0
    assert "--parameter" in capsys.readouterr().out


def test_optimize_csv(capsys):
    assert run(["optimize", "--protocol", "mabc", *UNIT]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "protocol,bound,mu,value,r_a,r_b,sum_rate,delta_1,delta_2,delta_3,delta_4"
    fields = lines[1].split(",")
    assert float(fields[6]) == pytest.approx(0.88422, abs=1e-5)
    assert fields[9] == "" and fields[10] == ""


def test_compare_reports_witness(capsys):
    assert run(["compare", "--a", "hbc:inner", "--b", "tdbc:outer", *WEAK_DIRECT_HIGH, "--format", "json"]) == 0
    row = json.loads(capsys.readouterr().out)["rows"][0]
    assert row["contained"] is False
    assert row["witness_r_a"] is not None


def test_compare_reports_containment(capsys):
    assert run(["compare", "--a", "mabc:inner", "--b", "hbc", *WEAK_DIRECT_HIGH, "--format", "json"]) == 0
    row = json.loads(capsys.readouterr().out)["rows"][0]
    assert row["contained"] is True
    assert row["witness_r_a"] is None


def test_discrete(capsys):
    channel = str(CHANNELS / "noiseless_binary.json")
    assert run(["discrete", "--channel", channel, "--resolution", "4"]) == 0
    region = region_from_csv(capsys.readouterr().out)
    assert vertices(region) == pytest.approx(np.array([(0, 0), (0.5, 0), (0.5, 0.5), (0, 0.5)]), abs=1e-9)


def test_discrete_missing_file(tmp_path, capsys):
    assert run(["discrete", "--channel", str(tmp_path / "nope.json")]) == 2
    assert "error [channel]" in capsys.readouterr().err


def test_output_file_is_written(tmp_path):
    out = tmp_path / "nested" / "region.csv"
    assert run(["region", "--protocol", "dt", *UNIT, "--output", str(out)]) == 0
    assert out.read_text(encoding="utf-8").startswith("r_a,r_b\n")
    assert [p.name for p in out.parent.iterdir()] == ["region.csv"]


def test_sweep_and_mc_are_byte_identical(tmp_path):
    sweep = ["sweep", "--parameter", "g_ab_db", "--start", "-10", "--stop", "0", "--step", "5",
             "--p-db", "15", "--g-ar-db", "0", "--g-br-db", "5"]
    mc = ["mc", "--samples", "30", "--seed", "9", "--format", "json", "--samples-out"]
    outputs = []
    for attempt in range(2):
        sweep_out = tmp_path / f"sweep{attempt}.csv"
        mc_out = tmp_path / f"mc{attempt}.json"
        samples_out = tmp_path / f"samples{attempt}.csv"
        assert run([*sweep, "--output", str(sweep_out)]) == 0
        assert run([*mc, str(samples_out), "--output", str(mc_out)]) == 0
        outputs.append([p.read_bytes() for p in (sweep_out, mc_out, samples_out)])
    assert outputs[0] == outputs[1]


def test_mc_json_echoes_run_settings(capsys):
    assert run(["mc", "--samples", "5", "--seed", "4", "--protocols", "mabc,hbc", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    params = payload["metadata"]["parameters"]
    assert (params["seed"], params["samples"], params["model"]) == (4, 5, "rayleigh")
    assert params["rng"].startswith("PCG64")
    assert [row["protocol"] for row in payload["rows"]] == ["hbc", "mabc"]


def test_mc_rejects_bad_config(capsys):
    assert run(["mc", "--samples", "0"]) == 2
    assert "error [samples]" in capsys.readouterr().err


def test_sweep_rejects_zero_step(capsys):
    assert run(["sweep", "--parameter", "p_db", "--start", "0", "--stop", "1", "--step", "0", "--g-ab-db", "0"]) == 2
    assert "error [step]" in capsys.readouterr().err


def test_mc_metadata_leaves_out_destinations(tmp_path, capsys):
    assert run(["mc", "--samples", "3", "--format", "json", "--samples-out", str(tmp_path / "s.csv")]) == 0
    params = json.loads(capsys.readouterr().out)["metadata"]["parameters"]
    assert "samples_out" not in params
    assert "output" not in params


def test_sweep_names_the_offending_bound(capsys):
    assert run(["sweep", "--parameter", "p_db", "--start", "2", "--stop", "1", "--step", "1", "--g-ab-db", "0"]) == 2
    err = capsys.readouterr().err
    assert "error [stop]" in err
    assert "exceeds stop" in err


def test_optimized_region_rejects_fixed_delta(capsys):
    assert run(["region", "--protocol", "mabc", "--optimized", *UNIT, "--delta", "0.5,0.5"]) == 2
    assert "error [delta]" in capsys.readouterr().err

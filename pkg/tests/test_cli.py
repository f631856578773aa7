import csv
import json

import pytest
from hypothesis import given, settings, strategies as st

from qspeckle import EnsembleKind, EnsembleSpec, InputState, StateKind
from qspeckle.cli import (
    EXIT_IO,
    EXIT_RANGE,
    EXIT_USAGE,
    RunConfig,
    emit_csv,
    format_float,
    main,
    parse_config,
)


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def test_predict_fig3_config():
    cfg = parse_config(["predict", "--state", "thermal", "--mean", "1", "--figure", "fig3"])
    assert cfg.subcommand == "predict"
    assert cfg.state == InputState.thermal(1.0)
    assert cfg.sweep == {"figure": "fig3"}


def test_simulate_maps_to_spec():
    cfg = parse_config("simulate --seed 42 --realizations 10000 --modes 64 --ell-over-l 0.25 "
                       "--state fock --n 2".split())
    assert cfg.ensemble == EnsembleSpec(64, 0.25, EnsembleKind.INDEPENDENT_TAU, 10000, 42)
    assert cfg.state == InputState.fock(2)


def test_range_error_names_field(capsys):
    assert main("simulate --ell-over-l 1.5 --state fock --n 2".split()) == EXIT_RANGE
    assert "ell_over_L" in capsys.readouterr().err


@pytest.mark.parametrize("argv,field", [
    ("predict --state thermal --mean -1", "mean_photons"),
    ("predict --state thermal --g 1 --ell-over-l 0.5", "g"),
    ("simulate --state coherent --modes 4 --ell-over-l 0.2", "ell_over_L"),
])
def test_other_range_errors(capsys, argv, field):
    assert main(argv.split()) == EXIT_RANGE
    assert f"invalid {field}" in capsys.readouterr().err


@pytest.mark.parametrize("argv", ["predict --bogus", "frobnicate", "simulate --modes 8", "figure",
                                  "predict --state fock --n 2 --mean 3"])
def test_usage_errors(argv):
    assert main(argv.split()) == EXIT_USAGE


def test_unwritable_path(tmp_path):
    assert main(["predict", "--state", "coherent", "-o", str(tmp_path / "no" / "x.csv")]) == EXIT_IO
    with pytest.raises(OSError):
        emit_csv([], tmp_path / "missing" / "x.csv")


def test_fig3_coherent_values(tmp_path):
    out = tmp_path / "f3.csv"
    assert main(["figure", "fig3", "--state", "coherent", "-o", str(out)]) == 0
    rows = read_rows(out)
    assert rows and all(r["value"] == "1.000000000000" for r in rows)
    assert list(rows[0]) == ["quantity", "state", "mean_photons", "ell_over_L", "g", "value"]


def test_empty_sweep_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    emit_csv([], out)
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines == ["quantity,state,mean_photons,ell_over_L,g,value"]


def test_predict_byte_identical(tmp_path):
    out = tmp_path / "p.csv"
    argv = ["predict", "--state", "thermal", "--mean", "2", "--g", "8", "-o", str(out)]
    assert main(argv) == 0
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    base = RunConfig("simulate", InputState.thermal(1.0), EnsembleSpec(32, 0.5, realizations=500))
    cfg.write_text(json.dumps(base.to_dict()))
    out = parse_config(["simulate", "--config", str(cfg), "--realizations", "50", "--state", "fock"])
    assert out.ensemble.realizations == 50 and out.ensemble.n_modes == 32
    assert out.state == InputState.fock(1)


def test_output_is_self_describing(tmp_path):
    first = tmp_path / "first.csv"
    assert main("simulate --state thermal --modes 8 --realizations 100 --seed 3 -o".split() + [str(first)]) == 0
    second = tmp_path / "second.csv"
    assert main(["simulate", "--config", str(first), "-o", str(second)]) == 0
    strip = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("# config")]
    assert strip(first) == strip(second)


def test_simulate_csv_columns(tmp_path):
    out = tmp_path / "s.csv"
    assert main("simulate --state coherent --modes 8 --realizations 200 -o".split() + [str(out)]) == 0
    rows = {r["quantity"]: r for r in read_rows(out)}
    assert list(next(iter(rows.values())))[-4:] == ["estimate", "stderr", "analytic", "pull"]
    assert rows["total_transmission_variance_ratio"]["estimate"] == rows["mean_total_transmission"]["estimate"]


def test_simulate_json(tmp_path):
    out = tmp_path / "s.json"
    assert main("simulate --state fock --n 1 --modes 8 --realizations 300 --seed 9 --format json -o".split()
                + [str(out)]) == 0
    doc = json.loads(out.read_text())
    assert list(doc)[:3] == ["tool", "version", "config"]
    assert doc["spec_echo"]["master_seed"] == 9
    assert {"estimates", "analytic", "rejected_realizations", "wall_time"} <= set(doc)
    est = doc["estimates"]["two_point_correlation"]
    assert abs(est["value"]) <= 3 * est["stderr"] + 1e-12
    # JSON outputs re-run from their own config echo.
    assert parse_config(["simulate", "--config", str(out)]).ensemble.master_seed == 9


def test_oracle_subcommand(tmp_path):
    out = tmp_path / "o.csv"
    assert main("oracle --state fock --n 3 --modes 3 -o".split() + [str(out)]) == 0
    rows = read_rows(out)
    assert rows and all(abs(float(r["difference"])) <= 1e-10 for r in rows)


def test_format_float():
    assert format_float(1.0) == "1.000000000000"
    assert format_float(float("inf")) == "inf"
    assert format_float(0.1875) == "0.1875000000000"


states = st.builds(InputState, st.sampled_from(list(StateKind)), st.integers(0, 20))
specs = st.builds(EnsembleSpec, st.integers(4, 64), st.sampled_from([0.3, 0.5, 1.0]),
                  st.sampled_from(list(EnsembleKind)), st.integers(1, 10**5), st.integers(0, 2**63))


@given(st.sampled_from(["simulate", "oracle", "predict", "figure"]), states, specs,
       st.sampled_from(["csv", "json"]), st.none() | st.just("out.csv"))
@settings(max_examples=50)
def test_config_round_trip(sub, state, spec, fmt, path):
    cfg = RunConfig(sub, state, spec, {"figure": "fig2t"}, 1, [(1, 2)], 2, path, fmt)
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg

import json

import numpy as np
import pytest

from pipedrive.config import load_scenario, parse_sweep, scenario_from_dict
from pipedrive.errors import ConfigError
from pipedrive.io import (
    ENERGY_HEADER,
    probe_column,
    profile_filename,
    read_table,
    write_energy,
    write_oscillogram,
    write_profile,
    write_run,
    write_table,
)
from pipedrive.model import LoadKind
from pipedrive.radial import Oscillogram
from pipedrive.solver import MediumModel, Scenario, run

from conftest import field_pulse, ref_pipe, ref_soil

DOC = {
    "pipe": {"E": "210 GPa", "rho": "7530 kg/m3", "h": "3 mm", "R": "45 mm", "L": "7.5 m", "L1": "4 m"},
    "soil": {"a": "0.611 m/ms", "b": "0.357 m/ms", "gamma": "2000 kg/m3", "R2": "0.8 m", "tau0": "0.1 MPa"},
    "load": {"kind": "half-sine", "P0": "88 kN", "t0": "0.22 ms"},
    "mesh": {"h_z": "0.1 m"},
    "run": {"t_end": "1 ms", "probes": ["0 m", "7.5 m"], "snapshot_times": ["0.5 ms"], "model": "rigid"},
}


class TestWriters:
    def test_round_trip_precision(self, tmp_path):
        x = 0.1 + 0.2
        write_table(tmp_path / "a.csv", ["x", "flag", "n"], [(x, True, 3)])
        header, rows = read_table(tmp_path / "a.csv")
        assert header == ["x", "flag", "n"]
        assert float(rows[0][0]) == x
        assert rows[0][1:] == ["true", "3"]

    def test_oscillogram_multi(self, tmp_path):
        osc = Oscillogram(np.array([0.0, 1.0]), np.array([[0.0, 1.0], [2.0, 3.0]]))
        write_oscillogram(tmp_path / "o.csv", osc, ["U_z0_m", "U_z1_m"])
        header, rows = read_table(tmp_path / "o.csv")
        assert header == ["t_s", "U_z0_m", "U_z1_m"]
        assert rows[1] == ["1", "2", "3"]

    def test_oscillogram_column_count(self, tmp_path):
        osc = Oscillogram(np.array([0.0]), np.array([[0.0, 1.0]]))
        with pytest.raises(ValueError):
            write_oscillogram(tmp_path / "o.csv", osc, ["U_m"])

    def test_profile_name(self, tmp_path):
        assert profile_filename(0.0025) == "tau_t2.5.csv"
        p = write_profile(tmp_path, 0.001, [3.5, 3.6], [0.0, 1e3])
        assert p.name == "tau_t1.csv"
        assert read_table(p)[0] == ["z_m", "tau_Pa"]

    def test_energy_header(self, tmp_path):
        e = {k: np.zeros(2) for k in ("work", "kinetic", "strain", "dissipated", "residual")}
        p = write_energy(tmp_path / "e.csv", np.zeros(2), e)
        assert read_table(p)[0] == ENERGY_HEADER

    def test_probe_columns(self):
        assert probe_column(0.0) == "U_z0_m"
        assert probe_column(3.75) == "U_z3.75_m"

    def test_write_run(self, tmp_path):
        sc = Scenario(ref_pipe(), ref_soil(), field_pulse(), t_end=1e-3, probes=(0.0, 7.5), snapshot_times=(5e-4,))
        files = write_run(tmp_path, run(sc))
        names = sorted(p.name for p in files)
        assert names == ["energy.csv", "oscillogram.csv", "tau_t0.5.csv"]
        assert read_table(tmp_path / "oscillogram.csv")[0] == ["t_s", "U_z0_m", "U_z7.5_m"]

    def test_empty_csv(self, tmp_path):
        (tmp_path / "e.csv").write_text("")
        with pytest.raises(ValueError):
            read_table(tmp_path / "e.csv")


class TestConfig:
    def test_parse(self):
        sc = scenario_from_dict(DOC)
        assert sc.pipe.E == 2.1e11 and sc.pipe.h == 0.003
        assert sc.soil.G == pytest.approx(2000 * 357.0**2, rel=1e-12)
        assert sc.load.kind is LoadKind.HALF_SINE and sc.load.t0 == pytest.approx(0.22e-3)
        assert sc.t_end == pytest.approx(1e-3)
        assert sc.probes == (0.0, 7.5)
        assert sc.model is MediumModel.RIGID
        assert sc.target_h_z == 0.1

    def test_moduli(self):
        doc = json.loads(json.dumps(DOC))
        doc["soil"] = {"G": "254.898 MPa", "lambda": "236.846 MPa", "gamma": "2000 kg/m3", "R2": "0.8 m", "tau0": "0.1 MPa"}
        assert scenario_from_dict(doc).soil.G == pytest.approx(2.54898e8)

    def test_step_load(self):
        doc = json.loads(json.dumps(DOC))
        doc["load"] = {"kind": "step", "P0": "88 kN"}
        assert scenario_from_dict(doc).load.kind is LoadKind.STEP

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.pop("pipe"),
            lambda d: d["pipe"].update(E="210"),
            lambda d: d["pipe"].update(E="210 kN"),
            lambda d: d["soil"].update(G="1 MPa"),
            lambda d: d["load"].update(kind="ramp"),
            lambda d: d["run"].update(model="elastic"),
            lambda d: d["run"].update(probes="0 m"),
            lambda d: d["pipe"].update(h="60 mm"),
            lambda d: d["run"].pop("t_end"),
            lambda d: d.update(pipe=[1, 2]),
        ],
    )
    def test_errors(self, mutate):
        doc = json.loads(json.dumps(DOC))
        mutate(doc)
        with pytest.raises(ConfigError):
            scenario_from_dict(doc)

    def test_not_an_object(self):
        with pytest.raises(ConfigError):
            scenario_from_dict([])

    def test_load_file(self, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps(DOC))
        assert load_scenario(tmp_path / "c.json").pipe.L == 7.5
        (tmp_path / "bad.json").write_text("{")
        with pytest.raises(ConfigError):
            load_scenario(tmp_path / "bad.json")
        with pytest.raises(ConfigError):
            load_scenario(tmp_path / "missing.json")

    def test_sweep(self):
        sw = parse_sweep({"parameter": "tau0", "values": ["0.01 MPa", "0.1 MPa"]})
        assert sw.values == (1e4, 1e5)
        for bad in (
            {"parameter": "E", "values": ["1 GPa"]},
            {"parameter": "tau0", "values": ["0.1 MPa", "0.01 MPa"]},
            {"parameter": "tau0", "values": []},
            {"parameter": "tau0", "values": ["-1 MPa"]},
            {"parameter": "tau0", "values": ["1 m"]},
        ):
            with pytest.raises(ConfigError):
                parse_sweep(bad)

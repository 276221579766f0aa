import csv
import json
import math

import numpy as np
import pytest
import yaml

from radical_jumps.cli import BenchCommand
from radical_jumps.cli import BenchSystem
from radical_jumps.cli import ConfigFromDict
from radical_jumps.cli import ConvergeCommand
from radical_jumps.cli import RunCommand
from radical_jumps.cli import RunMethod
from radical_jumps.cli import _commands
from radical_jumps.cli import main
from radical_jumps.foundation.checks import IsStrictChecking
from radical_jumps.master_equation import DimensionCapError
from radical_jumps.mcwf import CHUNK_SIZE
from radical_jumps.mcwf import TrajectoryFailedError


def Document(tmp_path, **run):
    run.setdefault("n_samples", 40)
    run.setdefault("t_max", 0.5)
    run.setdefault("grid_dt", 0.05)
    return {
        "system": {
            "field": {"magnitude_mT": 0.05},
            "kinetics": {"k_b": 2.0, "k_f": 0.5},
            "dissipation": {"gamma_rf": [0.2, 0.2]},
            "nuclei": [
                {"label": "H1", "multiplicity": 2, "electron": 0, "hyperfine": 1.0},
            ],
        },
        "run": run,
        "output": {"directory": str(tmp_path / "out")},
        "convergence": {"sample_sizes": [4, 8], "repeats": 2},
        "bench": {"max_added_protons": 1, "n_samples": 4, "t_max": 0.2},
    }


def ReadCsv(path):
    with path.open(encoding="utf-8", newline="") as stream:
        rows = list(csv.reader(stream))
    return rows[0], rows[1:]


def WriteYaml(path, document):
    path.write_text(yaml.safe_dump(document), encoding="utf-8")
    return path


def testRunMcwf(tmp_path) -> None:
    config = ConfigFromDict(Document(tmp_path))
    manifest = RunCommand(config)
    out = tmp_path / "out"

    header, rows = ReadCsv(out / "ensemble.csv")
    assert header == ["t_us", "p1", "p1_stderr", "pS", "pS_stderr"]
    assert len(rows) == 11
    assert [float(r[0]) for r in rows] == pytest.approx(np.linspace(0.0, 0.5, 11))
    assert float(rows[0][1]) == 1.0
    assert float(rows[0][3]) == pytest.approx(1.0)

    assert manifest.artifacts == ("ensemble.csv",)
    assert manifest.dim == 8
    assert manifest.nucleus_count == 1
    written = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert written["command"] == "mcwf"
    assert written["master_seed"] == 0
    assert written["results"]["mcwf"]["n_samples"] == 40
    assert written["results"]["mcwf_yields"]["product_stderr"] > 0
    assert written["wall_seconds"] >= 0
    assert written["config"]["run"]["n_samples"] == 40
    assert IsStrictChecking()


def testEnsembleCsvIsByteIdentical(tmp_path) -> None:
    document = Document(tmp_path, n_samples=70)
    first = RunCommand(ConfigFromDict(document).WithOverrides(out=str(tmp_path / "a")))
    again = RunCommand(ConfigFromDict(document).WithOverrides(out=str(tmp_path / "b")))
    parallel = RunCommand(
        ConfigFromDict(document).WithOverrides(workers=2, out=str(tmp_path / "c"))
    )
    assert first.artifacts == again.artifacts == parallel.artifacts
    reference = (tmp_path / "a" / "ensemble.csv").read_bytes()
    assert (tmp_path / "b" / "ensemble.csv").read_bytes() == reference
    assert (tmp_path / "c" / "ensemble.csv").read_bytes() == reference


def testCsvIsByteIdenticalAcrossManyWorkers(tmp_path) -> None:
    # More chunks than the largest worker count, the last one partial.
    n_samples = 8 * CHUNK_SIZE + 5
    document = Document(tmp_path, n_samples=n_samples, t_max=0.2, grid_dt=0.02)
    path = WriteYaml(tmp_path / "pair.yaml", document)
    outputs = {}
    for workers in (1, 4, 8):
        out = tmp_path / f"workers_{workers}"
        assert main(["run", str(path), "--workers", str(workers), "--out", str(out)]) == 0
        outputs[workers] = {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}
    assert list(outputs[1]) == ["ensemble.csv"]
    assert outputs[4] == outputs[1]
    assert outputs[8] == outputs[1]


def testRunMasterEquation(tmp_path) -> None:
    manifest = RunCommand(ConfigFromDict(Document(tmp_path, method="me")))
    header, rows = ReadCsv(tmp_path / "out" / "master_equation.csv")
    assert header == ["t_us", "p1", "pS"]
    assert len(rows) == 11
    p1 = np.array([float(r[1]) for r in rows])
    assert p1[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(p1) < 0)
    assert manifest.results["me"]["n_steps"] > 0
    assert manifest.results["me_yields"]["singlet_stderr"] is None


def testCsvHasFifteenSignificantDigits(tmp_path) -> None:
    RunCommand(ConfigFromDict(Document(tmp_path, method="me")))
    _, rows = ReadCsv(tmp_path / "out" / "master_equation.csv")
    digits = rows[5][1].lstrip("0.").replace(".", "").split("e")[0]
    assert len(digits) >= 12


def testCompare(tmp_path) -> None:
    document = Document(tmp_path, method="compare")
    document["output"]["formats"] = ["csv", "gnuplot"]
    manifest = RunCommand(ConfigFromDict(document))
    out = tmp_path / "out"
    assert set(manifest.artifacts) == {
        "ensemble.csv",
        "ensemble.gp",
        "master_equation.csv",
        "master_equation.gp",
        "deviation.csv",
        "deviation.gp",
    }
    header, rows = ReadCsv(out / "deviation.csv")
    assert header[0] == "t_us" and header[3] == "f1_deviation"
    deviation = np.array([float(r[3]) for r in rows])
    mcwf = np.array([float(r[1]) for r in rows])
    me = np.array([float(r[2]) for r in rows])
    assert deviation == pytest.approx(mcwf - me, abs=1e-12)
    assert 0 < manifest.results["E1"] < 0.5
    assert math.isfinite(manifest.results["ES"])

    script = (out / "ensemble.gp").read_text(encoding="utf-8")
    assert "set datafile separator ','" in script
    assert "using 1:2:3 with yerrorlines" in script


def testCompareAliasForcesBothMethods(tmp_path) -> None:
    config = ConfigFromDict(Document(tmp_path, method="mcwf"))
    manifest = RunCommand(config, RunMethod.COMPARE)
    assert manifest.command == "compare"
    assert "deviation.csv" in manifest.artifacts


def testFactoredForwardRate(tmp_path) -> None:
    plain = RunCommand(
        ConfigFromDict(Document(tmp_path, method="me")).WithOverrides(out=str(tmp_path / "p"))
    )
    factored = RunCommand(
        ConfigFromDict(Document(tmp_path, method="me", factor_kf=True)).WithOverrides(
            out=str(tmp_path / "f")
        )
    )
    _, plain_rows = ReadCsv(tmp_path / "p" / "master_equation.csv")
    _, factored_rows = ReadCsv(tmp_path / "f" / "master_equation.csv")
    for a, b in zip(plain_rows, factored_rows):
        assert float(a[1]) == pytest.approx(float(b[1]), abs=1e-6)
        assert float(a[2]) == pytest.approx(float(b[2]), abs=1e-6)
    assert factored.results["me_yields"]["product_yield"] == pytest.approx(
        plain.results["me_yields"]["product_yield"], abs=1e-6
    )


def testDimensionCapRefusal(tmp_path) -> None:
    config = ConfigFromDict(Document(tmp_path, method="compare", me_dim_cap=4))
    with pytest.raises(DimensionCapError, match="cap of 4"):
        RunCommand(config)
    assert not (tmp_path / "out").exists()


def testConverge(tmp_path) -> None:
    manifest = ConvergeCommand(ConfigFromDict(Document(tmp_path)))
    header, rows = ReadCsv(tmp_path / "out" / "convergence.csv")
    assert header == ["n_samples", "E1_mean", "E1_stderr", "ES_mean", "ES_stderr"]
    assert [r[0] for r in rows] == ["4", "8"]
    assert all(float(value) >= 0 for row in rows for value in row[1:])
    assert math.isfinite(manifest.results["E1_slope"])
    assert manifest.results["repeats"] == 2


def testBenchSystem(one_proton_spec) -> None:
    spec = BenchSystem(one_proton_spec, 3, 0.4)
    assert spec.nucleus_count == 4
    assert [n.coupled_electron for n in spec.nuclei[1:]] == [0, 1, 0]
    assert spec.layout.total_dim == 64
    assert BenchSystem(one_proton_spec, 0, 0.4) == one_proton_spec


def testBench(tmp_path) -> None:
    manifest = BenchCommand(ConfigFromDict(Document(tmp_path)))
    header, rows = ReadCsv(tmp_path / "out" / "bench.csv")
    assert header[:3] == ["added_protons", "dim", "me_seconds"]
    assert [(r[0], r[1]) for r in rows] == [("0", "8"), ("1", "16")]
    assert all(int(r[6]) > 0 for r in rows)
    assert manifest.results["me_growth_factor"] > 0
    assert manifest.results["mcwf_growth_factor"] > 0


def testBenchSkipsMasterEquationAboveCap(tmp_path) -> None:
    manifest = BenchCommand(ConfigFromDict(Document(tmp_path, me_dim_cap=8)))
    _, rows = ReadCsv(tmp_path / "out" / "bench.csv")
    assert rows[1][2] == "nan"
    assert rows[1][3] == "0"
    assert manifest.results["me_growth_factor"] is None
    assert manifest.results["mcwf_growth_factor"] > 0


def testMainExitCodes(tmp_path, capsys) -> None:
    path = WriteYaml(tmp_path / "pair.yaml", Document(tmp_path))
    assert main(["run", str(path), "--samples", "10", "--seed", "3"]) == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["master_seed"] == 3
    assert manifest["config"]["run"]["n_samples"] == 10

    bad = Document(tmp_path)
    bad["system"]["kinetics"]["k_b"] = -1
    assert main(["run", str(WriteYaml(tmp_path / "bad.yaml", bad))]) == 2
    assert "kinetics.k_b" in capsys.readouterr().err

    capped = WriteYaml(tmp_path / "capped.yaml", Document(tmp_path, me_dim_cap=4))
    assert main(["compare", str(capped)]) == 1
    assert "DimensionCapError" in capsys.readouterr().err


def testMainReportsFailedTrajectory(tmp_path, capsys, mocker) -> None:
    path = WriteYaml(tmp_path / "pair.yaml", Document(tmp_path))
    mocker.patch.object(
        _commands,
        "RunEnsemble",
        side_effect=TrajectoryFailedError("Trajectory 3 failed: step size underflow", 3),
    )
    assert main(["run", str(path)]) == 1
    assert "Trajectory 3 failed" in capsys.readouterr().err


def testRerunFromManifest(tmp_path) -> None:
    path = WriteYaml(tmp_path / "pair.yaml", Document(tmp_path))
    assert main(["run", str(path), "--seed", "11"]) == 0
    manifest_path = tmp_path / "out" / "manifest.json"
    assert main(["run", str(manifest_path), "--out", str(tmp_path / "again")]) == 0
    assert (tmp_path / "again" / "ensemble.csv").read_bytes() == (
        tmp_path / "out" / "ensemble.csv"
    ).read_bytes()


@pytest.mark.slow
def testMasterEquationCostGrowsFasterThanTrajectories(tmp_path) -> None:
    document = Document(tmp_path)
    document["system"]["nuclei"] = [
        {"label": "N5", "multiplicity": 3, "electron": 0, "hyperfine": 0.5},
    ]
    document["bench"] = {"max_added_protons": 4, "n_samples": 64, "t_max": 2.0}
    manifest = BenchCommand(ConfigFromDict(document))

    _, rows = ReadCsv(tmp_path / "out" / "bench.csv")
    assert [int(r[1]) for r in rows] == [12, 24, 48, 96, 192]
    results = manifest.results
    assert results["me_growth_factor"] > results["mcwf_growth_factor"]
    gap = math.log(results["me_growth_factor"]) - math.log(results["mcwf_growth_factor"])
    assert gap > math.hypot(results["me_log_slope_stderr"], results["mcwf_log_slope_stderr"])

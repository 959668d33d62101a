import csv
import io
import json

import numpy as np
import pytest

from kubo_rigidity import cli
from kubo_rigidity.hermitian import Bipartite, dump_bipartite
from kubo_rigidity.random_ops import random_pd_bipartite


def run_main(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_all_passes(capsys):
    code, out, err = run_main(capsys, "verify-all")
    record = json.loads(out)
    assert code == 0
    assert all(line.startswith("PASS") for line in err.strip().splitlines())
    labels = set(record["verdicts"])
    for thm in ("main1", "main2", "main3", "main4", "ent-rig"):
        assert f"{thm}[geometric:0.5]" in labels
    assert record["wall_time"] > 0


def test_seed_does_not_change_theorem_verdicts():
    a = cli.run(cli.config_from_args(cli.build_parser().parse_args(["verify-all", "--seed", "1"])))
    b = cli.run(cli.config_from_args(cli.build_parser().parse_args(["verify-all", "--seed", "987654321"])))
    assert a["verdicts"] == b["verdicts"]
    assert a["rows"] == b["rows"]


def test_deterministic_given_config(capsys):
    _, out1, _ = run_main(capsys, "rigidity-scan", "--mean", "harmonic:0.5", "--format", "csv")
    _, out2, _ = run_main(capsys, "rigidity-scan", "--mean", "harmonic:0.5", "--format", "csv")
    assert out1 == out2


def test_replay_round_trip(tmp_path, capsys):
    path = tmp_path / "run.json"
    code, _, _ = run_main(capsys, "lift", "--dims", "2x5", "--mean", "geometric:0.5", "--out", str(path))
    assert code == 0
    record = json.loads(path.read_text())
    assert cli.replay(record) == record["verdicts"]
    assert record["config"]["dims"] == [2, 5]


def test_csv_matches_json(capsys):
    _, js, _ = run_main(capsys, "rigidity-scan", "--mean", "geometric:0.5", "--mean", "log:1")
    _, cs, _ = run_main(capsys, "rigidity-scan", "--mean", "geometric:0.5", "--mean", "log:1", "--format", "csv")
    rows = json.loads(js)["rows"]
    parsed = list(csv.DictReader(io.StringIO(cs)))
    assert len(parsed) == len(rows)
    for row, line in zip(rows, parsed):
        for key, value in row.items():
            if isinstance(value, float):
                assert float(line[key]) == value
            else:
                assert line[key] == str(value)


def test_inconclusive_exit_code(capsys):
    code, out, err = run_main(capsys, "rigidity-scan", "--mean", "geometric:0.5", "--eps", "0.02", "--c", "0.6")
    assert code == 2
    assert "inconclusive" in err


def test_parse_errors_exit_1(capsys):
    assert run_main(capsys, "lift", "--mean", "cubic:0.5")[0] == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["lift", "--dims", "3"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["lift", "--eps", "0.05,0.1"])
    assert exc.value.code == 1


def test_contradiction_exit_code():
    record = {"verdicts": {"x": {"conclusion": "violated", "expected": "preserved"},
                           "y": {"conclusion": "inconclusive", "expected": "violated"}}}
    assert cli.exit_code(record) == 3


def test_schmidt_amplify_rows(capsys):
    code, out, _ = run_main(capsys, "schmidt-amplify", "--r", "3", "--eps", "0.05")
    row = json.loads(out)["rows"][0]
    assert code == 0
    assert row["mean_sn_lower"] == 6


def test_curvature_flags_table(capsys):
    code, out, _ = run_main(capsys, "curvature", "--mean", "geometric:0.25", "--mean", "harmonic:0.5", "--mean", "log:0.5")
    flags = [r["discrepancy"] for r in json.loads(out)["rows"]]
    assert code == 0
    assert flags == ["ok", "unverifiable", "mismatch"]


def test_cone_sandwich_and_channel(capsys):
    assert run_main(capsys, "cone-sandwich", "--dims", "3x3", "--mean", "arithmetic:0.5")[0] == 0
    assert run_main(capsys, "channel-mean", "--mean", "harmonic:0.5")[0] == 0


def test_mean_from_files(tmp_path, capsys):
    rng = np.random.default_rng(3)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    dump_bipartite(random_pd_bipartite(rng, 2, 2), a)
    dump_bipartite(random_pd_bipartite(rng, 2, 2), b)
    code, out, _ = run_main(capsys, "mean", "--a", str(a), "--b", str(b), "--mean", "geometric:0.5")
    assert code == 0
    assert json.loads(out)["results"][0]["result"]["m"] == 2


def test_mean_requires_files(capsys):
    assert run_main(capsys, "mean")[0] == 1


def test_channel_mean_from_files(tmp_path, capsys):
    from kubo_rigidity.channels import channel_to_dict, map_of_choi, normalize

    rng = np.random.default_rng(5)
    paths = []
    for name in ("phi", "psi"):
        phi = map_of_choi(normalize(random_pd_bipartite(rng, 2, 2)))
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(channel_to_dict(phi)))
        paths.append(str(p))
    code, out, _ = run_main(capsys, "channel-mean", "--phi", paths[0], "--psi", paths[1])
    assert code == 0
    assert json.loads(out)["rows"][0]["tp"] is True


def test_cone_tol_env(monkeypatch, capsys, tmp_path):
    a = tmp_path / "a.json"
    dump_bipartite(Bipartite(np.diag([1.0, 1.0, 1.0, 1e-7]), 2, 2), a)
    _, out, _ = run_main(capsys, "mean", "--a", str(a), "--b", str(a))
    assert json.loads(out)["results"][0]["verdict"]["tol"] == pytest.approx(1e-9 * (3 + 1e-7))
    monkeypatch.setenv("CONE_TOL", "1e-3")
    _, out, _ = run_main(capsys, "mean", "--a", str(a), "--b", str(a))
    assert json.loads(out)["results"][0]["verdict"]["tol"] == pytest.approx(1e-3 * (3 + 1e-7))

import json

import numpy as np

from stqpdnn import cli
from stqpdnn.fixtures import fixture_text
from stqpdnn.matrices import SymMatrix, format_matrix_text, horn, read_matrix

def write_fixture(tmp_path, name):
    path = tmp_path / f"{name}.txt"
    path.write_text(fixture_text(name))
    return str(path)


def run_cli(args):
    return cli.main(args)


def test_solve_example_2(tmp_path, capsys):
    path = write_fixture(tmp_path, "ex2")
    assert run_cli(["solve", path]) == 0
    body = json.loads(capsys.readouterr().out)
    assert abs(body["nu"] - 0.4) < 1e-9


def test_solve_horn(tmp_path, capsys):
    path = write_fixture(tmp_path, "horn")
    assert run_cli(["solve", path]) == 0
    body = json.loads(capsys.readouterr().out)
    assert abs(body["nu"]) < 1e-9


def test_solve_one_by_one(tmp_path, capsys):
    path = tmp_path / "tiny.txt"
    path.write_text("1\n-7.25\n")
    assert run_cli(["solve", str(path)]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["nu"] == -7.25


def test_parse_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("2\n1 2\n2\n")
    assert run_cli(["solve", str(path)]) == cli.PARSE_ERROR


def test_cap_exceeded_exit_code(tmp_path, capsys):
    path = tmp_path / "big.txt"
    path.write_text(format_matrix_text(SymMatrix(np.eye(16))))
    assert run_cli(["solve", str(path)]) == cli.CAP_ERROR
    capsys.readouterr()
    assert run_cli(["solve", str(path), "--cap-n", "16"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert abs(body["nu"] - 1 / 16) < 1e-9


def test_classify_fixtures(tmp_path, capsys):
    path = write_fixture(tmp_path, "ex4")
    assert run_cli(["classify", path]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["report"]["verdict"] == "exact"
    assert not any(
        body["families"][k] for k in ("in_Q1", "in_Q2", "in_Q3", "in_concave")
    )

    path5 = write_fixture(tmp_path, "ex5")
    assert run_cli(["classify", path5]) == 0
    body5 = json.loads(capsys.readouterr().out)
    assert body5["report"]["verdict"] == "positive-gap"

    pathe = write_fixture(tmp_path, "e")
    assert run_cli(["classify", pathe]) == 0
    bodye = json.loads(capsys.readouterr().out)
    assert bodye["report"]["verdict"] == "exact"
    assert bodye["families"]["in_Q1"] is True


def test_relax_json_out(tmp_path):
    path = write_fixture(tmp_path, "horn")
    out = tmp_path / "relax.json"
    assert run_cli(["relax", path, "--json-out", str(out)]) == 0
    body = json.loads(out.read_text())
    assert abs(body["ell"] - (-0.1056)) < 1e-3


def test_theta_command(tmp_path, capsys):
    c5 = tmp_path / "c5.json"
    c5.write_text(json.dumps({"n": 5, "edges": [[1, 2], [2, 3], [3, 4], [4, 5], [5, 1]]}))
    assert run_cli(["theta", str(c5)]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["omega"] == 2.0
    assert abs(body["theta"] - 2.2360) < 1e-3

    k5 = tmp_path / "k5.json"
    k5.write_text(
        json.dumps({"n": 5, "edges": [[i + 1, j + 1] for i in range(5) for j in range(i + 1, 5)]})
    )
    assert run_cli(["theta", str(k5)]) == 0
    body = json.loads(capsys.readouterr().out)
    assert (body["omega"], round(body["theta"], 4), round(body["theta_prime"], 4)) == (
        5.0, 5.0, 5.0,
    )


def test_theta_weights_flag(tmp_path, capsys):
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"n": 3, "edges": []}))
    assert run_cli(["theta", str(g), "--weights", "3,1,2"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["omega"] == 3.0 and body["omega_clique"] == [1]


def test_theta_bad_graph(tmp_path):
    g = tmp_path / "bad.json"
    g.write_text("{not json")
    assert run_cli(["theta", str(g)]) == cli.PARSE_ERROR


def test_generate_writes_instances_and_manifest(tmp_path, capsys):
    recipe = tmp_path / "recipe.json"
    recipe.write_text(
        json.dumps(
            {"kind": "gap", "n": 5, "perm": [1, 2, 3, 4, 5], "d": [1, 1, 1, 1, 1], "lam": 0.0}
        )
    )
    outdir = tmp_path / "out"
    assert run_cli(["generate", str(recipe), "--count", "1", "--out-dir", str(outdir)]) == 0
    manifest = json.loads((outdir / "manifest.json").read_text())
    assert manifest["all_ok"] is True
    produced = read_matrix(outdir / manifest["results"][0]["file"])
    assert np.array_equal(produced.array, horn().array)


def test_generate_deterministic_for_fixed_seed(tmp_path, capsys):
    recipe = tmp_path / "recipe.json"
    recipe.write_text(json.dumps({"kind": "exact", "n": 5}))
    outputs = []
    for _ in range(2):
        assert run_cli(["generate", str(recipe), "--count", "3", "--seed", "7"]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    body = json.loads(outputs[0])
    assert body["all_ok"] and body["count"] == 3


def test_generate_mgw_complete_graph(tmp_path, capsys):
    recipe = tmp_path / "recipe.json"
    recipe.write_text(
        json.dumps(
            {
                "kind": "mgw",
                "n": 4,
                "graph": {
                    "n": 4,
                    "edges": [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]],
                },
                "w": [1, 1, 1, 1],
            }
        )
    )
    assert run_cli(["generate", str(recipe)]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["all_ok"]


def test_generate_bad_recipe(tmp_path):
    recipe = tmp_path / "recipe.json"
    recipe.write_text("{broken")
    assert run_cli(["generate", str(recipe)]) == cli.PARSE_ERROR


def test_analyze_graph_command(tmp_path, capsys):
    path = write_fixture(tmp_path, "ex6")
    assert run_cli(["analyze-graph", path]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["analysis"]["maximal_cliques"] == [[1, 2, 3], [1, 5], [3, 4], [4, 5]]
    assert body["analysis"]["spn_completable"] is False


def test_solve_deterministic_output(tmp_path, capsys):
    path = write_fixture(tmp_path, "ex2")
    outs = []
    for _ in range(2):
        assert run_cli(["solve", path]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_remote_dispatch_uses_server(monkeypatch, tmp_path, capsys):
    """--server routes through HTTP; exercised against the ASGI app in-process."""
    from fastapi.testclient import TestClient

    from stqpdnn.service import app

    test_client = TestClient(app)

    class FakeHttpx:
        @staticmethod
        def post(url, json=None, timeout=None):
            endpoint = url.replace("http://fake", "")
            return test_client.post(endpoint, json=json)

    import stqpdnn.cli as cli_mod

    monkeypatch.setitem(__import__("sys").modules, "httpx", FakeHttpx)
    path = write_fixture(tmp_path, "ex2")
    assert cli_mod.main(["solve", path, "--server", "http://fake"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert abs(body["nu"] - 0.4) < 1e-9

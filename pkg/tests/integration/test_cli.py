import json
import os

import pandas as pd
import pytest

import cli
from report import load_report


def _args(example_files, example_id, out, *extra):
    fluxo, salto = example_files(example_id)
    return ["--flow", fluxo, "--jump", salto, "--out", str(out), *extra]


def test_analyze_writes_report(example_files, tmp_path):
    assert cli.main(["analyze", *_args(example_files, 2, tmp_path, "--alpha", "0.2", "--periodic", "0.5")]) == 0
    dados = load_report(os.path.join(tmp_path, "analyze.json"))
    assert dados["command"] == "analyze"
    assert dados["partitions"]["joint"] == [[0, 1, 2], [3, 4], [5, 6]]
    assert dados["partitions"]["intersection_invariant"] is True
    assert dados["decompositions"]["union"]["mu"] == 2
    assert dados["monodromy"]["is_row_stochastic"] is True
    assert dados["monodromy"]["spectrum_in_discs"] is True
    assert len(dados["monodromy"]["gershgorin_discs"]) == 7
    assert dados["lyapunov_certificate"]["N2"] == 4
    assert os.path.isfile(os.path.join(tmp_path, "laplaciana_fluxo.txt"))


def test_predict_writes_values(example_files, tmp_path):
    assert cli.main(["predict", *_args(example_files, 3, tmp_path, "--alpha", "0.2")]) == 0
    previsao = load_report(os.path.join(tmp_path, "predict.json"))["prediction"]
    assert previsao["reach_values"] == pytest.approx([25 / 12, 4.5])
    assert previsao["common_kind"] == "Constant"
    assert previsao["common_values"] == pytest.approx([79 / 24])


def test_simulate_writes_trajectory(example_files, tmp_path):
    codigo = cli.main(["simulate", *_args(example_files, 2, tmp_path, "--alpha", "0.2", "--random", "0.1", "1.0",
                                          "--seed", "3", "--horizon", "5")])
    assert codigo == 0
    df = pd.read_csv(os.path.join(tmp_path, "trajetoria.csv"))
    assert list(df.columns[:2]) == ["t", "j"] and len(df.columns) == 9
    assert df["t"].iloc[-1] == pytest.approx(5.0)
    resumo = load_report(os.path.join(tmp_path, "simulate.json"))["summary"]
    assert resumo["domain"]["seed"] == 3
    assert os.path.isfile(os.path.join(tmp_path, "trajetoria.png"))


def test_verify_passes_on_example2_with_periodic_exact_values(example_files, tmp_path):
    args = _args(example_files, 2, tmp_path, "--alpha", "0.2", "--periodic", "0.5", "--horizon", "60",
                 "--dt", "0.1", "--tol", "1e-6", "--periodic-exact")
    assert cli.main(["verify", *args]) == 0
    dados = load_report(os.path.join(tmp_path, "verify.json"))
    assert dados["verification"]["passed"] is True
    assert dados["verification"]["discrepancies"] == []
    assert dados["prediction"]["reach_value_source"] == "periodic_exact"
    assert dados["config"]["prediction_source"] == "periodic_exact"


def test_verify_fails_on_non_conserved_weighted_prediction(example_files, tmp_path):
    args = _args(example_files, 2, tmp_path, "--alpha", "0.2", "--periodic", "0.5", "--horizon", "60",
                 "--dt", "0.1", "--tol", "1e-6")
    assert cli.main(["verify", *args]) == 1
    verificacao = load_report(os.path.join(tmp_path, "verify.json"))["verification"]
    assert "reach_0" in verificacao["discrepancies"]
    assert verificacao["predicted_values"][0] == pytest.approx(107 / 41)
    diagnostico = next(c for c in verificacao["checks"] if c["name"] == "reach_0_periodic_exact")
    assert diagnostico["informational"] is True and diagnostico["passed"] is True


def test_periodic_exact_requires_periodic_domain(example_files, tmp_path):
    args = _args(example_files, 2, tmp_path, "--random", "0.1", "1.0", "--periodic-exact")
    assert cli.main(["verify", *args]) == 2


def test_verify_rejects_perturbed_report(example_files, tmp_path):
    previsao_dir = tmp_path / "previsao"
    assert cli.main(["predict", *_args(example_files, 2, previsao_dir, "--alpha", "0.2")]) == 0
    caminho = previsao_dir / "predict.json"
    dados = json.loads(caminho.read_text(encoding="utf-8"))
    dados["prediction"]["reach_values"][1] = 4.6
    caminho.write_text(json.dumps(dados), encoding="utf-8")

    args = _args(example_files, 2, tmp_path / "verificacao", "--alpha", "0.2", "--periodic", "0.5",
                 "--horizon", "60", "--dt", "0.1", "--report", str(caminho))
    assert cli.main(["verify", *args]) == 1


def test_verify_rejects_perturbed_non_conserved_reach(example_files, tmp_path):
    previsao_dir = tmp_path / "previsao"
    assert cli.main(["predict", *_args(example_files, 2, previsao_dir, "--alpha", "0.2")]) == 0
    caminho = previsao_dir / "predict.json"
    dados = json.loads(caminho.read_text(encoding="utf-8"))
    assert dados["prediction"]["reach_conserved"] == [False, True]
    dados["prediction"]["reach_values"][0] += 0.1
    caminho.write_text(json.dumps(dados), encoding="utf-8")

    saida = tmp_path / "verificacao"
    args = _args(example_files, 2, saida, "--alpha", "0.2", "--random", "0.1", "1.0", "--horizon", "60",
                 "--dt", "0.1", "--tol", "1e-3", "--report", str(caminho))
    assert cli.main(["verify", *args]) == 1
    verificacao = load_report(os.path.join(saida, "verify.json"))["verification"]
    assert "reach_0" in verificacao["discrepancies"]
    assert "reach_1" not in verificacao["discrepancies"]


def test_config_file_and_overrides(example_files, tmp_path):
    fluxo, salto = example_files(3)
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"flow_graph_path": fluxo, "jump_graph_path": salto, "alpha": 0.2,
                                  "domain": "periodic", "tau": 0.5, "horizon": 60.0, "sample_dt": 0.1}))
    args = ["--config", str(config), "--out", str(tmp_path), "--tol", "1e-6", "--periodic-exact"]
    assert cli.main(["verify", *args]) == 0
    dados = load_report(os.path.join(tmp_path, "verify.json"))
    assert dados["config"]["tol"] == 1e-6 and dados["config"]["tau"] == 0.5


@pytest.mark.parametrize("conteudo", ["nodes 7\n0 0\n", "nodes 3\n0 1\n", "aresta\n"])
def test_input_errors_exit_2(example_files, tmp_path, conteudo):
    ruim = tmp_path / "ruim.txt"
    ruim.write_text(conteudo)
    _, salto = example_files(2)
    assert cli.main(["predict", "--flow", str(ruim), "--jump", salto, "--out", str(tmp_path)]) == 2


def test_missing_file_and_bad_config_exit_2(example_files, tmp_path):
    _, salto = example_files(2)
    assert cli.main(["analyze", "--flow", str(tmp_path / "ausente.txt"), "--jump", salto,
                     "--out", str(tmp_path)]) == 2
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"ganho": 1.0}))
    assert cli.main(["analyze", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_divergence_exit_1(tmp_path):
    k2 = tmp_path / "k2.txt"
    k2.write_text("nodes 2\n0 1\n1 0\n")
    vazio = tmp_path / "vazio.txt"
    vazio.write_text("nodes 2\n")
    codigo = cli.main(["simulate", "--flow", str(vazio), "--jump", str(k2), "--alpha", "1e100",
                       "--periodic", "1.0", "--horizon", "10", "--out", str(tmp_path)])
    assert codigo == 1
    assert "divergence" in load_report(os.path.join(tmp_path, "simulate.json"))


@pytest.mark.slow
def test_repro_example3(tmp_path):
    assert cli.main(["repro", "3", "--out", str(tmp_path)]) == 0
    dados = load_report(os.path.join(tmp_path, "exemplo_3", "repro.json"))
    assert dados["consistent"] is True
    # Alcance 0 não conservado: o domínio aleatório se afasta de 25/12 e isso fica registrado
    assert "reach_0" in dados["discrepancies"]
    assert "reach_1" not in dados["discrepancies"]
    assert dados["verification"]["passed"] is False
    assert dados["periodic_exact"]["verification"]["passed"] is True
    assert dados["periodic_exact"]["prediction"]["reach_value_source"] == "periodic_exact"
    for nome in ("flow", "jump"):
        assert dados["continuous"][nome]["verification"]["passed"] is True
        assert dados["continuous"][nome]["prediction"]["reach_value_source"] == "continuous"

    linhas = {linha["quantity"]: linha for linha in dados["comparison"]}
    assert linhas["reach_1"]["matches_published"] is True
    assert linhas["reach_1"]["matches_observed"] is True
    assert linhas["reach_0"]["predicted"] == pytest.approx(25 / 12)
    assert linhas["reach_0"]["matches_observed"] is False
    assert linhas["reach_0"]["periodic_exact"] is not None
    continuas = [q for q in linhas if q.startswith(("flow/", "jump/"))]
    assert continuas and all(linhas[q]["matches_observed"] for q in continuas)
    assert all(linhas[q]["published"] is None for q in continuas)
    for nome in ("analyze.json", "predict.json", "trajetoria.csv", "trajetoria.png"):
        assert os.path.isfile(os.path.join(tmp_path, "exemplo_3", nome))


@pytest.mark.slow
def test_repro_example2_reports_discrepancy(tmp_path):
    assert cli.main(["repro", "2", "--out", str(tmp_path)]) == 0
    dados = load_report(os.path.join(tmp_path, "exemplo_2", "repro.json"))
    assert "reach_0" in dados["discrepancies"]
    assert dados["prediction"]["reach_values"][0] == pytest.approx(2.6098, abs=1e-3)
    assert dados["periodic_exact"]["verification"]["discrepancies"] == []
    assert [c["name"] for c in dados["periodic_exact"]["verification"]["checks"]][-1] == "hybrid_arc"

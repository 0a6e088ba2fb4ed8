#!/usr/bin/env python3
"""
Relatórios estruturados (JSON), exportação de trajetórias (CSV) e gráficos
das análises de consenso híbrido.
"""
import dataclasses
import json
import logging
import math
import os
from datetime import datetime

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import seaborn as sns  # noqa: E402

logger = logging.getLogger(__name__)


def to_jsonable(obj):
    """
    Converte recursivamente para tipos serializáveis em JSON.

    Matrizes viram listas de listas, complexos viram [real, imag],
    conjuntos viram listas ordenadas e infinitos viram "inf".
    """
    if isinstance(obj, dict):
        return {str(chave): to_jsonable(valor) for chave, valor in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        valor = float(obj)
        if math.isinf(valor):
            return "inf" if valor > 0 else "-inf"
        if math.isnan(valor):
            return "nan"
        return valor
    return obj


def partition_to_list(pi):
    return pi.sorted_cells()


def decomposition_to_dict(reach):
    return {
        "mu": reach.mu,
        "reaches": [sorted(r) for r in reach.reaches],
        "exclusive_parts": [sorted(h) for h in reach.exclusive_parts],
        "common": sorted(reach.common),
        "h": reach.h,
        "c": reach.c,
    }


def graph_to_dict(g):
    return {"n": g.n, "edges": [list(e) for e in sorted(g.edges)]}


def gain_bounds_to_dict(bounds):
    return dataclasses.asdict(bounds)


def monodromy_to_dict(analysis):
    dados = dataclasses.asdict(analysis)
    dados["contracts"] = analysis.contracts
    return dados


def certificate_to_dict(cert):
    return {
        "consensus_dim": cert.consensus_dim,
        "N2": cert.P22.shape[0],
        "kappa": cert.kappa,
        "beta": cert.beta,
        "beta_max": cert.beta_max,
        "P22": cert.P22,
        "tau": cert.tau,
    }


def consensus_report_to_dict(report):
    dados = {
        "partition": partition_to_list(report.partition),
        "ordering": list(report.ordering),
        "union_decomposition": decomposition_to_dict(report.reach),
        "alpha": report.alpha,
        "alpha_admissible": report.alpha_admissible,
        "reach_values": list(report.reach_values),
        "reach_value_source": report.reach_value_source,
        "reach_left_eigvecs": list(report.reach_left_eigvecs),
        "reach_conserved": list(report.conserved),
        "gamma_vectors": list(report.gamma_vectors),
        "common_kind": report.common_kind,
    }
    if report.common_kind is not None:
        dados["common_cells"] = [sorted(c) for c in report.common_cells]
        dados["span_invariant"] = report.span_invariant
        dados["fixed_point"] = report.fixed_point
        dados["common_values"] = None if report.common_values is None else list(report.common_values)
    if report.reduced_dynamics is not None:
        dados["reduced_dynamics"] = dataclasses.asdict(report.reduced_dynamics)
    return dados


def verification_to_dict(record):
    return {
        "passed": record.passed,
        "checks": [dataclasses.asdict(check) for check in record.checks],
        "predicted_values": list(record.predicted_values),
        "observed_values": list(record.observed_values),
        "prediction_gaps": list(record.prediction_gaps),
        "periodic_values": None if record.periodic_values is None else list(record.periodic_values),
        "discrepancies": record.discrepancies,
    }


def trajectory_summary(trajectory, pi):
    """Amplitudes finais por célula e médias finais dos grupos."""
    final = trajectory.final_state
    return {
        "samples": len(trajectory),
        "jumps": int(trajectory.j[-1]),
        "final_time": float(trajectory.t[-1]),
        "domain": trajectory.metadata,
        "cells": [
            {
                "cell": sorted(celula),
                "spread": float(final[sorted(celula)].max() - final[sorted(celula)].min()),
                "mean": float(final[sorted(celula)].mean()),
            }
            for celula in pi.cells
        ],
    }


def save_report(data, output_dir, name, command=None):
    """
    Salva um relatório JSON com carimbo de tempo.

    Args:
        data: dict com o conteúdo
        output_dir: Diretório de saída
        name: Nome do arquivo (sem extensão)
        command: Comando que gerou o relatório

    Returns:
        Caminho do arquivo salvo
    """
    os.makedirs(output_dir, exist_ok=True)
    conteudo = {"generated_at": datetime.now().isoformat(timespec="seconds")}
    if command:
        conteudo["command"] = command
    conteudo.update(data)

    caminho = os.path.join(output_dir, f"{name}.json")
    with open(caminho, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(conteudo), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    logger.info("Relatório salvo: %s", caminho)
    return caminho


def load_report(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def save_trajectory_csv(trajectory, path):
    """Exporta a trajetória com cabeçalho t,j,x_0,... e 17 dígitos significativos."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    trajectory.to_frame().to_csv(path, index=False, float_format="%.17g")
    logger.info("Trajetória salva: %s", path)
    return path


def plot_trajectory(trajectory, pi, output_file, title="Trajetórias dos agentes", reference=None,
                    reference_nodes=None):
    """
    Plota as trajetórias coloridas pela célula da partição.

    Args:
        trajectory: HybridTrajectory
        pi: Partition (define as cores)
        output_file: Caminho do PNG
        reference: HybridTrajectory de referência (arco reduzido), opcional
        reference_nodes: nós correspondentes às colunas da referência
    """
    plt.figure(figsize=(12, 6))
    cores = sns.color_palette("tab10", n_colors=max(pi.r, 1))

    for k, celula in enumerate(pi.cells):
        for i, v in enumerate(sorted(celula)):
            plt.plot(trajectory.t, trajectory.x[:, v], color=cores[k % len(cores)], alpha=0.8,
                     label=f"Célula {sorted(celula)}" if i == 0 else None)

    if reference is not None:
        for i, v in enumerate(reference_nodes or []):
            plt.plot(reference.t, reference.x[:, i], "k--", linewidth=1,
                     label="Arco reduzido" if i == 0 else None)

    plt.title(title)
    plt.xlabel("Tempo (s)")
    plt.ylabel("Estado x")
    plt.grid(True)
    plt.legend()
    plt.tight_layout()
    plt.savefig(output_file)
    plt.close()
    logger.info("Gráfico salvo: %s", output_file)
    return output_file


def plot_matrix_heatmap(matrix, output_file, title):
    """Mapa de calor de uma matriz (Laplaciana, monodromia)."""
    matriz = np.asarray(matrix, dtype=float)
    plt.figure(figsize=(8, 6))
    sns.heatmap(matriz, annot=matriz.shape[0] <= 10, fmt=".2f", cmap="coolwarm", center=0.0)
    plt.title(title)
    plt.tight_layout()
    plt.savefig(output_file)
    plt.close()
    logger.info("Gráfico salvo: %s", output_file)
    return output_file

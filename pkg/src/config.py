#!/usr/bin/env python3
"""
Configuração de execução do toolkit de consenso híbrido.
Valores padrão, leitura de arquivo JSON e sobrescrita pela linha de comando.
"""
import json
import logging
import os
from dataclasses import dataclass

import numpy as np

from hybrid_sim import periodic_domain, random_domain

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = {
    "flow_graph_path": None,
    "jump_graph_path": None,
    "alpha": "auto",
    "domain": "periodic",
    "tau": 1.0,
    "tau_min": 0.1,
    "tau_max": 1.0,
    "seed": 0,
    "horizon": 30.0,
    "x0": "indexed",
    "sample_dt": None,
    "output_dir": "resultados",
    "tol": 1e-4,
    "report": None,
    "prediction_source": "weighted_laplacian",
}

# Origem dos valores de alcance verificados
PREDICTION_SOURCES = ("weighted_laplacian", "periodic_exact")


def load_config(config_path=None):
    """
    Carrega a configuração padrão atualizada pelo arquivo JSON (se existir).

    Args:
        config_path: Caminho para arquivo de configuração (opcional)

    Returns:
        dict
    """
    config = dict(DEFAULT_CONFIG)
    if config_path:
        if not os.path.exists(config_path):
            raise FileNotFoundError(f"Arquivo de configuração não encontrado: {config_path}")
        with open(config_path, "r", encoding="utf-8") as f:
            dados = json.load(f)
        desconhecidas = set(dados) - set(DEFAULT_CONFIG)
        if desconhecidas:
            raise ValueError(f"Chaves de configuração desconhecidas: {sorted(desconhecidas)}")
        config.update(dados)
    return config


def parse_x0(texto):
    """Converte '--x0' em 'indexed' ou tupla de floats (valores separados por vírgula)."""
    if isinstance(texto, (list, tuple)):
        return tuple(float(v) for v in texto)
    if texto is None or str(texto).strip() == "indexed":
        return "indexed"
    try:
        return tuple(float(v) for v in str(texto).split(","))
    except ValueError:
        raise ValueError(f"Estado inicial inválido: '{texto}'") from None


@dataclass(frozen=True)
class RunConfig:
    flow_graph_path: str
    jump_graph_path: str
    alpha: object = "auto"
    domain: str = "periodic"
    tau: float = 1.0
    tau_min: float = 0.1
    tau_max: float = 1.0
    seed: int = 0
    horizon: float = 30.0
    x0: object = "indexed"
    sample_dt: float = None
    output_dir: str = "resultados"
    tol: float = 1e-4
    report: str = None
    prediction_source: str = "weighted_laplacian"

    def __post_init__(self):
        for caminho in (self.flow_graph_path, self.jump_graph_path):
            if not caminho or not os.path.isfile(caminho):
                raise FileNotFoundError(f"Arquivo de grafo não encontrado: {caminho}")
        if self.report is not None and not os.path.isfile(self.report):
            raise FileNotFoundError(f"Relatório não encontrado: {self.report}")
        if self.alpha != "auto" and not float(self.alpha) > 0:
            raise ValueError(f"Ganho deve ser positivo ou 'auto', recebido {self.alpha}")
        if self.domain not in ("periodic", "random"):
            raise ValueError(f"Domínio '{self.domain}' não suportado")
        positivos = {"tau": self.tau, "horizon": self.horizon, "tol": self.tol}
        if self.sample_dt is not None:
            positivos["sample_dt"] = self.sample_dt
        for nome, valor in positivos.items():
            if not valor > 0:
                raise ValueError(f"{nome} deve ser positivo, recebido {valor}")
        if self.domain == "random" and not (0 < self.tau_min < self.tau_max):
            raise ValueError(f"Limites de permanência inválidos: {self.tau_min}, {self.tau_max}")
        if self.prediction_source not in PREDICTION_SOURCES:
            raise ValueError(f"Origem da predição '{self.prediction_source}' não suportada")
        if self.prediction_source == "periodic_exact" and self.domain != "periodic":
            raise ValueError("Valores periódicos exatos exigem domínio periódico")
        object.__setattr__(self, "x0", parse_x0(self.x0))

    @classmethod
    def from_dict(cls, config):
        return cls(**{chave: valor for chave, valor in config.items() if chave in DEFAULT_CONFIG})

    def make_domain(self):
        if self.domain == "periodic":
            return periodic_domain(self.tau, self.horizon)
        return random_domain(self.tau_min, self.tau_max, self.seed, self.horizon)

    def resolve_alpha(self, bounds):
        """Ganho numérico: explícito ou 0.9 * alpha_conv."""
        if self.alpha == "auto":
            alpha = bounds.auto_alpha()
            logger.info("Ganho automático alpha = %.6g (alpha_conv = %.6g)", alpha, bounds.alpha_conv)
            return alpha
        return float(self.alpha)

    def resolve_x0(self, n):
        """Estado inicial: 'indexed' significa x_i = i + 1."""
        if self.x0 == "indexed":
            return np.arange(1, n + 1, dtype=float)
        if len(self.x0) != n:
            raise ValueError(f"Estado inicial com {len(self.x0)} valores, grafo com {n} nós")
        return np.array(self.x0, dtype=float)

    def resolve_sample_dt(self, domain):
        return self.sample_dt if self.sample_dt is not None else domain.min_dwell / 10.0

    def to_dict(self):
        dados = {chave: getattr(self, chave) for chave in DEFAULT_CONFIG}
        if dados["x0"] != "indexed":
            dados["x0"] = list(dados["x0"])
        return dados

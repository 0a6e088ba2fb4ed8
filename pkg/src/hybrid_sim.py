#!/usr/bin/env python3
"""
Simulação da rede de agentes híbridos.

Domínios de tempo híbrido (periódicos ou com permanências aleatórias) e
simulação com fluxo exato: entre saltos x(t) = exp(-L_f (t - t_j)) x(t_j);
em cada salto x+ = (I - alpha L_j) x.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from spectral import expm

logger = logging.getLogger(__name__)

# Tolerância para comparação de instantes
TIME_EPS = 1e-12


class DivergenceError(RuntimeError):
    """Estado não finito durante a simulação."""

    def __init__(self, t, j):
        self.t = t
        self.j = j
        super().__init__(f"Estado não finito em (t={t:.6g}, j={j})")


@dataclass(frozen=True)
class HybridTimeDomain:
    """
    Instantes de salto t_1 < t_2 < ... dentro de (t0, horizon].

    kind: "periodic" (tau), "random" (tau_min, tau_max, seed) ou "flow" (sem saltos).
    """
    jump_times: tuple
    horizon: float
    kind: str
    tau: float = None
    tau_min: float = None
    tau_max: float = None
    seed: int = None
    t0: float = 0.0

    def __post_init__(self):
        tempos = tuple(float(t) for t in self.jump_times)
        object.__setattr__(self, "jump_times", tempos)
        if self.horizon <= self.t0:
            raise ValueError(f"Horizonte {self.horizon} deve ser maior que o instante inicial {self.t0}")
        anterior = self.t0
        for t in tempos:
            if t <= anterior:
                raise ValueError(f"Instantes de salto não estritamente crescentes: {t} após {anterior}")
            anterior = t
        if tempos and tempos[-1] > self.horizon + TIME_EPS:
            raise ValueError(f"Salto em {tempos[-1]} após o horizonte {self.horizon}")

    @property
    def dwell_times(self):
        """Permanências t_{j+1} - t_j a partir de t0 (sem o trecho final até o horizonte)."""
        return np.diff((self.t0,) + self.jump_times)

    @property
    def min_dwell(self):
        if self.kind == "periodic":
            return self.tau
        if self.kind == "flow":
            return self.horizon - self.t0
        return self.tau_min

    def intervals(self):
        """Intervalos de fluxo (início, fim, j) cobrindo [t0, horizon]."""
        inicios = (self.t0,) + self.jump_times
        fins = self.jump_times + (self.horizon,)
        intervalos = []
        for j, (a, b) in enumerate(zip(inicios, fins)):
            if j == len(self.jump_times) and b - a <= TIME_EPS:
                break
            intervalos.append((a, b, j))
        return intervalos

    def shifted(self, t0):
        """Domínio reiniciado em t0 com os saltos estritamente posteriores."""
        return HybridTimeDomain(tuple(t for t in self.jump_times if t > t0 + TIME_EPS),
                                self.horizon, self.kind, self.tau, self.tau_min, self.tau_max,
                                self.seed, float(t0))

    def metadata(self):
        dados = {"kind": self.kind, "horizon": self.horizon, "jumps": len(self.jump_times), "t0": self.t0}
        if self.kind == "periodic":
            dados["tau"] = self.tau
        elif self.kind == "random":
            dados.update({"tau_min": self.tau_min, "tau_max": self.tau_max, "seed": self.seed,
                          "dwell_distribution": "uniform"})
        return dados


@dataclass(frozen=True)
class HybridTrajectory:
    """Amostras (t, j, x); o par antes/depois de cada salto compartilha t."""
    t: np.ndarray
    j: np.ndarray
    x: np.ndarray
    domain: HybridTimeDomain = None
    sample_dt: float = None
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def n_agents(self):
        return self.x.shape[1]

    @property
    def final_state(self):
        return self.x[-1]

    def final_window(self, fraction=0.1):
        """Índices das últimas amostras (fração do total, pelo menos uma)."""
        quantidade = max(1, int(math.ceil(fraction * len(self.t))))
        return np.arange(len(self.t) - quantidade, len(self.t))

    def to_frame(self):
        """DataFrame com colunas t, j, x_0, ..., x_{N-1}."""
        df = pd.DataFrame(self.x, columns=[f"x_{i}" for i in range(self.n_agents)])
        df.insert(0, "j", self.j)
        df.insert(0, "t", self.t)
        return df


def periodic_domain(tau, horizon):
    """
    Domínio tau-periódico: saltos em tau, 2 tau, ... até o horizonte.
    """
    if tau <= 0 or horizon <= 0:
        raise ValueError(f"tau e horizonte devem ser positivos (tau={tau}, horizonte={horizon})")
    quantidade = int(math.floor(horizon / tau + 1e-9))
    tempos = tuple(k * tau for k in range(1, quantidade + 1))
    return HybridTimeDomain(tempos, float(horizon), "periodic", tau=float(tau))


def random_domain(tau_min, tau_max, seed, horizon):
    """
    Domínio com permanências uniformes em (tau_min, tau_max), gerador semeado.
    """
    if not (0 < tau_min < tau_max):
        raise ValueError(f"Limites de permanência inválidos: tau_min={tau_min}, tau_max={tau_max}")
    if horizon <= 0:
        raise ValueError(f"Horizonte deve ser positivo, recebido {horizon}")

    rng = np.random.default_rng(seed)
    tempos = []
    t = 0.0
    while True:
        permanencia = rng.uniform(tau_min, tau_max)
        # Limites estritos
        while permanencia <= tau_min:
            permanencia = rng.uniform(tau_min, tau_max)
        t += permanencia
        if t > horizon:
            break
        tempos.append(t)

    return HybridTimeDomain(tuple(tempos), float(horizon), "random",
                            tau_min=float(tau_min), tau_max=float(tau_max), seed=seed)


def flow_domain(horizon):
    """Domínio sem saltos: um único intervalo de fluxo [0, horizon]."""
    if horizon <= 0:
        raise ValueError(f"Horizonte deve ser positivo, recebido {horizon}")
    return HybridTimeDomain((), float(horizon), "flow")


def simulate_linear(A_flow, A_jump, domain, x0, sample_dt):
    """
    Simula x' = A_flow x no fluxo e x+ = A_jump x nos saltos, com fluxo exato.

    As exponenciais são guardadas em cache por deslocamento dentro do
    intervalo, então grades regulares reaproveitam as mesmas matrizes.

    Args:
        A_flow: Matriz do fluxo
        A_jump: Matriz do salto
        domain: HybridTimeDomain
        x0: Estado inicial em domain.t0
        sample_dt: Passo de amostragem

    Returns:
        HybridTrajectory
    """
    A_flow = np.asarray(A_flow, dtype=float)
    A_jump = np.asarray(A_jump, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    n = x.shape[0]
    if A_flow.shape != (n, n) or A_jump.shape != (n, n):
        raise ValueError(f"Dimensões incompatíveis: estado {n}, fluxo {A_flow.shape}, salto {A_jump.shape}")
    if sample_dt <= 0:
        raise ValueError(f"Passo de amostragem deve ser positivo, recebido {sample_dt}")

    cache = {}

    def propagador(s):
        if s not in cache:
            cache[s] = expm(A_flow * s)
        return cache[s]

    tempos, indices, estados = [], [], []

    def registra(t, j, estado):
        if not np.all(np.isfinite(estado)):
            raise DivergenceError(t, j)
        tempos.append(t)
        indices.append(j)
        estados.append(estado)

    registra(domain.t0, 0, x)
    for a, b, j in domain.intervals():
        comprimento = b - a
        inicio = x

        # Amostras em a + k dt, mais o extremo b
        k = 1
        while k * sample_dt < comprimento - TIME_EPS:
            registra(a + k * sample_dt, j, propagador(k * sample_dt) @ inicio)
            k += 1
        x = propagador(comprimento) @ inicio if comprimento > 0 else inicio
        registra(b, j, x)

        # Salto ao fim do intervalo (se b é instante de salto)
        if j < len(domain.jump_times):
            x = A_jump @ x
            registra(b, j + 1, x)

    logger.debug("Simulação: %d amostras, %d exponenciais em cache", len(tempos), len(cache))
    return HybridTrajectory(np.array(tempos), np.array(indices, dtype=np.int64), np.vstack(estados),
                            domain=domain, sample_dt=float(sample_dt), metadata=domain.metadata())


def simulate(L_f, L_j, alpha, domain, x0, sample_dt=None):
    """
    Simula a dinâmica híbrida da rede.

    Args:
        L_f: Laplaciana do grafo de fluxo
        L_j: Laplaciana do grafo de salto
        alpha: Ganho de acoplamento
        domain: HybridTimeDomain
        x0: Estado inicial
        sample_dt: Passo de amostragem (padrão: menor permanência / 10)

    Returns:
        HybridTrajectory
    """
    L_f = np.asarray(L_f, dtype=float)
    L_j = np.asarray(L_j, dtype=float)
    if L_f.shape != L_j.shape:
        raise ValueError(f"Dimensões incompatíveis: {L_f.shape} e {L_j.shape}")
    if alpha <= 0:
        raise ValueError(f"Ganho deve ser positivo, recebido {alpha}")
    if sample_dt is None:
        sample_dt = domain.min_dwell / 10.0

    trajetoria = simulate_linear(-L_f, np.eye(L_f.shape[0]) - alpha * L_j, domain, x0, sample_dt)
    trajetoria.metadata["alpha"] = float(alpha)
    return trajetoria


def cell_spread(x, pi):
    """
    Maior amplitude (max - min) de x dentro das células de pi.
    """
    x = np.asarray(x, dtype=float)
    if pi.n != x.shape[0]:
        raise ValueError(f"Partição sobre {pi.n} nós, estado com {x.shape[0]}")
    return max(float(x[list(celula)].max() - x[list(celula)].min()) for celula in pi.cells)


def trajectory_spread(trajectory, pi):
    """cell_spread em cada amostra da trajetória."""
    return np.array([cell_spread(estado, pi) for estado in trajectory.x])

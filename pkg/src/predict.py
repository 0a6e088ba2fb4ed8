#!/usr/bin/env python3
"""
Predição do multi-consenso da rede híbrida.

A partir da Laplaciana ponderada L_alpha = L_f + alpha L_j calcula os
valores de consenso de cada alcance exclusivo, classifica a parte comum
(consenso constante ou arco híbrido) e fornece a dinâmica reduzida da parte
comum. Também verifica uma predição contra uma trajetória simulada.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
import sympy

from gain import alpha_convergence_bound
from graph_core import decompose, union_graph
from hybrid_sim import cell_spread, simulate_linear
from partitions import coarsest_aep, joint_coarsest_aep
from spectral import decompose_laplacian, expm, extract_blocks, laplacian

logger = logging.getLogger(__name__)

CONSTANT = "Constant"
HYBRID_ARC = "HybridArc"

# Origem dos valores de alcance de um relatório
WEIGHTED_LAPLACIAN = "weighted_laplacian"
PERIODIC_EXACT = "periodic_exact"
CONTINUOUS = "continuous"

# Tolerâncias das verificações estruturais
NULL_TOL = 1e-10
FIXED_POINT_TOL = 1e-9
RATIONAL_DENOMINATOR = 10 ** 6


class VerificationDomainError(ValueError):
    """Trajetória e referência sobre grades diferentes."""


@dataclass(frozen=True)
class CommonDynamics:
    """
    Dinâmica reduzida da parte comum:
        fluxo  x_C' = A_c x_C + B_c [x_1; ...; x_mu]
        salto  x_C+ = A_d x_C + B_d [x_1; ...; x_mu]
    """
    A_c: np.ndarray
    B_c: np.ndarray
    A_d: np.ndarray
    B_d: np.ndarray

    def augmented(self, reach_inputs):
        """Matrizes do sistema aumentado [x_C; 1] com entradas constantes."""
        c = self.A_c.shape[0]
        entrada_fluxo = self.B_c @ reach_inputs
        entrada_salto = self.B_d @ reach_inputs

        A = np.zeros((c + 1, c + 1))
        A[:c, :c] = self.A_c
        A[:c, c] = entrada_fluxo

        J = np.eye(c + 1)
        J[:c, :c] = self.A_d
        J[:c, c] = entrada_salto
        return A, J


@dataclass(frozen=True)
class ConsensusReport:
    partition: object
    ordering: tuple
    reach: object
    alpha: float
    alpha_admissible: bool
    reach_values: tuple
    reach_left_eigvecs: tuple
    gamma_vectors: tuple
    zero_eigvecs: tuple
    conserved: tuple
    common_kind: str = None
    common_cells: tuple = ()
    common_values: tuple = None
    span_invariant: bool = None
    fixed_point: bool = None
    reduced_dynamics: CommonDynamics = None
    L_f: np.ndarray = None
    L_j: np.ndarray = None
    x0: np.ndarray = None
    reach_value_source: str = WEIGHTED_LAPLACIAN

    @property
    def mu(self):
        return len(self.reach_values)

    def reach_inputs(self, values=None):
        """Vetor [x_1 1_{h_1}; ...; x_mu 1_{h_mu}] na ordem do grafo união."""
        valores = self.reach_values if values is None else values
        return np.concatenate([np.full(len(parte), valor)
                               for parte, valor in zip(self.reach.exclusive_parts, valores)])

    def gamma_cell_weights(self):
        """Média de gamma^i em cada célula comum (matriz células x mu)."""
        comuns = sorted(self.reach.common)
        posicao = {v: k for k, v in enumerate(comuns)}
        pesos = np.zeros((len(self.common_cells), self.mu))
        for r, celula in enumerate(self.common_cells):
            indices = [posicao[v] for v in celula]
            for i, gamma in enumerate(self.gamma_vectors):
                pesos[r, i] = np.mean(gamma[indices])
        return pesos

    def common_constants(self, values=None):
        """Valores constantes das células comuns para os valores de alcance dados."""
        valores = np.asarray(self.reach_values if values is None else values, dtype=float)
        return self.gamma_cell_weights() @ valores


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    error: float
    informational: bool = False
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class VerificationRecord:
    """
    Resultado da verificação. `prediction_gaps` guarda observado - previsto
    por alcance; `periodic_values` só existe quando o domínio é periódico e
    há alcance não conservado.
    """
    checks: tuple
    predicted_values: tuple
    observed_values: tuple
    prediction_gaps: tuple
    periodic_values: tuple = None

    @property
    def passed(self):
        return all(check.passed for check in self.checks if not check.informational)

    @property
    def discrepancies(self):
        """Nomes das verificações reprovadas (sem as informativas)."""
        return [check.name for check in self.checks if not check.informational and not check.passed]


def weighted_laplacian(L_f, L_j, alpha):
    """L_alpha = L_f + alpha L_j."""
    L_f = np.asarray(L_f, dtype=float)
    L_j = np.asarray(L_j, dtype=float)
    if L_f.shape != L_j.shape:
        raise ValueError(f"Dimensões incompatíveis: {L_f.shape} e {L_j.shape}")
    if alpha <= 0:
        raise ValueError(f"Ganho deve ser positivo, recebido {alpha}")
    return L_f + alpha * L_j


def _rational_rank(M):
    """
    Posto exato após racionalização (denominador até 10^6); recorre ao posto
    por valores singulares quando a racionalização não reproduz a matriz.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    racional = sympy.Matrix([[sympy.Rational(float(v)).limit_denominator(RATIONAL_DENOMINATOR) for v in linha]
                             for linha in M])
    erro = max(abs(float(q) - v) for q, v in zip(racional, M.ravel()))
    if erro < 1e-12 * (1 + np.abs(M).max()):
        return int(racional.rank())

    sigma = scipy.linalg.svdvals(M)
    return int(np.sum(sigma > 1e-9 * sigma.max())) if sigma.max() > 0 else 0


def span_invariant(G, M_f, M_j):
    """span(G) é invariante por M_f e M_j (comparação de postos)."""
    posto = _rational_rank(G)
    return (_rational_rank(np.hstack([G, M_f @ G])) == posto
            and _rational_rank(np.hstack([G, M_j @ G])) == posto)


def reduced_common_dynamics(L_f, L_j, alpha, reach):
    """
    Dinâmica reduzida da parte comum sob a decomposição do grafo união.

    A_c = -M_f, B_c = -[M_f1 ... M_fmu], A_d = I - alpha M_j,
    B_d = -alpha [M_j1 ... M_jmu].

    Args:
        L_f, L_j: Laplacianas de fluxo e salto
        alpha: Ganho
        reach: ReachDecomposition do grafo união (define ordenação e mu)

    Returns:
        CommonDynamics
    """
    if not reach.common:
        raise ValueError("Parte comum vazia: não há dinâmica reduzida")

    _, _, acoplamentos_f, M_f = extract_blocks(np.asarray(L_f, dtype=float), reach)
    _, _, acoplamentos_j, M_j = extract_blocks(np.asarray(L_j, dtype=float), reach)
    c = M_f.shape[0]

    return CommonDynamics(
        A_c=-M_f,
        B_c=-np.hstack(acoplamentos_f),
        A_d=np.eye(c) - alpha * M_j,
        B_d=-alpha * np.hstack(acoplamentos_j),
    )


def _is_left_null(v, bloco):
    bloco = np.asarray(bloco, dtype=float)
    return bool(np.abs(v @ bloco).max(initial=0.0) < NULL_TOL * (1 + np.abs(bloco).max(initial=0.0)))


def predict(g_f, g_j, alpha, x0):
    """
    Prediz o multi-consenso da rede híbrida.

    Args:
        g_f: Grafo de fluxo
        g_j: Grafo de salto
        alpha: Ganho de acoplamento
        x0: Estado inicial

    Returns:
        ConsensusReport
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (g_f.n,):
        raise ValueError(f"Estado inicial com dimensão {x0.shape}, esperado ({g_f.n},)")

    L_f = laplacian(g_f)
    L_j = laplacian(g_j)

    limites = alpha_convergence_bound(L_j)
    admissivel = limites.admissible(alpha)
    if not admissivel:
        logger.warning("Ganho %.6g fora do intervalo admissível (0, %.6g)", alpha, limites.alpha_conv)

    particao = joint_coarsest_aep(g_f, g_j)
    reach = decompose(union_graph(g_f, g_j))
    decomposicao = decompose_laplacian(weighted_laplacian(L_f, L_j, alpha), reach)
    offsets = decomposicao.offsets()

    # Item (i): valores de consenso dos alcances exclusivos
    _, blocos_f, _, M_f = extract_blocks(L_f, reach)
    _, blocos_j, _, M_j = extract_blocks(L_j, reach)
    valores, conservado = [], []
    for i in range(reach.mu):
        v = decomposicao.left_zero_eigvecs[i]
        valores.append(float(decomposicao.left_vector_full(i) @ x0))
        conservado.append(_is_left_null(v, blocos_f[i]) and _is_left_null(v, blocos_j[i]))
        if not conservado[-1]:
            logger.info("Alcance %d: v_alpha não é conservado por fluxo e salto; valor previsto é aproximado", i)

    zero_eigvecs = tuple(decomposicao.to_original(z) for z in decomposicao.right_zero_eigvecs)
    relatorio = ConsensusReport(
        partition=particao,
        ordering=decomposicao.permutation,
        reach=reach,
        alpha=float(alpha),
        alpha_admissible=admissivel,
        reach_values=tuple(valores),
        reach_left_eigvecs=tuple(decomposicao.left_zero_eigvecs),
        gamma_vectors=tuple(decomposicao.gammas),
        zero_eigvecs=zero_eigvecs,
        conserved=tuple(conservado),
        L_f=L_f,
        L_j=L_j,
        x0=x0,
    )

    if not reach.common:
        return relatorio

    celulas_comuns = tuple(c for c in particao.cells if c <= reach.common)
    G = np.column_stack(decomposicao.gammas)
    invariante = span_invariant(G, M_f, M_j)

    # z_alpha,i é ponto fixo do fluxo e do salto na parte comum
    dinamica = reduced_common_dynamics(L_f, L_j, alpha, reach)
    ponto_fixo = True
    for i in range(reach.mu):
        entrada = np.zeros(offsets[-1])
        entrada[offsets[i]:offsets[i + 1]] = 1.0
        residuo_f = dinamica.A_c @ decomposicao.gammas[i] + dinamica.B_c @ entrada
        residuo_j = dinamica.A_d @ decomposicao.gammas[i] + dinamica.B_d @ entrada - decomposicao.gammas[i]
        if max(np.abs(residuo_f).max(), np.abs(residuo_j).max()) > FIXED_POINT_TOL:
            ponto_fixo = False

    relatorio = replace(relatorio, common_cells=celulas_comuns, span_invariant=invariante,
                        fixed_point=ponto_fixo)
    if invariante and ponto_fixo:
        return replace(relatorio, common_kind=CONSTANT,
                       common_values=tuple(float(v) for v in relatorio.common_constants()))

    if invariante:
        logger.info("span(Gamma) invariante, mas fluxo e salto puxam a parte comum para valores diferentes")
    return replace(relatorio, common_kind=HYBRID_ARC, reduced_dynamics=dinamica)


def predict_continuous(g, x0):
    """
    Predição para a rede puramente contínua x' = -L x de um único grafo.

    Cada alcance converge para v_i^T x_i(0), com v_i o vetor nulo à esquerda
    do seu bloco; a parte comum converge para sum_i gamma^i x_i, constante
    em cada célula da AEP mais grossa de g.

    Args:
        g: Grafo (de fluxo ou de salto)
        x0: Estado inicial

    Returns:
        ConsensusReport com reach_value_source = "continuous"
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (g.n,):
        raise ValueError(f"Estado inicial com dimensão {x0.shape}, esperado ({g.n},)")

    L = laplacian(g)
    particao = coarsest_aep(g)
    reach = decompose(g)
    decomposicao = decompose_laplacian(L, reach)

    relatorio = ConsensusReport(
        partition=particao,
        ordering=decomposicao.permutation,
        reach=reach,
        alpha=0.0,
        alpha_admissible=True,
        reach_values=tuple(float(decomposicao.left_vector_full(i) @ x0) for i in range(reach.mu)),
        reach_left_eigvecs=tuple(decomposicao.left_zero_eigvecs),
        gamma_vectors=tuple(decomposicao.gammas),
        zero_eigvecs=tuple(decomposicao.to_original(z) for z in decomposicao.right_zero_eigvecs),
        conserved=(True,) * reach.mu,
        L_f=L,
        L_j=np.zeros_like(L),
        x0=x0,
        reach_value_source=CONTINUOUS,
    )
    if not reach.common:
        return relatorio

    relatorio = replace(relatorio, common_cells=tuple(c for c in particao.cells if c <= reach.common),
                        span_invariant=True, fixed_point=True, common_kind=CONSTANT)
    return replace(relatorio, common_values=tuple(float(v) for v in relatorio.common_constants()))


def periodic_reach_values(L_f, L_j, alpha, tau, x0, reach):
    """
    Valores exatos de consenso de cada alcance para o domínio tau-periódico.

    Usa o vetor de Perron à esquerda de E_i = (I - alpha L_ji) exp(-L_fi tau),
    normalizado para soma 1.

    Returns:
        tuple de floats, um por alcance
    """
    x0 = np.asarray(x0, dtype=float)
    _, blocos_f, _, _ = extract_blocks(np.asarray(L_f, dtype=float), reach)
    _, blocos_j, _, _ = extract_blocks(np.asarray(L_j, dtype=float), reach)

    valores = []
    for parte, Lf_i, Lj_i in zip(reach.exclusive_parts, blocos_f, blocos_j):
        h = Lf_i.shape[0]
        E = (np.eye(h) - alpha * Lj_i) @ expm(-Lf_i * tau)
        _, _, Vh = scipy.linalg.svd((E - np.eye(h)).T)
        w = Vh[-1]
        w = w / w.sum()
        valores.append(float(w @ x0[sorted(parte)]))
    return tuple(valores)


def periodic_report(report, tau):
    """
    Relatório com os valores exatos do domínio tau-periódico no lugar dos
    valores de L_alpha; refaz as constantes da parte comum.
    """
    valores = periodic_reach_values(report.L_f, report.L_j, report.alpha, tau, report.x0, report.reach)
    relatorio = replace(report, reach_values=valores, reach_value_source=PERIODIC_EXACT)
    if report.common_kind == CONSTANT:
        relatorio = replace(relatorio, common_values=tuple(float(v) for v in relatorio.common_constants()))
    return relatorio


def _window_mean(trajectory, janela, nos):
    return float(trajectory.x[np.ix_(janela, sorted(nos))].mean())


def verify(trajectory, report, tol, reference=None):
    """
    Confere a predição contra a trajetória nas últimas 10% das amostras.

    (a) amplitude dentro de cada célula; (b) valor previsto de cada alcance;
    (c) valores constantes previstos da parte comum; (d) acompanhamento do
    arco híbrido obtido simulando a dinâmica reduzida com as entradas
    previstas. Em domínio periódico, alcances não conservados ganham também
    uma verificação informativa contra o valor periódico exato.

    Args:
        trajectory: HybridTrajectory
        report: ConsensusReport
        tol: Tolerância
        reference: HybridTrajectory de referência para (d) (opcional)

    Returns:
        VerificationRecord
    """
    if trajectory.n_agents != report.partition.n:
        raise VerificationDomainError(
            f"Trajetória com {trajectory.n_agents} agentes, relatório com {report.partition.n}")

    janela = trajectory.final_window(0.1)
    checks = []

    # (a) amplitude dentro das células
    amplitude = max(cell_spread(trajectory.x[k], report.partition) for k in janela)
    checks.append(CheckResult("cell_spread", amplitude < tol, amplitude))

    # Diagnóstico: valor exato do domínio periódico para alcances não conservados
    dominio = trajectory.domain
    periodicos = None
    if (dominio is not None and dominio.kind == "periodic" and dominio.t0 == 0.0
            and report.reach_value_source == WEIGHTED_LAPLACIAN and not all(report.conserved)):
        periodicos = periodic_reach_values(report.L_f, report.L_j, report.alpha, dominio.tau,
                                           trajectory.x[0], report.reach)

    # (b) valores previstos dos alcances
    observados, lacunas = [], []
    for i, parte in enumerate(report.reach.exclusive_parts):
        observado = _window_mean(trajectory, janela, parte)
        previsto = report.reach_values[i]
        erro = abs(observado - previsto)
        observados.append(observado)
        lacunas.append(observado - previsto)
        checks.append(CheckResult(f"reach_{i}", erro < tol, erro,
                                  detail={"observed": observado, "predicted": previsto,
                                          "conserved": report.conserved[i], "source": report.reach_value_source}))
        if erro >= tol and not report.conserved[i]:
            logger.warning("Alcance %d: observado %.6g difere do previsto %.6g (v_alpha não conservado)",
                           i, observado, previsto)

        if periodicos is not None and not report.conserved[i]:
            erro_periodico = abs(observado - periodicos[i])
            checks.append(CheckResult(f"reach_{i}_periodic_exact", erro_periodico < tol, erro_periodico,
                                      informational=True,
                                      detail={"observed": observado, "periodic_exact": periodicos[i]}))

    # (c) parte comum constante
    if report.common_kind == CONSTANT:
        esperados = report.common_values
        for r, celula in enumerate(report.common_cells):
            observado = _window_mean(trajectory, janela, celula)
            erro = abs(observado - esperados[r])
            checks.append(CheckResult(f"common_{r}", erro < tol, erro,
                                      detail={"observed": observado, "expected": float(esperados[r])}))

    # (d) arco híbrido: dinâmica reduzida com entradas congeladas
    if report.common_kind == HYBRID_ARC:
        if reference is None:
            if dominio is None:
                raise VerificationDomainError("Trajetória sem domínio de tempo para a referência reduzida")
            comuns = sorted(report.reach.common)
            A, J = report.reduced_dynamics.augmented(report.reach_inputs())
            reference = simulate_linear(A, J, dominio, np.append(trajectory.x[0][comuns], 1.0),
                                        trajectory.sample_dt)
            reference = replace(reference, x=reference.x[:, :-1])
        if len(reference.t) != len(trajectory.t) or not np.allclose(reference.t, trajectory.t, atol=1e-9) \
                or not np.array_equal(reference.j, trajectory.j):
            raise VerificationDomainError("Grade da referência reduzida difere da trajetória")

        comuns = sorted(report.reach.common)
        diferenca = np.abs(trajectory.x[np.ix_(janela, comuns)] - reference.x[janela])
        erro = float(diferenca.max())
        checks.append(CheckResult("hybrid_arc", erro < tol, erro))

    registro = VerificationRecord(tuple(checks), tuple(report.reach_values), tuple(observados), tuple(lacunas),
                                  periodic_values=periodicos)
    if registro.passed:
        logger.info("Verificação: aprovada")
    else:
        logger.warning("Verificação: reprovada (%s)", ", ".join(registro.discrepancies))
    return registro

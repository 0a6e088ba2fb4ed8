#!/usr/bin/env python3
"""
Ganho de acoplamento admissível, matriz de monodromia reversa e
certificado de Lyapunov para o caso periódico.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from partitions import characteristic_matrix
from spectral import expm, spectrum, zero_tolerance

logger = logging.getLogger(__name__)

# Folgas numéricas dos testes de estocasticidade e de módulo
ENTRY_SLACK = 1e-12
MODULUS_SLACK = 1e-9


class CertificateError(RuntimeError):
    """Certificado de Lyapunov impossível ou falha na equação de Lyapunov."""


@dataclass(frozen=True)
class GainBounds:
    """Limites de ganho: alpha_star, limite 1/Re(lambda), limite de grau e o mínimo alpha_conv."""
    alpha_star: float
    real_part_bound: float
    degree_bound: float
    alpha_conv: float
    witness_star: complex = None
    witness_real: complex = None

    def admissible(self, alpha):
        return 0 < alpha < self.alpha_conv

    def auto_alpha(self):
        """0.9 * alpha_conv, ou 1.0 quando o grafo de salto não tem arestas."""
        if np.isinf(self.alpha_conv):
            return 1.0
        return 0.9 * self.alpha_conv


@dataclass(frozen=True)
class MonodromyAnalysis:
    H: np.ndarray
    tau: float
    alpha: float
    eigenvalues: np.ndarray
    is_row_stochastic: bool
    is_nonnegative: bool
    has_positive_diagonal: bool
    unit_eigenvalue_count: int
    second_modulus: float
    flow_factor_stochastic: bool
    jump_factor_stochastic: bool
    gershgorin_discs: tuple = ()
    spectrum_in_discs: bool = None

    @property
    def contracts(self):
        """Todos os autovalores diferentes de 1 têm módulo menor que 1."""
        return self.second_modulus < 1.0


@dataclass(frozen=True)
class LyapunovCertificate:
    """
    Certificado V(x, s) = e^{-beta s} W(e^{-L_f (tau - s)} x), com
    W(x) = (Q2^T x)^T P22 (Q2^T x).
    """
    T: np.ndarray
    consensus_dim: int
    H_tilde: np.ndarray
    P22: np.ndarray
    kappa: float
    beta: float
    beta_max: float
    tau: float
    L_f: np.ndarray

    @property
    def Q2(self):
        return self.T[:, self.consensus_dim:]


def _nonzero_eigenvalues(L_j):
    autovalores = spectrum(L_j)
    return autovalores[np.abs(autovalores) >= zero_tolerance(L_j)]


def alpha_star(L_j):
    """
    Limite alpha* = min 2 Re(lambda) / |lambda|^2 sobre os autovalores não nulos.

    Returns:
        float (inf se não houver autovalor não nulo)
    """
    nao_nulos = _nonzero_eigenvalues(L_j)
    if nao_nulos.size == 0:
        return np.inf
    return float(np.min(2 * nao_nulos.real / np.abs(nao_nulos) ** 2))


def alpha_convergence_bound(L_j):
    """
    Calcula os limites de ganho que garantem convergência.

    alpha_conv = min(alpha*, min 1/Re(lambda), 1/grau de entrada máximo)

    Args:
        L_j: Laplaciana do grafo de salto

    Returns:
        GainBounds
    """
    L_j = np.asarray(L_j)
    nao_nulos = _nonzero_eigenvalues(L_j)
    grau_max = float(np.max(np.diag(L_j), initial=0.0))
    degree_bound = 1.0 / grau_max if grau_max > 0 else np.inf

    if nao_nulos.size == 0:
        return GainBounds(np.inf, np.inf, degree_bound, min(np.inf, degree_bound))

    razoes = 2 * nao_nulos.real / np.abs(nao_nulos) ** 2
    k_star = int(np.argmin(razoes))
    k_real = int(np.argmax(nao_nulos.real))

    a_star = float(razoes[k_star])
    real_bound = float(1.0 / nao_nulos[k_real].real)
    alpha_conv = min(a_star, real_bound, degree_bound)

    logger.debug("Limites de ganho: alpha*=%.6g, 1/Re=%.6g, grau=%.6g", a_star, real_bound, degree_bound)
    return GainBounds(a_star, real_bound, degree_bound, alpha_conv,
                      complex(nao_nulos[k_star]), complex(nao_nulos[k_real]))


def _is_stochastic(M):
    return (bool(np.all(np.abs(M.sum(axis=1) - 1.0) < ENTRY_SLACK)),
            bool(np.all(M >= -ENTRY_SLACK)))


def gershgorin_discs(H):
    """Discos de Geršgorin (centro H_ii, raio soma |H_ik|, k != i) de cada linha."""
    H = np.asarray(H, dtype=float)
    centros = np.diag(H).copy()
    raios = np.abs(H).sum(axis=1) - np.abs(centros)
    return list(zip(centros, raios))


def monodromy(L_f, L_j, alpha, tau):
    """
    Matriz de monodromia reversa H = exp(-L_f tau) (I - alpha L_j) e seus testes.

    Args:
        L_f: Laplaciana do fluxo
        L_j: Laplaciana do salto
        alpha: Ganho de acoplamento
        tau: Tempo de permanência

    Returns:
        MonodromyAnalysis
    """
    L_f = np.asarray(L_f, dtype=float)
    L_j = np.asarray(L_j, dtype=float)
    if L_f.shape != L_j.shape or L_f.shape[0] != L_f.shape[1]:
        raise ValueError(f"Dimensões incompatíveis: {L_f.shape} e {L_j.shape}")
    if alpha <= 0:
        raise ValueError(f"Ganho deve ser positivo, recebido {alpha}")
    if tau <= 0:
        raise ValueError(f"Tempo de permanência deve ser positivo, recebido {tau}")

    n = L_f.shape[0]
    fluxo = expm(-L_f * tau)
    salto = np.eye(n) - alpha * L_j
    H = fluxo @ salto

    estocastica, nao_negativa = _is_stochastic(H)
    autovalores = spectrum(H)

    # Autovalores unitários e o maior módulo entre os demais
    unitarios = np.abs(autovalores - 1.0) < MODULUS_SLACK
    restantes = np.abs(autovalores[~unitarios])
    segundo = float(restantes.max()) if restantes.size else 0.0

    diagonal_positiva = bool(np.all(np.diag(salto) > 0) and np.all(np.diag(H) > -ENTRY_SLACK))

    discos = [(float(c), float(r)) for c, r in gershgorin_discs(H)]
    dentro = bool(all(min(abs(lam - c) - r for c, r in discos) <= MODULUS_SLACK for lam in autovalores))

    return MonodromyAnalysis(
        H=H,
        tau=float(tau),
        alpha=float(alpha),
        eigenvalues=autovalores,
        is_row_stochastic=estocastica,
        is_nonnegative=nao_negativa,
        has_positive_diagonal=diagonal_positiva,
        unit_eigenvalue_count=int(unitarios.sum()),
        second_modulus=segundo,
        flow_factor_stochastic=all(_is_stochastic(fluxo)),
        jump_factor_stochastic=all(_is_stochastic(salto)),
        gershgorin_discs=tuple(discos),
        spectrum_in_discs=dentro,
    )


def lyapunov_certificate(L_f, L_j, alpha, tau, pi_star):
    """
    Certificado de Lyapunov para o domínio tau-periódico.

    T = [Q1 Q2] ortonormal com Q1 gerando Im P(pi_star); resolve
    H22^T P22 H22 - P22 = -I (kappa = 1) e usa beta = beta_max / 2.

    Args:
        L_f, L_j: Laplacianas de fluxo e salto
        alpha: Ganho
        tau: Período
        pi_star: AEP conjunta (subespaço de consenso)

    Returns:
        LyapunovCertificate
    """
    analise = monodromy(L_f, L_j, alpha, tau)
    H = analise.H
    n = H.shape[0]

    P = characteristic_matrix(pi_star, n).astype(float)
    r = P.shape[1]
    Q, _, _ = scipy.linalg.qr(P, pivoting=True)
    T = Q
    H_tilde = T.T @ H @ T

    # Im P deve ser invariante por H (bloco H21 nulo)
    if r < n and np.abs(H_tilde[r:, :r]).max() > 1e-9:
        raise CertificateError("Subespaço de consenso não é invariante pela monodromia")

    H22 = H_tilde[r:, r:]
    kappa = 1.0

    if H22.size == 0:
        return LyapunovCertificate(T, r, H_tilde, np.zeros((0, 0)), kappa, 1.0 / tau, np.inf,
                                   float(tau), np.asarray(L_f, dtype=float))

    raio = float(np.abs(spectrum(H22)).max())
    if raio >= 1.0 - MODULUS_SLACK:
        raise CertificateError(f"H22 não é Schur (raio espectral {raio:.12g})")

    try:
        P22 = scipy.linalg.solve_discrete_lyapunov(H22.T, np.eye(H22.shape[0]), method="direct")
    except (np.linalg.LinAlgError, ValueError) as e:
        raise CertificateError(f"Falha na equação de Lyapunov: {e}") from e
    P22 = 0.5 * (P22 + P22.T)

    autovalores_P = scipy.linalg.eigvalsh(P22)
    if autovalores_P.min() <= 0:
        raise CertificateError("P22 não é definida positiva")

    # Decréscimo H22^T P22 H22 - P22 <= -kappa I
    decrescimo = scipy.linalg.eigvalsh(H22.T @ P22 @ H22 - P22)
    if decrescimo.max() > -kappa + 1e-9 * (1 + autovalores_P.max()):
        raise CertificateError(f"Decréscimo insuficiente: {decrescimo.max():.6g}")

    lambda_max = float(autovalores_P.max())
    if lambda_max - kappa <= 1e-15 * lambda_max:
        beta_max = np.inf
        beta = 1.0 / tau
    else:
        beta_max = float(np.log(lambda_max / (lambda_max - kappa)) / tau)
        beta = 0.5 * beta_max

    logger.debug("Certificado: N2=%d, lambda_max(P22)=%.6g, beta=%.6g", H22.shape[0], lambda_max, beta)
    return LyapunovCertificate(T, r, H_tilde, P22, kappa, beta, beta_max,
                               float(tau), np.asarray(L_f, dtype=float))


def distance_to_consensus(cert, x):
    """Distância ||Q2^T x|| ao subespaço de consenso."""
    return float(np.linalg.norm(cert.Q2.T @ np.asarray(x, dtype=float)))


def lyapunov_value(cert, x, s):
    """
    Avalia V(x, s) para o estado x e o relógio de fluxo s em [0, tau].
    """
    if cert.P22.size == 0:
        return 0.0
    y = cert.Q2.T @ (expm(-cert.L_f * (cert.tau - s)) @ np.asarray(x, dtype=float))
    return float(np.exp(-cert.beta * s) * (y @ cert.P22 @ y))


def convergence_horizon(L_f, L_j, alpha, tau, target=1e-9, scale=1.0):
    """
    Horizonte estimado para que os modos não unitários de H decaiam até
    `target` (relativo à escala do estado), usando o segundo maior módulo.

    Returns:
        float (inf se a monodromia não contrai)
    """
    analise = monodromy(L_f, L_j, alpha, tau)
    rho = analise.second_modulus
    if rho >= 1.0:
        return np.inf
    if rho <= 0.0:
        return float(tau)
    saltos = int(np.ceil(np.log(target / max(scale, 1e-300)) / np.log(rho)))
    return float(max(saltos, 1) * tau)

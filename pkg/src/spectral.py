#!/usr/bin/env python3
"""
Álgebra linear da Laplaciana de grafos direcionados.
Construção da Laplaciana, forma triangular em blocos (partes exclusivas e
parte comum), autovetores associados ao autovalor zero, espectro denso e
exponencial de matriz.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from graph_core import decompose, ordering_from_decomposition

logger = logging.getLogger(__name__)

# Limite de condicionamento acima do qual a solução do bloco comum é suspeita
COND_WARNING = 1e12


class SpectrumError(RuntimeError):
    """Falha do algoritmo QR de autovalores."""


class ExpmOverflowError(OverflowError):
    """Exponencial de matriz com entradas não finitas."""


class DecompositionError(RuntimeError):
    """Bloco comum singular na forma triangular."""

    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


def laplacian(g):
    """
    Laplaciana L = D - A do grafo (grau de entrada menos adjacência).

    Args:
        g: Digraph

    Returns:
        np.ndarray inteiro n x n com linhas de soma zero
    """
    A = g.adjacency()
    return np.diag(A.sum(axis=1)) - A


def zero_tolerance(L):
    """Tolerância para autovalor nulo: 1e-9 * (1 + ||L||_inf)."""
    return 1e-9 * (1.0 + np.abs(np.asarray(L, dtype=float)).sum(axis=1).max(initial=0.0))


def spectrum(m):
    """
    Autovalores de uma matriz quadrada densa.

    Usa a redução de Hessenberg seguida de iterações QR com deslocamento
    (LAPACK geev via scipy). A ordenação é determinística por (parte real,
    parte imaginária).

    Args:
        m: Matriz quadrada

    Returns:
        np.ndarray complexo com os n autovalores ordenados
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"Matriz não quadrada: {m.shape}")
    if m.shape[0] == 0:
        return np.zeros(0, dtype=complex)

    try:
        autovalores = scipy.linalg.eigvals(m, check_finite=True)
    except np.linalg.LinAlgError as e:
        raise SpectrumError(f"QR não convergiu para matriz {m.shape[0]}x{m.shape[0]}: {e}") from e

    # Limpa partes imaginárias residuais de autovalores reais
    escala = 1e-12 * (1.0 + np.abs(autovalores).max())
    autovalores = np.where(np.abs(autovalores.imag) < escala, autovalores.real + 0j, autovalores)
    ordem = np.lexsort((autovalores.imag, np.round(autovalores.real, 12)))
    return autovalores[ordem]


def zero_eigenvalue_count(L):
    """Número de autovalores com |lambda| abaixo da tolerância de zero."""
    return int(np.sum(np.abs(spectrum(L)) < zero_tolerance(L)))


def expm(m):
    """
    Exponencial de matriz por escalonamento e quadratura com aproximante de
    Padé de grau 13.

    Args:
        m: Matriz quadrada finita

    Returns:
        np.ndarray com exp(m)
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"Matriz não quadrada: {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("Matriz com entradas não finitas")

    with np.errstate(over="ignore", invalid="ignore"):
        resultado = scipy.linalg.expm(m)

    if not np.all(np.isfinite(resultado)):
        raise ExpmOverflowError(f"Overflow na exponencial (norma {np.linalg.norm(m, np.inf):.3g})")
    return resultado


@dataclass(frozen=True)
class LaplacianDecomposition:
    """
    Forma triangular em blocos de uma Laplaciana (ou de uma matriz com o
    mesmo padrão de esparsidade) sob a ordenação canônica.

    Os vetores z_i e v_i estão nas coordenadas permutadas; use
    `to_original` para voltar aos rótulos dos nós.
    """
    permutation: tuple
    reach: object
    reach_blocks: tuple
    coupling_blocks: tuple
    common_block: np.ndarray
    gammas: tuple
    right_zero_eigvecs: tuple
    left_zero_eigvecs: tuple
    condition: float

    @property
    def mu(self):
        return len(self.reach_blocks)

    @property
    def n(self):
        return len(self.permutation)

    def offsets(self):
        """Índices iniciais de cada parte exclusiva e da parte comum."""
        inicio = np.cumsum([0] + [bloco.shape[0] for bloco in self.reach_blocks])
        return [int(i) for i in inicio]

    def to_original(self, vetor):
        """Converte um vetor das coordenadas permutadas para os rótulos originais."""
        vetor = np.asarray(vetor)
        original = np.zeros_like(vetor)
        original[list(self.permutation)] = vetor
        return original

    def left_vector_full(self, i):
        """v_i incorporado ao vetor de n posições (zero fora de H_i), rótulos originais."""
        completo = np.zeros(self.n)
        inicio = self.offsets()[i]
        completo[inicio:inicio + len(self.left_zero_eigvecs[i])] = self.left_zero_eigvecs[i]
        return self.to_original(completo)

    def reconstruct(self):
        """Remonta a matriz n x n original a partir dos blocos."""
        offsets = self.offsets()
        c = self.common_block.shape[0]
        dtype = np.result_type(self.common_block, *self.reach_blocks)
        Lp = np.zeros((self.n, self.n), dtype=dtype)
        for i, bloco in enumerate(self.reach_blocks):
            a, b = offsets[i], offsets[i + 1]
            Lp[a:b, a:b] = bloco
            if c:
                Lp[offsets[-1]:, a:b] = self.coupling_blocks[i]
        if c:
            Lp[offsets[-1]:, offsets[-1]:] = self.common_block

        perm = list(self.permutation)
        L = np.zeros_like(Lp)
        L[np.ix_(perm, perm)] = Lp
        return L

    def common_spectrum_in_right_half_plane(self):
        if self.common_block.shape[0] == 0:
            return True
        return bool(np.all(spectrum(self.common_block).real > 0))


def _left_null_vector(bloco):
    """Vetor não negativo v com v^T L_i = 0 e soma 1 (vetor singular de menor valor)."""
    if bloco.shape[0] == 1:
        return np.ones(1)

    _, _, Vh = scipy.linalg.svd(np.asarray(bloco, dtype=float).T)
    v = Vh[-1].real
    if v.sum() < 0:
        v = -v

    # Zera resíduos numéricos nos nós que não são raiz
    v[np.abs(v) < 1e-12 * np.abs(v).max()] = 0.0
    if np.any(v < 0):
        raise DecompositionError(f"Autovetor esquerdo com entradas negativas: {v}")
    return v / v.sum()


def extract_blocks(L, reach, ordering=None):
    """
    Separa a matriz permutada em blocos L_i, M_i e M, sem resolver nada.

    Returns:
        tuple (permutação, blocos L_i, blocos M_i, bloco comum M)
    """
    L = np.asarray(L)
    perm = list(ordering) if ordering is not None else ordering_from_decomposition(reach)
    if L.shape != (len(perm), len(perm)):
        raise ValueError(f"Dimensão {L.shape} incompatível com a ordenação de {len(perm)} nós")

    Lp = L[np.ix_(perm, perm)]
    offsets = np.cumsum([0] + [len(parte) for parte in reach.exclusive_parts])
    inicio_comum = int(offsets[-1])

    reach_blocks = []
    coupling_blocks = []
    for i in range(len(offsets) - 1):
        a, b = int(offsets[i]), int(offsets[i + 1])
        # Linhas de H_i só recebem de H_i
        fora = np.delete(Lp[a:b, :], np.s_[a:b], axis=1)
        if np.any(fora != 0):
            raise DecompositionError(f"Matriz não é triangular em blocos para o alcance {i}")
        reach_blocks.append(Lp[a:b, a:b])
        coupling_blocks.append(Lp[inicio_comum:, a:b])

    return tuple(perm), tuple(reach_blocks), tuple(coupling_blocks), Lp[inicio_comum:, inicio_comum:]


def decompose_laplacian(L, reach, ordering=None):
    """
    Extrai os blocos da forma triangular de uma matriz tipo Laplaciana.

    Serve para qualquer matriz com o padrão de esparsidade compatível com a
    decomposição em alcances informada (por exemplo L_alpha = L_f + alpha L_j
    sob a decomposição do grafo união).

    Args:
        L: Matriz n x n
        reach: ReachDecomposition usada para a ordenação
        ordering: Permutação (padrão: a canônica da decomposição)

    Returns:
        LaplacianDecomposition
    """
    perm, reach_blocks, coupling_blocks, M = extract_blocks(L, reach, ordering)
    offsets = np.cumsum([0] + [bloco.shape[0] for bloco in reach_blocks])
    inicio_comum = int(offsets[-1])
    c = M.shape[0]

    # Resolve M gamma^i = -M_i 1 para cada alcance
    gammas = []
    condicao = 1.0
    if c:
        condicao = float(np.linalg.cond(np.asarray(M, dtype=float)))
        if not np.isfinite(condicao):
            raise DecompositionError("Bloco comum singular", condition=condicao)
        if condicao > COND_WARNING:
            logger.warning("Bloco comum mal condicionado (condição estimada %.3g)", condicao)
        for Mi in coupling_blocks:
            rhs = -np.asarray(Mi, dtype=float) @ np.ones(Mi.shape[1])
            try:
                gammas.append(scipy.linalg.solve(np.asarray(M, dtype=float), rhs))
            except scipy.linalg.LinAlgError as e:
                raise DecompositionError(f"Bloco comum singular: {e}", condition=condicao) from e
    else:
        gammas = [np.zeros(0) for _ in coupling_blocks]

    # z_i = (0, ..., 1_{h_i}, ..., 0, gamma^i) nas coordenadas permutadas
    right = []
    for i in range(len(reach_blocks)):
        z = np.zeros(len(perm))
        z[int(offsets[i]):int(offsets[i + 1])] = 1.0
        z[inicio_comum:] = gammas[i]
        right.append(z)

    left = [_left_null_vector(bloco) for bloco in reach_blocks]

    return LaplacianDecomposition(
        permutation=tuple(perm),
        reach=reach,
        reach_blocks=tuple(reach_blocks),
        coupling_blocks=tuple(coupling_blocks),
        common_block=M,
        gammas=tuple(gammas),
        right_zero_eigvecs=tuple(right),
        left_zero_eigvecs=tuple(left),
        condition=condicao,
    )


def triangular_blocks(g):
    """Forma triangular em blocos da Laplaciana de g sob a ordenação canônica."""
    return decompose_laplacian(laplacian(g), decompose(g))


def format_matrix(m):
    """Serializa uma matriz: linha "rows cols" seguida das linhas com 17 dígitos."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    linhas = [f"{m.shape[0]} {m.shape[1]}"]
    for linha in m:
        linhas.append(" ".join(f"{valor:.17g}" for valor in linha))
    return "\n".join(linhas) + "\n"


def parse_matrix(text):
    """Lê uma matriz no formato de `format_matrix`."""
    linhas = [linha.split() for linha in text.strip().splitlines() if linha.strip()]
    if not linhas or len(linhas[0]) != 2:
        raise ValueError("Cabeçalho 'rows cols' ausente")
    rows, cols = int(linhas[0][0]), int(linhas[0][1])
    valores = np.array([[float(v) for v in linha] for linha in linhas[1:]], dtype=float)
    if valores.shape != (rows, cols):
        raise ValueError(f"Dimensão declarada {rows}x{cols} difere da lida {valores.shape}")
    return valores

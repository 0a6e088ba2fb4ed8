#!/usr/bin/env python3
"""
Partições do conjunto de nós e partições quase equitativas (AEP).

Implementa matrizes características, o teste AEP por contagem de vizinhos,
o teste equivalente de invariância L Im P ⊆ Im P, o refinamento até a AEP
mais grossa abaixo de uma semente e a AEP conjunta dos grafos de fluxo e de
salto semeada pelos alcances do grafo união.
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from sympy.utilities.iterables import multiset_partitions

from graph_core import decompose, intersection_graph, union_graph
from spectral import extract_blocks, laplacian

logger = logging.getLogger(__name__)


class Relation(Enum):
    EQUAL = "Equal"
    FINER = "Finer"
    COARSER = "Coarser"
    INCOMPARABLE = "Incomparable"


class Partition:
    """
    Partição ordenada dos nós 0..n-1 em células não vazias.

    A ordem das células é preservada (a AEP conjunta lista as partes
    exclusivas primeiro); a igualdade ignora a ordem.
    """

    def __init__(self, cells, n=None):
        celulas = tuple(frozenset(int(v) for v in celula) for celula in cells)
        if any(not celula for celula in celulas):
            raise ValueError("Partição com célula vazia")

        todos = [v for celula in celulas for v in celula]
        if len(todos) != len(set(todos)):
            raise ValueError("Células da partição não são disjuntas")
        if n is None:
            n = len(todos)
        if set(todos) != set(range(n)):
            raise ValueError(f"Células não particionam os nós 0..{n - 1}")

        self.cells = celulas
        self.n = n

    @classmethod
    def canonical(cls, cells, n=None):
        """Cria a partição com células ordenadas pelo menor rótulo."""
        return cls(sorted((frozenset(c) for c in cells), key=min), n)

    @classmethod
    def trivial(cls, n):
        return cls([range(n)], n)

    @classmethod
    def singletons(cls, n):
        return cls([[v] for v in range(n)], n)

    @property
    def r(self):
        return len(self.cells)

    def cell_index(self):
        """Vetor com o índice da célula de cada nó."""
        indice = np.empty(self.n, dtype=np.int64)
        for k, celula in enumerate(self.cells):
            indice[list(celula)] = k
        return indice

    def sorted_cells(self):
        return [sorted(celula) for celula in self.cells]

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.n == other.n and set(self.cells) == set(other.cells)

    def __hash__(self):
        return hash((self.n, frozenset(self.cells)))

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def __repr__(self):
        return f"Partition({self.sorted_cells()})"


@dataclass(frozen=True)
class AepWitness:
    """Par de nós da célula `cell` com contagens diferentes de vizinhos em `toward`."""
    cell: int
    toward: int
    nodes: tuple
    counts: tuple


@dataclass(frozen=True)
class AepResult:
    is_aep: bool
    witness: AepWitness = None

    def __bool__(self):
        return self.is_aep


@dataclass(frozen=True)
class OracleResult:
    """Resultado da enumeração exaustiva: os elementos maximais encontrados."""
    maxima: tuple
    candidates: int

    @property
    def unique(self):
        return len(self.maxima) == 1

    @property
    def maximum(self):
        return self.maxima[0] if self.unique else None


def _check_partition(pi, n):
    if pi.n != n:
        raise ValueError(f"Partição sobre {pi.n} nós, esperado {n}")


def characteristic_matrix(pi, n):
    """
    Matriz característica P(pi), n x r, com P[v, k] = 1 sse v pertence à célula k.

    Args:
        pi: Partition
        n: Número de nós

    Returns:
        np.ndarray inteiro
    """
    _check_partition(pi, n)
    P = np.zeros((n, pi.r), dtype=np.int64)
    P[np.arange(n), pi.cell_index()] = 1
    return P


def _neighbor_counts(g, pi):
    """C[v, k] = número de vizinhos de entrada de v na célula k."""
    return g.adjacency() @ characteristic_matrix(pi, g.n)


def is_aep(g, pi):
    """
    Testa se pi é quase equitativa para g.

    Para cada par ordenado de células distintas (rho_i, rho_j), todos os nós
    de rho_i devem ter o mesmo número de vizinhos de entrada em rho_j.

    Returns:
        AepResult com testemunha quando falso
    """
    _check_partition(pi, g.n)
    contagens = _neighbor_counts(g, pi)

    for i, celula in enumerate(pi.cells):
        nos = sorted(celula)
        referencia = nos[0]
        for j in range(pi.r):
            if j == i:
                continue
            for v in nos[1:]:
                if contagens[v, j] != contagens[referencia, j]:
                    witness = AepWitness(i, j, (referencia, v),
                                         (int(contagens[referencia, j]), int(contagens[v, j])))
                    return AepResult(False, witness)
    return AepResult(True)


def is_invariant(L, P):
    """
    Testa exatamente se L Im P ⊆ Im P.

    Cada coluna de L P deve ser constante dentro de cada célula, ou seja,
    L P = P W com W inteira (W é a linha de L P de um representante).

    Args:
        L: Matriz n x n inteira
        P: Matriz característica n x r

    Returns:
        bool
    """
    L = np.asarray(L)
    P = np.asarray(P)
    if L.ndim != 2 or L.shape[0] != L.shape[1] or P.ndim != 2 or P.shape[0] != L.shape[0]:
        raise ValueError(f"Dimensões incompatíveis: L {L.shape}, P {P.shape}")
    if not np.all((P == 0) | (P == 1)) or not np.all(P.sum(axis=1) == 1):
        raise ValueError("P não é uma matriz característica")

    LP = L @ P
    celula = P.argmax(axis=1)
    for k in range(P.shape[1]):
        linhas = LP[celula == k]
        if len(linhas) and not np.all(linhas == linhas[0]):
            return False
    return True


def _refine(graphs, cells):
    """
    Refina as células até que cada nó de uma célula tenha a mesma
    assinatura de contagens (em todos os grafos) para as outras células.
    """
    adjacencias = [g.adjacency() for g in graphs]
    n = graphs[0].n
    celulas = [frozenset(c) for c in cells]

    while True:
        indice = np.empty(n, dtype=np.int64)
        for k, celula in enumerate(celulas):
            indice[list(celula)] = k
        P = np.zeros((n, len(celulas)), dtype=np.int64)
        P[np.arange(n), indice] = 1
        contagens = np.hstack([A @ P for A in adjacencias])

        novas = []
        for k, celula in enumerate(celulas):
            grupos = {}
            for v in sorted(celula):
                assinatura = contagens[v].copy()
                # Contagem para a própria célula não entra no critério
                assinatura[k::len(celulas)] = 0
                grupos.setdefault(tuple(assinatura), []).append(v)
            novas.extend(frozenset(grupo) for grupo in grupos.values())

        if len(novas) == len(celulas):
            return celulas
        celulas = novas


def reach_seed(decomposition):
    """Semente com as partes exclusivas e a parte comum em uma única célula."""
    celulas = list(decomposition.exclusive_parts)
    if decomposition.common:
        celulas.append(decomposition.common)
    return Partition(celulas, decomposition.n)


def coarsest_aep(g, seed=None):
    """
    AEP mais grossa de g que refina a semente.

    Args:
        g: Digraph
        seed: Partition inicial (padrão: semente dos alcances de g)

    Returns:
        Partition canônica
    """
    if seed is None:
        seed = reach_seed(decompose(g))
    _check_partition(seed, g.n)
    return Partition.canonical(_refine([g], seed.cells), g.n)


def intersection_invariance(g_f, g_j, pi):
    """
    Verifica M_int P_c ⊆ Im P_c para as células comuns de pi.

    M_int é o bloco comum da Laplaciana do grafo interseção sob a
    decomposição do grafo união.
    """
    reach = decompose(union_graph(g_f, g_j))
    if not reach.common:
        return True

    _, _, _, M_int = extract_blocks(laplacian(intersection_graph(g_f, g_j)), reach)
    comuns = sorted(reach.common)
    posicao = {v: k for k, v in enumerate(comuns)}
    celulas_comuns = [c for c in pi.cells if c <= reach.common]
    if sum(len(c) for c in celulas_comuns) != len(comuns):
        raise ValueError("Partição não refina a parte comum do grafo união")

    P_c = characteristic_matrix(Partition([[posicao[v] for v in c] for c in celulas_comuns], len(comuns)),
                                len(comuns))
    return is_invariant(M_int, P_c)


def joint_coarsest_aep(g_f, g_j):
    """
    AEP conjunta mais grossa dos grafos de fluxo e de salto.

    Semeia com as partes exclusivas do grafo união e uma célula para a parte
    comum, e refina simultaneamente contra os dois grafos. As partes
    exclusivas nunca se dividem e vêm primeiro; as células comuns seguem,
    ordenadas pelo menor rótulo.

    Returns:
        Partition
    """
    if g_f.n != g_j.n:
        raise ValueError(f"Número de nós diferente: {g_f.n} != {g_j.n}")

    reach = decompose(union_graph(g_f, g_j))
    celulas = _refine([g_f, g_j], reach_seed(reach).cells)

    exclusivas = [c for c in celulas if c in set(reach.exclusive_parts)]
    ordem = {parte: k for k, parte in enumerate(reach.exclusive_parts)}
    exclusivas.sort(key=ordem.get)
    comuns = sorted((c for c in celulas if c <= reach.common), key=min)
    pi = Partition(exclusivas + comuns, g_f.n)

    if not intersection_invariance(g_f, g_j, pi):
        logger.warning("Células comuns %s não são invariantes sob M_int", [sorted(c) for c in comuns])

    logger.debug("AEP conjunta: %s", pi)
    return pi


def compare(pi1, pi2):
    """
    Compara duas partições pela relação de refinamento.

    Returns:
        Relation.FINER se cada célula de pi1 está contida em alguma de pi2
    """
    if pi1.n != pi2.n:
        raise ValueError(f"Conjuntos base diferentes: {pi1.n} != {pi2.n}")
    if pi1 == pi2:
        return Relation.EQUAL

    def refina(a, b):
        return all(any(ca <= cb for cb in b.cells) for ca in a.cells)

    if refina(pi1, pi2):
        return Relation.FINER
    if refina(pi2, pi1):
        return Relation.COARSER
    return Relation.INCOMPARABLE


def brute_force_coarsest_aep(graphs, seed):
    """
    Oráculo exaustivo: enumera todas as partições que refinam a semente e são
    AEP para todos os grafos, e devolve os elementos maximais.

    Instâncias com mais de um maximal são registradas em log.
    """
    n = seed.n
    candidatos = []
    for blocos in multiset_partitions(list(range(n))):
        pi = Partition(blocos, n)
        if compare(pi, seed) not in (Relation.FINER, Relation.EQUAL):
            continue
        if all(is_aep(g, pi) for g in graphs):
            candidatos.append(pi)

    maximos = [pi for pi in candidatos
               if not any(compare(pi, outro) is Relation.FINER for outro in candidatos)]
    maximos = tuple(sorted((Partition.canonical(pi.cells, n) for pi in maximos),
                           key=lambda p: p.sorted_cells()))
    if len(maximos) > 1:
        logger.warning("Maximais incomparáveis encontrados: %s", maximos)
    return OracleResult(maximos, len(candidatos))


def format_partition(pi):
    """Uma linha por célula, rótulos em ordem crescente."""
    return "\n".join(" ".join(str(v) for v in sorted(celula)) for celula in pi.cells) + "\n"


def parse_partition(text, n=None):
    """Lê uma partição no formato de `format_partition`, preservando a ordem das células."""
    celulas = [[int(v) for v in linha.split()] for linha in text.splitlines()
               if linha.strip() and not linha.lstrip().startswith("#")]
    return Partition(celulas, n)

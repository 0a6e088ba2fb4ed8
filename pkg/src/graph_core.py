#!/usr/bin/env python3
"""
Representação de grafos direcionados de comunicação entre agentes.
Implementa leitura de listas de arestas, conjuntos alcançáveis, decomposição
em alcances (reaches) com partes exclusivas e parte comum, e operações de
união/interseção de grafos.
"""
import logging
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)


class EdgeListParseError(ValueError):
    """Erro de leitura de lista de arestas, com o número da linha problemática."""

    def __init__(self, message, line_number=None, source=None):
        self.line_number = line_number
        self.source = source
        prefixo = ""
        if source:
            prefixo += f"{source}:"
        if line_number is not None:
            prefixo += f"{line_number}: "
        elif prefixo:
            prefixo += " "
        super().__init__(prefixo + message)


@dataclass(frozen=True)
class Digraph:
    """
    Grafo direcionado sem laços e sem arestas repetidas.

    A aresta (u, v) indica que a informação flui de u para v, ou seja,
    u é vizinho (de entrada) de v.
    """
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"Número de nós inválido: {self.n}")
        arestas = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in arestas:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"Aresta ({u}, {v}) fora do intervalo 0..{self.n - 1}")
            if u == v:
                raise ValueError(f"Laço não permitido no nó {u}")
        object.__setattr__(self, "edges", arestas)

    def _check_node(self, v):
        if not (0 <= v < self.n):
            raise ValueError(f"Nó {v} fora do intervalo 0..{self.n - 1}")

    def adjacency(self):
        """Matriz de adjacência inteira com A[v, u] = 1 sse (u, v) é aresta."""
        A = np.zeros((self.n, self.n), dtype=np.int64)
        for u, v in self.edges:
            A[v, u] = 1
        return A

    def in_degrees(self):
        """Grau de entrada de cada nó."""
        graus = np.zeros(self.n, dtype=np.int64)
        for _, v in self.edges:
            graus[v] += 1
        return graus

    def to_networkx(self):
        """Converte para networkx.DiGraph preservando os rótulos 0..n-1."""
        G = nx.DiGraph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(sorted(self.edges))
        return G


@dataclass(frozen=True)
class ReachDecomposition:
    """
    Decomposição de um grafo em alcances maximais.

    Attributes:
        reaches: alcances R_1..R_mu (frozensets)
        exclusive_parts: partes exclusivas H_1..H_mu
        common: parte comum C (nós em dois ou mais alcances)
    """
    reaches: tuple
    exclusive_parts: tuple
    common: frozenset

    @property
    def mu(self):
        return len(self.reaches)

    @property
    def h(self):
        return [len(parte) for parte in self.exclusive_parts]

    @property
    def c(self):
        return len(self.common)

    @property
    def n(self):
        return sum(self.h) + self.c


def parse_edge_list(text, source=None):
    """
    Lê um grafo no formato de lista de arestas.

    Formato: primeira linha útil "nodes <n>", depois uma aresta "<src> <dst>"
    por linha. Linhas iniciadas por '#' são comentários.

    Args:
        text: Conteúdo do arquivo
        source: Nome da origem (usado nas mensagens de erro)

    Returns:
        Digraph com as arestas declaradas (duplicatas colapsadas)
    """
    n = None
    arestas = set()

    for numero, linha in enumerate(text.splitlines(), start=1):
        conteudo = linha.strip()
        if not conteudo or conteudo.startswith("#"):
            continue

        partes = conteudo.split()

        # Cabeçalho com o número de nós
        if n is None:
            if len(partes) != 2 or partes[0] != "nodes":
                raise EdgeListParseError(f"esperado 'nodes <n>', encontrado '{conteudo}'", numero, source)
            try:
                n = int(partes[1])
            except ValueError:
                raise EdgeListParseError(f"contagem de nós inválida '{partes[1]}'", numero, source) from None
            if n < 1:
                raise EdgeListParseError(f"contagem de nós deve ser positiva, encontrado {n}", numero, source)
            continue

        if len(partes) != 2:
            raise EdgeListParseError(f"linha de aresta malformada '{conteudo}'", numero, source)
        try:
            u, v = int(partes[0]), int(partes[1])
        except ValueError:
            raise EdgeListParseError(f"índices não inteiros em '{conteudo}'", numero, source) from None

        if not (0 <= u < n and 0 <= v < n):
            raise EdgeListParseError(f"nó fora do intervalo 0..{n - 1} em '{conteudo}'", numero, source)
        if u == v:
            raise EdgeListParseError(f"laço declarado no nó {u}", numero, source)

        arestas.add((u, v))

    if n is None:
        raise EdgeListParseError("cabeçalho 'nodes <n>' ausente", None, source)

    return Digraph(n, frozenset(arestas))


def parse_edge_list_file(path):
    """Lê um grafo de um arquivo de lista de arestas."""
    with open(path, "r", encoding="utf-8") as f:
        return parse_edge_list(f.read(), source=str(path))


def format_edge_list(g, header=None):
    """Serializa o grafo no formato de lista de arestas (arestas ordenadas)."""
    linhas = []
    if header:
        linhas.extend(f"# {linha}" for linha in header.splitlines())
    linhas.append(f"nodes {g.n}")
    linhas.extend(f"{u} {v}" for u, v in sorted(g.edges))
    return "\n".join(linhas) + "\n"


def neighbors(g, v):
    """
    Vizinhos de entrada de um nó.

    Args:
        g: Digraph
        v: Nó

    Returns:
        frozenset com os nós u tais que (u, v) é aresta
    """
    g._check_node(v)
    return frozenset(u for u, w in g.edges if w == v)


def reachable_set(g, v):
    """Conjunto alcançável R(v): o próprio v e todo nó atingido por um caminho a partir de v."""
    g._check_node(v)
    return frozenset(nx.descendants(g.to_networkx(), v)) | {v}


def decompose(g):
    """
    Decompõe o grafo em alcances maximais, partes exclusivas e parte comum.

    Args:
        g: Digraph

    Returns:
        ReachDecomposition com alcances ordenados pelo menor nó exclusivo
    """
    G = g.to_networkx()
    alcancaveis = {frozenset(nx.descendants(G, v)) | {v} for v in range(g.n)}

    # Mantém apenas os conjuntos maximais (teste par a par de inclusão estrita)
    maximais = [R for R in alcancaveis if not any(R < S for S in alcancaveis)]

    exclusivas = []
    for R in maximais:
        outros = frozenset().union(*(S for S in maximais if S is not R))
        exclusivas.append(R - outros)

    # Ordem determinística: pelo menor rótulo da parte exclusiva
    ordem = sorted(range(len(maximais)), key=lambda i: min(exclusivas[i]))
    reaches = tuple(maximais[i] for i in ordem)
    exclusive_parts = tuple(exclusivas[i] for i in ordem)
    common = frozenset(range(g.n)) - frozenset().union(*exclusive_parts)

    logger.debug("Decomposição: mu=%d, h=%s, c=%d", len(reaches),
                 [len(p) for p in exclusive_parts], len(common))

    return ReachDecomposition(reaches, exclusive_parts, common)


def _check_same_order(g1, g2):
    if g1.n != g2.n:
        raise ValueError(f"Número de nós diferente: {g1.n} != {g2.n}")


def union_graph(g1, g2):
    """Grafo união (mesmos nós, união das arestas)."""
    _check_same_order(g1, g2)
    return Digraph(g1.n, g1.edges | g2.edges)


def intersection_graph(g1, g2):
    """Grafo interseção (mesmos nós, interseção das arestas)."""
    _check_same_order(g1, g2)
    return Digraph(g1.n, g1.edges & g2.edges)


def ordering_from_decomposition(decomposition):
    """Permutação H_1, ..., H_mu, C com cada bloco em ordem crescente de rótulo."""
    ordem = []
    for parte in decomposition.exclusive_parts:
        ordem.extend(sorted(parte))
    ordem.extend(sorted(decomposition.common))
    return ordem


def canonical_ordering(g):
    """
    Ordenação canônica que coloca a Laplaciana na forma triangular em blocos.

    Returns:
        lista com a permutação dos nós
    """
    return ordering_from_decomposition(decompose(g))

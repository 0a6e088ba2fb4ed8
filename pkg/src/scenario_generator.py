#!/usr/bin/env python3
"""
Gerador de cenários sintéticos para o toolkit de consenso híbrido.
Gera pares de grafos (fluxo, salto) semeados em quatro famílias:
random, nested, disjoint e balanced.
"""
import argparse
import json
import os

import numpy as np

from graph_core import Digraph, format_edge_list

FAMILIES = ("random", "nested", "disjoint", "balanced")

# Parâmetros padrão de geração
GENERATOR_PARAMS = {
    "n_min": 2,
    "n_max": 10,
    "edge_prob": 0.3,
    "keep_prob": 0.5,
    "max_roots": 3,
}


def random_edges(n, p, rng):
    """
    Sorteia arestas (u, v), u != v, cada uma com probabilidade p.

    Args:
        n: Número de nós
        p: Probabilidade de cada aresta
        rng: np.random.Generator

    Returns:
        set de arestas
    """
    sorteio = rng.random((n, n)) < p
    np.fill_diagonal(sorteio, False)
    return {(int(u), int(v)) for u, v in zip(*np.nonzero(sorteio))}


def random_digraph(n, p, seed):
    """Grafo de Erdős–Rényi direcionado com n nós e probabilidade p."""
    return Digraph(n, frozenset(random_edges(n, p, np.random.default_rng(seed))))


def _balanced_pair(n, p, rng, max_roots):
    """
    Grupos raiz com arestas simétricas nos dois grafos e nós a jusante que
    só recebem de nós de índice menor.

    Cada grupo raiz é fortemente conexo na união e balanceado em cada grafo,
    então os valores de consenso dos alcances não dependem dos saltos.
    """
    raizes = int(rng.integers(1, min(max_roots, n) + 1))
    cortes = np.sort(rng.choice(np.arange(1, n), size=raizes - 1, replace=False)) if raizes > 1 else []
    fronteiras = [0] + [int(c) for c in cortes] + [n]

    # Cada grupo raiz ocupa um prefixo da sua faixa; o resto fica a jusante
    grupos = []
    for a, b in zip(fronteiras[:-1], fronteiras[1:]):
        tamanho = int(rng.integers(1, b - a + 1))
        grupos.append(list(range(a, a + tamanho)))
    raiz = {v for grupo in grupos for v in grupo}

    fluxo, salto = set(), set()
    for grupo in grupos:
        # Caminho bidirecional garante conexão forte; cada par vai a um dos grafos (ou a ambos)
        for u, v in zip(grupo[:-1], grupo[1:]):
            destino = rng.integers(3)
            if destino in (0, 2):
                fluxo.update({(u, v), (v, u)})
            if destino in (1, 2):
                salto.update({(u, v), (v, u)})
        for i, u in enumerate(grupo):
            for v in grupo[i + 2:]:
                if rng.random() < p:
                    fluxo.update({(u, v), (v, u)})
                if rng.random() < p:
                    salto.update({(u, v), (v, u)})

    for v in range(n):
        if v in raiz:
            continue
        anteriores = list(range(v))
        # Pelo menos uma aresta de entrada para não virar raiz isolada
        obrigatoria = int(rng.choice(anteriores))
        (fluxo if rng.random() < 0.5 else salto).add((obrigatoria, v))
        for u in anteriores:
            if rng.random() < p:
                fluxo.add((u, v))
            if rng.random() < p:
                salto.add((u, v))

    return fluxo, salto


def random_pair(n, family="random", seed=0, p=None, keep_prob=None, max_roots=None):
    """
    Gera um par (fluxo, salto) semeado.

    Famílias:
        random: arestas independentes nos dois grafos
        nested: E_j contido em E_f
        disjoint: E_f e E_j disjuntos
        balanced: raízes balanceadas nos dois grafos

    Returns:
        tuple (Digraph, Digraph)
    """
    if family not in FAMILIES:
        raise ValueError(f"Família '{family}' não suportada (use {', '.join(FAMILIES)})")
    if n < 1:
        raise ValueError(f"Número de nós inválido: {n}")

    p = GENERATOR_PARAMS["edge_prob"] if p is None else p
    keep_prob = GENERATOR_PARAMS["keep_prob"] if keep_prob is None else keep_prob
    max_roots = GENERATOR_PARAMS["max_roots"] if max_roots is None else max_roots
    rng = np.random.default_rng(seed)

    if family == "random":
        fluxo, salto = random_edges(n, p, rng), random_edges(n, p, rng)
    elif family == "nested":
        fluxo = random_edges(n, p, rng)
        salto = {e for e in sorted(fluxo) if rng.random() < keep_prob}
    elif family == "disjoint":
        todas = sorted(random_edges(n, min(1.0, 2 * p), rng))
        lados = rng.random(len(todas)) < 0.5
        fluxo = {e for e, lado in zip(todas, lados) if lado}
        salto = {e for e, lado in zip(todas, lados) if not lado}
    elif n == 1:
        fluxo, salto = set(), set()
    else:
        fluxo, salto = _balanced_pair(n, p, rng, max_roots)

    return Digraph(n, frozenset(fluxo)), Digraph(n, frozenset(salto))


def generate_scenarios(family, count, seed, n_min=None, n_max=None, p=None, keep_prob=None, max_roots=None):
    """
    Gera uma sequência de pares com tamanhos sorteados em [n_min, n_max].
    keep_prob e max_roots seguem para random_pair (famílias nested e balanced).

    Returns:
        Lista de dicts com seed, n, fluxo e salto
    """
    n_min = GENERATOR_PARAMS["n_min"] if n_min is None else n_min
    n_max = GENERATOR_PARAMS["n_max"] if n_max is None else n_max
    rng = np.random.default_rng(seed)

    cenarios = []
    for _ in range(count):
        semente = int(rng.integers(2 ** 31))
        n = int(rng.integers(n_min, n_max + 1))
        g_f, g_j = random_pair(n, family, semente, p, keep_prob, max_roots)
        cenarios.append({"seed": semente, "n": n, "flow": g_f, "jump": g_j})
    return cenarios


def save_pair(g_f, g_j, output_dir, name, header=None):
    """Salva o par como <name>_fluxo.txt e <name>_salto.txt."""
    os.makedirs(output_dir, exist_ok=True)
    caminhos = []
    for sufixo, g in (("fluxo", g_f), ("salto", g_j)):
        caminho = os.path.join(output_dir, f"{name}_{sufixo}.txt")
        with open(caminho, "w", encoding="utf-8") as f:
            f.write(format_edge_list(g, header))
        caminhos.append(caminho)
    return tuple(caminhos)


def load_generator_params(config_file=None):
    params = dict(GENERATOR_PARAMS)
    if config_file and os.path.exists(config_file):
        with open(config_file, "r", encoding="utf-8") as f:
            params.update(json.load(f))
    return params


def main(argv=None):
    """Função principal"""
    parser = argparse.ArgumentParser(description="Gerador de pares de grafos (fluxo, salto) sintéticos.")
    parser.add_argument("--family", "-f", choices=list(FAMILIES) + ["all"], default="all",
                        help="Família a gerar (padrão: all)")
    parser.add_argument("--count", "-n", type=int, default=10, help="Pares por família (padrão: 10)")
    parser.add_argument("--seed", "-s", type=int, default=0, help="Semente (padrão: 0)")
    parser.add_argument("--output-dir", "-o", default="cenarios", help="Diretório de saída (padrão: cenarios)")
    parser.add_argument("--config", type=str, help="Arquivo JSON com parâmetros de geração")

    args = parser.parse_args(argv)
    params = load_generator_params(args.config)
    familias = FAMILIES if args.family == "all" else [args.family]

    for familia in familias:
        print(f"Gerando família: {familia}")
        cenarios = generate_scenarios(familia, args.count, args.seed, params["n_min"], params["n_max"],
                                      params["edge_prob"], params["keep_prob"], params["max_roots"])
        for k, cenario in enumerate(cenarios):
            save_pair(cenario["flow"], cenario["jump"], args.output_dir, f"{familia}_{k:03d}",
                      header=f"familia={familia} seed={cenario['seed']}")
        print(f"{len(cenarios)} pares salvos em: {args.output_dir}")


if __name__ == "__main__":
    main()

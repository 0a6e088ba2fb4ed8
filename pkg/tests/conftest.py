"""Fixtures compartilhadas: grafos dos exemplos e grafos pequenos."""
import os

import pytest

from graph_core import Digraph, parse_edge_list_file

EXAMPLES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "examples")


def example_path(example_id, kind):
    return os.path.join(EXAMPLES_DIR, f"exemplo{example_id}_{kind}.txt")


def load_example(example_id):
    return (parse_edge_list_file(example_path(example_id, "fluxo")),
            parse_edge_list_file(example_path(example_id, "salto")))


@pytest.fixture
def example1():
    return load_example(1)


@pytest.fixture
def example2():
    return load_example(2)


@pytest.fixture
def example3():
    return load_example(3)


@pytest.fixture
def k2():
    return Digraph(2, frozenset({(0, 1), (1, 0)}))


@pytest.fixture
def star():
    """Nó 2 envia para 0 e 1."""
    return Digraph(3, frozenset({(2, 0), (2, 1)}))


@pytest.fixture
def path3():
    return Digraph(3, frozenset({(0, 1), (1, 2)}))


@pytest.fixture
def cycle4():
    return Digraph(4, frozenset({(0, 1), (1, 2), (2, 3), (3, 0)}))


@pytest.fixture
def example_files():
    """Função (id) -> (caminho do fluxo, caminho do salto)."""
    return lambda example_id: (example_path(example_id, "fluxo"), example_path(example_id, "salto"))


@pytest.fixture
def examples():
    """Função (id) -> (g_f, g_j)."""
    return load_example

import numpy as np
import pytest

from gain import (alpha_convergence_bound, alpha_star, convergence_horizon, distance_to_consensus,
                  gershgorin_discs, lyapunov_certificate, lyapunov_value, monodromy)
from graph_core import Digraph
from hybrid_sim import periodic_domain, simulate
from partitions import Partition, characteristic_matrix, joint_coarsest_aep
from scenario_generator import random_pair
from spectral import expm, laplacian


def test_gain_bounds_k2(k2):
    limites = alpha_convergence_bound(laplacian(k2))
    # Autovalores 0 e 2
    assert limites.alpha_star == pytest.approx(1.0)
    assert limites.real_part_bound == pytest.approx(0.5)
    assert limites.degree_bound == pytest.approx(1.0)
    assert limites.alpha_conv == pytest.approx(0.5)
    assert limites.admissible(0.4) and not limites.admissible(0.5)


def test_gain_bounds_edgeless_jump_graph():
    limites = alpha_convergence_bound(laplacian(Digraph(3)))
    assert np.isinf(limites.alpha_conv)
    assert limites.auto_alpha() == 1.0
    assert np.isinf(alpha_star(laplacian(Digraph(3))))


def test_gain_bounds_examples(examples):
    _, g_j2 = examples(2)
    assert alpha_convergence_bound(laplacian(g_j2)).alpha_conv == pytest.approx((3 - np.sqrt(5)) / 2)
    _, g_j3 = examples(3)
    limites = alpha_convergence_bound(laplacian(g_j3))
    assert limites.alpha_star == pytest.approx(0.5)
    assert limites.degree_bound == pytest.approx(1 / 3)
    assert limites.alpha_conv == pytest.approx(0.25)
    _, g_j1 = examples(1)
    limites = alpha_convergence_bound(laplacian(g_j1))
    assert 0.2 < limites.alpha_conv <= 0.5


def test_monodromy_k2_jump_only(k2):
    analise = monodromy(laplacian(Digraph(2)), laplacian(k2), 0.25, 1.0)
    np.testing.assert_allclose(analise.H, [[0.75, 0.25], [0.25, 0.75]])
    assert analise.is_row_stochastic and analise.is_nonnegative and analise.has_positive_diagonal
    assert analise.unit_eigenvalue_count == 1
    assert analise.second_modulus == pytest.approx(0.5)
    assert analise.contracts


def test_monodromy_example2(example2):
    g_f, g_j = example2
    analise = monodromy(laplacian(g_f), laplacian(g_j), 0.2, 0.5)
    assert analise.is_row_stochastic and analise.is_nonnegative
    assert analise.flow_factor_stochastic and analise.jump_factor_stochastic
    assert analise.unit_eigenvalue_count == 2
    assert analise.contracts


def test_monodromy_large_gain_is_not_nonnegative(k2):
    analise = monodromy(laplacian(Digraph(2)), laplacian(k2), 2.0, 1.0)
    assert analise.is_row_stochastic
    assert not analise.is_nonnegative
    assert not analise.contracts


def test_monodromy_rejects_bad_arguments(k2):
    with pytest.raises(ValueError):
        monodromy(laplacian(k2), laplacian(k2), 0.0, 1.0)
    with pytest.raises(ValueError):
        monodromy(laplacian(k2), laplacian(k2), 0.1, -1.0)


def test_gershgorin_discs():
    discos = gershgorin_discs([[0.75, 0.25], [0.5, 0.5]])
    assert discos[0] == pytest.approx((0.75, 0.25))
    assert discos[1] == pytest.approx((0.5, 0.5))


def test_convergence_horizon(k2):
    horizonte = convergence_horizon(laplacian(Digraph(2)), laplacian(k2), 0.25, 1.0, target=1e-3)
    # 0.5^10 < 1e-3 <= 0.5^9
    assert horizonte == pytest.approx(10.0)
    assert np.isinf(convergence_horizon(laplacian(Digraph(2)), laplacian(k2), 1.0, 1.0))


@pytest.mark.parametrize("example_id", [1, 2, 3])
def test_lyapunov_certificate(examples, example_id):
    g_f, g_j = examples(example_id)
    L_f, L_j = laplacian(g_f), laplacian(g_j)
    pi = joint_coarsest_aep(g_f, g_j)
    cert = lyapunov_certificate(L_f, L_j, 0.2, 0.5, pi)

    np.testing.assert_allclose(cert.T.T @ cert.T, np.eye(7), atol=1e-12)
    assert cert.consensus_dim == pi.r
    H22 = cert.H_tilde[pi.r:, pi.r:]
    assert np.all(np.linalg.eigvalsh(cert.P22) > 0)
    assert np.linalg.eigvalsh(H22.T @ cert.P22 @ H22 - cert.P22).max() <= -cert.kappa + 1e-8
    assert 0 < cert.beta <= cert.beta_max

    # Vetores do subespaço de consenso estão a distância zero
    P = characteristic_matrix(pi, 7).astype(float)
    assert distance_to_consensus(cert, P @ np.arange(1, pi.r + 1)) == pytest.approx(0.0, abs=1e-12)


def test_lyapunov_value_decreases_along_periodic_run(example1):
    g_f, g_j = example1
    L_f, L_j = laplacian(g_f), laplacian(g_j)
    tau = 0.5
    cert = lyapunov_certificate(L_f, L_j, 0.2, tau, Partition.trivial(7))
    trajetoria = simulate(L_f, L_j, 0.2, periodic_domain(tau, 10.0), np.arange(1.0, 8.0), sample_dt=tau)

    # Amostras logo após cada salto (relógio de fluxo s = 0)
    inicio = [k for k in range(len(trajetoria)) if k == 0 or trajetoria.j[k] != trajetoria.j[k - 1]]
    valores = [lyapunov_value(cert, trajetoria.x[k], 0.0) for k in inicio]
    assert valores[0] > 0
    for anterior, seguinte in zip(valores[:-1], valores[1:]):
        assert seguinte <= np.exp(-cert.beta * tau) * anterior + 1e-12


def test_lyapunov_value_decays_during_flow(example1):
    g_f, g_j = example1
    cert = lyapunov_certificate(laplacian(g_f), laplacian(g_j), 0.2, 1.0, Partition.trivial(7))
    x = np.arange(1.0, 8.0)
    valores = [lyapunov_value(cert, expm(-laplacian(g_f) * s) @ x, s) for s in (0.0, 0.25, 0.5, 1.0)]
    assert all(b < a for a, b in zip(valores[:-1], valores[1:]))


def test_certificate_with_singleton_partition_on_k2(k2):
    # Partição em singletons: subespaço de consenso é todo o espaço
    cert = lyapunov_certificate(laplacian(Digraph(2)), laplacian(k2), 0.25, 1.0, Partition.singletons(2))
    assert cert.P22.shape == (0, 0)
    assert np.isinf(cert.beta_max) and cert.beta == pytest.approx(1.0)
    assert lyapunov_value(cert, np.array([1.0, 2.0]), 0.3) == 0.0


def test_degree_bound_binds_below_real_part_bound():
    # Partes reais {0.245, 1.877} abaixo do grau de entrada máximo 2 (nó 0)
    g = Digraph(4, frozenset({(1, 0), (3, 0), (2, 1), (0, 2)}))
    limites = alpha_convergence_bound(laplacian(g))
    assert limites.degree_bound == pytest.approx(0.5)
    assert limites.real_part_bound == pytest.approx(0.5326, abs=1e-3)
    assert limites.alpha_star > limites.real_part_bound
    assert limites.alpha_conv == pytest.approx(0.5)

    # Ganho admissível só pelas partes reais: diagonal negativa em I - alpha L_j
    analise = monodromy(laplacian(Digraph(4)), laplacian(g), 0.52, 1.0)
    assert not analise.has_positive_diagonal
    assert not analise.is_nonnegative


def test_monodromy_k2_both_graphs(k2):
    L = laplacian(k2)
    analise = monodromy(L, L, 0.4, 1.0)
    assert analise.is_row_stochastic and analise.is_nonnegative
    np.testing.assert_allclose(np.sort(analise.eigenvalues.real), [0.2 * np.exp(-2.0), 1.0], atol=1e-12)


def test_certificate_k2_both_graphs(k2):
    L = laplacian(k2)
    cert = lyapunov_certificate(L, L, 0.4, 1.0, Partition.trivial(2))
    h = 0.2 * np.exp(-2.0)
    assert cert.consensus_dim == 1
    assert cert.H_tilde[1, 1] == pytest.approx(h, abs=1e-12)
    assert cert.P22.shape == (1, 1)
    assert cert.P22[0, 0] == pytest.approx(1.0 / (1.0 - h ** 2))
    assert cert.kappa == 1.0


@pytest.mark.parametrize("seed", range(20))
def test_spectrum_lies_in_gershgorin_discs(seed):
    g_f, g_j = random_pair(2 + seed % 7, "random", seed)
    L_f, L_j = laplacian(g_f), laplacian(g_j)
    analise = monodromy(L_f, L_j, alpha_convergence_bound(L_j).auto_alpha(), 0.1 + 0.5 * (seed % 4))

    assert analise.spectrum_in_discs
    discos = gershgorin_discs(analise.H)
    np.testing.assert_allclose(np.array(analise.gershgorin_discs), np.array(discos))
    for autovalor in analise.eigenvalues:
        assert min(abs(autovalor - centro) - raio for centro, raio in discos) <= 1e-9
    # H estocástica não negativa: disco i é centrado em H_ii com raio 1 - H_ii
    for centro, raio in discos:
        assert raio == pytest.approx(1.0 - centro, abs=1e-12)

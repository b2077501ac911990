"""
Tests para la extracción espectral, la partición de Perron y la cota
de concentración.
"""
import itertools
import math
from unittest.mock import patch

import networkx as nx
import numpy as np
import pytest

from apps.partitions.services import spectral
from apps.partitions.services.generators import GenConfig, GeneratorError, PlantedSpec, draw_planted_spec, sample_graph
from apps.partitions.services.graphs import Graph, Partition, indicator_matrix, quotient, refines
from apps.partitions.services.refinement import span_membership, wl_refine
from apps.partitions.services.signals import SignalModel, exact_covariance
from apps.partitions.services.spectral import (
    BoundParams,
    SpectralError,
    effective_rank,
    eigengap_delta,
    f_cost,
    kmeans,
    perron_partition,
    spectral_extract,
    structural_eigvec_indices,
    structural_eigvecs,
    symmetric_eig,
    theorem1_rhs,
    top_k_eigvecs,
)


@pytest.fixture
def planted_graph():
    """Grafo de 18 nodos con tres clases plantadas que no colapsan"""
    spec = PlantedSpec((6, 6, 6), np.array([[2, 1, 0], [1, 0, 3], [0, 3, 1]]))
    return sample_graph(spec, GenConfig(), seed=12)


def planted_graphs(count, seed=0):
    """Grafos plantados de tres clases con autovalor dominante simple"""
    graphs = []
    for index in range(10 * count):
        try:
            spec, _ = draw_planted_spec(3, 3, (6, 6, 6), seed=seed + index)
            g, _ = sample_graph(spec, GenConfig(), seed=seed + index)
        except GeneratorError:
            continue
        values = symmetric_eig(g.adjacency).eigenvalues
        if values[0] - values[1] > 1e-10:
            graphs.append(g)
        if len(graphs) == count:
            break
    return graphs


def bound(**overrides):
    values = dict(sigma_norm=2.0, r=3.0, n=300, s=300, k=6, delta=0.5, K=1.0, theta=1.0, c=0.05)
    values.update(overrides)
    return BoundParams(**values)


class TestSymmetricEig:
    """Tests para la autodescomposición simétrica"""

    def test_identity(self):
        d = symmetric_eig(np.eye(3))
        assert np.allclose(d.eigenvalues, [1, 1, 1])

    def test_two_by_two(self):
        d = symmetric_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(d.eigenvalues, [1, -1])
        assert np.allclose(d.eigenvectors[:, 0], [2 ** -0.5, 2 ** -0.5])
        assert np.allclose(d.eigenvectors[:, 1], [2 ** -0.5, -(2 ** -0.5)])

    def test_perron_eigenvector(self, perron_graph):
        d = symmetric_eig(perron_graph.adjacency)
        assert d.eigenvalues[0] == pytest.approx(8.0)
        perron = d.eigenvectors[:, 0]
        assert np.allclose(perron / perron[0], [1, 1, 1, 1, 2, 2])

    def test_descending_and_orthonormal(self, perron_graph):
        d = symmetric_eig(perron_graph.adjacency)
        assert np.all(np.diff(d.eigenvalues) <= 0)
        assert np.allclose(d.eigenvectors.T @ d.eigenvectors, np.eye(6))

    def test_sign_convention(self, singular_graph):
        """La primera componente significativa de cada autovector es positiva"""
        d = symmetric_eig(singular_graph.adjacency)
        for column in d.eigenvectors.T:
            first = column[np.abs(column) > 1e-12][0]
            assert first > 0

    def test_reconstruction_random_matrices(self):
        """PΓP⊤ reproduce M para matrices simétricas aleatorias de hasta 50 nodos"""
        rng = np.random.default_rng(5)
        for _ in range(50):
            n = int(rng.integers(1, 51))
            X = rng.standard_normal((n, n))
            M = (X + X.T) / 2
            d = symmetric_eig(M)
            rebuilt = d.eigenvectors @ np.diag(d.eigenvalues) @ d.eigenvectors.T
            assert np.max(np.abs(rebuilt - M)) <= 1e-8 * np.linalg.norm(M, 2)

    def test_rejects_non_symmetric(self):
        with pytest.raises(SpectralError):
            symmetric_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestTopKAndCost:
    """Tests para top_k_eigvecs y el coste de k-means"""

    def test_full_basis(self, perron_graph):
        d = symmetric_eig(perron_graph.adjacency)
        assert np.array_equal(top_k_eigvecs(d, 6), d.eigenvectors)

    def test_k_out_of_range(self):
        with pytest.raises(SpectralError):
            top_k_eigvecs(symmetric_eig(np.eye(3)), 4)

    def test_degenerate_gap_warns(self):
        with patch.object(spectral.logger, "warning") as warning:
            top_k_eigvecs(symmetric_eig(np.eye(3)), 1)
        assert "degenerado" in warning.call_args[0][0]

    def test_cost_single_class(self):
        assert f_cost(Partition.uniform(2), np.array([[0.0], [1.0]])) == pytest.approx(0.5)

    def test_cost_singletons(self):
        V = np.random.default_rng(0).standard_normal((5, 3))
        assert f_cost(Partition.singletons(5), V) == pytest.approx(0.0)

    def test_cost_block_constant(self):
        p = Partition(np.array([0, 1, 0, 1]))
        V = indicator_matrix(p) @ np.array([[1.0, 2.0], [-3.0, 0.5]])
        assert f_cost(p, V) == pytest.approx(0.0)

    def test_cost_zero_iff_block_constant(self):
        """Coste nulo en matrices constantes por bloques; una perturbación lo hace positivo"""
        rng = np.random.default_rng(8)
        for _ in range(20):
            p = Partition(rng.integers(0, 4, size=12))
            H = indicator_matrix(p)
            V = H @ rng.standard_normal((p.k, 3))
            assert f_cost(p, V) == pytest.approx(0.0, abs=1e-10)
            assert span_membership(V, H, tol=1e-12)

            members = next(c for c in p.classes() if c.size >= 2)
            perturbed = V.copy()
            perturbed[members[0], int(rng.integers(0, 3))] += 0.1
            assert f_cost(p, perturbed) > 1e-4
            assert not span_membership(perturbed, H, tol=1e-12)


class TestKMeans:
    """Tests para k-means"""

    def test_block_constant_rows(self):
        rows = np.array([[0.0, 1.0], [5.0, 5.0], [0.0, 1.0], [5.0, 5.0], [9.0, 0.0]])
        p = kmeans(rows, 3, restarts=5, seed=0)
        assert p == Partition(np.array([0, 1, 0, 1, 2]))
        assert f_cost(p, rows) == pytest.approx(0.0)

    def test_single_cluster(self):
        rows = np.array([[0.0], [2.0], [4.0]])
        p = kmeans(rows, 1, restarts=1, seed=0)
        assert p.k == 1
        assert f_cost(p, rows) == pytest.approx(8.0)

    def test_singletons(self):
        rows = np.random.default_rng(1).standard_normal((4, 2))
        assert kmeans(rows, 4, restarts=3, seed=0) == Partition.singletons(4)

    def test_separated_data_matches_brute_force(self):
        """Con clases separadas k-means da el óptimo global de la búsqueda exhaustiva"""
        centers = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
        for seed in range(3):
            rng = np.random.default_rng(seed)
            labels = rng.permutation([0, 0, 0, 1, 1, 1, 2, 2, 2])
            rows = centers[labels] + 0.05 * rng.standard_normal((9, 2))

            best, best_cost = None, np.inf
            for tail in itertools.product(range(3), repeat=8):
                candidate = np.array((0,) + tail)
                if len(set(candidate)) != 3:
                    continue
                p = Partition(candidate)
                cost = f_cost(p, rows)
                if cost < best_cost:
                    best, best_cost = p, cost

            assert best == Partition(labels)
            found = kmeans(rows, 3, restarts=10, seed=seed)
            assert found == best
            assert f_cost(found, rows) == pytest.approx(best_cost)

    def test_deterministic(self):
        rows = np.random.default_rng(2).standard_normal((30, 3))
        assert kmeans(rows, 4, restarts=5, seed=9) == kmeans(rows, 4, restarts=5, seed=9)


class TestSpectralExtract:
    """Tests para spectral_extract sobre covarianzas exactas"""

    def test_recovers_planted_partition(self, planted_graph):
        g, planted = planted_graph
        sigma = exact_covariance(SignalModel(graph=g, planted=planted, alpha=0.9))
        assert spectral_extract(sigma, 3, restarts=10, seed=0) == planted

    def test_planted_is_cep(self, planted_graph):
        """La partición plantada es la cEP cuando el cociente no colapsa"""
        g, planted = planted_graph
        assert wl_refine(g, planted) == planted
        assert wl_refine(g) == planted

    def test_structural_columns_block_constant(self, planted_graph):
        g, planted = planted_graph
        sigma = exact_covariance(SignalModel(graph=g, planted=planted, alpha=0.9))
        top = top_k_eigvecs(symmetric_eig(sigma), 3)
        assert span_membership(top, indicator_matrix(planted), tol=1e-8)

    def test_pure_noise_has_k_classes(self):
        assert spectral_extract(np.eye(6), 2, restarts=3, seed=0).k == 2


class TestPerronPartition:
    """Tests para la partición por entradas del vector de Perron"""

    def test_perron_graph_is_coarser_than_cep(self, perron_graph):
        p = perron_partition(perron_graph)
        assert p == Partition.from_classes(6, [[0, 1, 2, 3], [4, 5]])
        assert wl_refine(perron_graph).k == 6

    def test_cycle(self, cycle4):
        assert perron_partition(cycle4).k == 1

    def test_star(self, star4):
        assert perron_partition(star4) == Partition.from_classes(4, [[0], [1, 2, 3]])

    def test_tolerance_chains_consecutive_entries(self):
        """
        P5 tiene vector de Perron ∝ [0.5, 0.866, 1, 0.866, 0.5]. Con tol 0.4
        los saltos 0.366 y 0.134 encadenan todo en una clase aunque 1 − 0.5 > 0.4.
        """
        g = Graph.from_networkx(nx.path_graph(5))
        assert perron_partition(g, tol=0.2) == Partition.from_classes(5, [[0, 4], [1, 2, 3]])
        assert perron_partition(g, tol=0.4).k == 1

    def test_cep_refines_perron_partition(self):
        """En 100 grafos plantados la cEP de WL refina la partición de Perron"""
        graphs = planted_graphs(100)
        assert len(graphs) == 100
        for g in graphs:
            assert refines(wl_refine(g), perron_partition(g))


class TestStructuralEigenvectors:
    """Tests para los autovectores estructurales"""

    def test_planted_graph_has_k_structural(self, planted_graph):
        g, planted = planted_graph
        d = symmetric_eig(g.adjacency)
        indices = structural_eigvec_indices(d, planted)
        assert len(indices) == 3
        V = structural_eigvecs(d, planted)
        assert V.shape == (18, 3)
        assert span_membership(V, indicator_matrix(planted), tol=1e-8)

    def test_singletons_all_structural(self, perron_graph):
        d = symmetric_eig(perron_graph.adjacency)
        assert structural_eigvec_indices(d, Partition.singletons(6)) == list(range(6))

    def test_singular_graph_zero_eigenvalue(self, singular_graph):
        d = symmetric_eig(singular_graph.adjacency)
        indices = structural_eigvec_indices(d, wl_refine(singular_graph))
        assert any(abs(d.eigenvalues[i]) < 1e-10 for i in indices)

    def test_degenerate_eigenspace(self, cycle4):
        """En C4 el autoespacio de 0 es doble y solo la clase única es estructural"""
        d = symmetric_eig(cycle4.adjacency)
        assert structural_eigvec_indices(d, Partition.uniform(4)) == [0]

    def test_quotient_eigenvalues_are_graph_eigenvalues(self, perron_graph, singular_graph):
        """Los autovalores de A^π para la cEP están entre los de A"""
        for g in planted_graphs(20, seed=500) + [perron_graph, singular_graph]:
            cep = wl_refine(g)
            # N^{1/2} A^π N^{-1/2} es simétrica y tiene los mismos autovalores
            root = np.sqrt(cep.class_sizes.astype(float))
            similar = root[:, None] * quotient(g, cep) / root[None, :]
            quotient_values = np.linalg.eigvalsh((similar + similar.T) / 2)
            graph_values = symmetric_eig(g.adjacency).eigenvalues
            scale = max(1.0, float(np.max(np.abs(graph_values))))
            for value in quotient_values:
                assert np.min(np.abs(graph_values - value)) <= 1e-8 * scale


class TestConcentrationQuantities:
    """Tests para el rango efectivo, los huecos y la cota"""

    def test_effective_rank_identity(self):
        assert effective_rank(np.eye(5)) == pytest.approx(5.0)

    def test_effective_rank_projector(self):
        v = np.array([1.0, 2.0, 2.0]) / 3.0
        assert effective_rank(np.outer(v, v)) == pytest.approx(1.0)

    def test_effective_rank_zero_matrix(self):
        with pytest.raises(SpectralError):
            effective_rank(np.zeros((2, 2)))

    def test_effective_rank_bipartite_covariance(self):
        """
        K_{5,5} con sus dos lados como clases y α = 0.7: Σ tiene dos
        autovalores 0.49·25 + 0.09 y ocho iguales a 0.09.
        """
        g = Graph.from_networkx(nx.complete_bipartite_graph(5, 5))
        planted = Partition.from_classes(10, [list(range(5)), list(range(5, 10))])
        r = effective_rank(exact_covariance(SignalModel(graph=g, planted=planted, alpha=0.7)))
        assert r == pytest.approx(25.4 / 12.34)
        assert planted.k < r < g.n

    def test_effective_rank_from_quotient_spectrum(self, planted_graph):
        """r = (α²·Tr(D²) + n(1-α)²) / (α²·ρ(D)² + (1-α)²) con clases iguales"""
        g, planted = planted_graph
        alpha = 0.7
        mu = np.linalg.eigvalsh(quotient(g, planted))
        expected = (alpha ** 2 * np.sum(mu ** 2) + g.n * (1 - alpha) ** 2) / (
            alpha ** 2 * np.max(mu ** 2) + (1 - alpha) ** 2
        )
        r = effective_rank(exact_covariance(SignalModel(graph=g, planted=planted, alpha=alpha)))
        assert r == pytest.approx(expected)
        assert 1 < r < g.n

    def test_bound_doubling_samples(self):
        """Con el término raíz dominante duplicar s divide la cota por √2"""
        small = theorem1_rhs(bound(s=10 ** 8))
        large = theorem1_rhs(bound(s=2 * 10 ** 8))
        assert large / small == pytest.approx(1 / math.sqrt(2), rel=1e-3)

    def test_bound_explodes_with_small_gap(self):
        assert theorem1_rhs(bound(delta=1e-9)) > 1e6 * theorem1_rhs(bound())

    def test_bound_reference_value(self):
        ratio = 3.0 * math.log(300 / 0.05) / 300
        expected = math.sqrt(48) * 2.0 * (math.sqrt(ratio) + ratio) / 0.5
        assert theorem1_rhs(bound()) == pytest.approx(expected)

    def test_bound_params_validation(self):
        with pytest.raises(SpectralError):
            bound(c=1.5)
        with pytest.raises(SpectralError):
            bound(delta=0)

    def test_eigengap(self):
        sigma = np.diag([3.0, 2.0, 1.0])
        sigma_hat = np.diag([3.1, 1.5, 1.2])
        report = eigengap_delta(sigma, sigma_hat, 1)
        assert report.population_gap == pytest.approx(1.0)
        assert report.mixed_gap == pytest.approx(1.5)
        assert report.condition_holds

    def test_eigengap_condition_fails(self):
        report = eigengap_delta(np.diag([2.0, 1.0]), np.diag([2.0, 2.5]), 1)
        assert not report.condition_holds


# ===============================================================================
# TUTORIAL RÁPIDO - Cómo usar estos tests:
# ===============================================================================
#
# 1. EJECUTAR TODOS LOS TESTS:
#    python -m pytest apps/partitions/tests/test_spectral.py -v
#
# 2. SOLO LA PARTICIÓN DE PERRON:
#    python -m pytest apps/partitions/tests/test_spectral.py::TestPerronPartition -v
#
# ===============================================================================

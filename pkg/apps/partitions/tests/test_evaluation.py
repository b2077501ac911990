"""
Tests para el protocolo experimental: métricas, barridos, diagnóstico de
concentración y grafos irregulares.
"""
import csv
import io
import json
import re
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from apps.partitions.services.evaluation import (
    CSV_COLUMNS,
    FLAG_GENERATOR_FAILED,
    EvaluationError,
    ExperimentConfig,
    MetricRow,
    accuracy_trend,
    algorithm_ordering,
    cell_seed,
    concentration_diagnostic,
    fixtures_report,
    graph_accuracy,
    iter_cells,
    node_cost,
    rows_to_csv,
    rows_to_json,
    run_sweep,
    run_trial,
    structural_basis,
    summarize,
)
from apps.partitions.services.generators import GenConfig, PlantedSpec, sample_graph
from apps.partitions.services.graphs import Partition
from apps.partitions.services.signals import FilterSpec, normalized_indicator

GOLDEN_SCHEMA = Path(__file__).parent / 'golden' / 'sweep_schema.csv'


def row(algorithm='spectral', alpha=0.5, s=100, trial=0, accuracy=1, cost=0.0, flags=()):
    return MetricRow(trial, 1, alpha, s, algorithm, accuracy, cost, 1.0, flags)


def without_runtime(rows):
    return [replace(r, runtime_ms=0.0) for r in rows]


class TestMetrics:
    """Tests para la precisión a nivel de grafo y el coste por nodo"""

    def test_relabeled_partition_is_correct(self):
        assert graph_accuracy(Partition(np.array([1, 1, 0])), Partition(np.array([5, 5, 2]))) == 1

    def test_one_misplaced_node_is_failure(self):
        planted = Partition(np.array([0, 0, 0, 1, 1, 1]))
        assert graph_accuracy(Partition(np.array([0, 0, 1, 1, 1, 1])), planted) == 0

    def test_singletons_vs_single_class(self):
        assert graph_accuracy(Partition.singletons(3), Partition.uniform(3)) == 0

    def test_size_mismatch(self):
        with pytest.raises(EvaluationError):
            graph_accuracy(Partition.uniform(2), Partition.uniform(3))

    def test_node_cost_zero_for_planted(self, path4):
        planted = Partition.from_classes(4, [[0, 3], [1, 2]])
        assert node_cost(planted, path4, planted) == pytest.approx(0.0, abs=1e-12)

    def test_node_cost_positive_for_merged_classes(self, path4):
        planted = Partition.from_classes(4, [[0, 3], [1, 2]])
        assert node_cost(Partition.uniform(4), path4, planted) > 0.1

    def test_structural_basis_of_path(self, path4):
        """Los dos autovectores palíndromos de P4 son estructurales"""
        planted = Partition.from_classes(4, [[0, 3], [1, 2]])
        basis = structural_basis(path4, planted, FilterSpec.adjacency())
        assert basis.shape == (4, 2)

    def test_node_cost_value_on_path3(self, path3):
        """
        P3 con clases {0,2},{1}: los autovectores estructurales son
        [1,√2,1]/2 y [1,-√2,1]/2. Juntar {0,1} cuesta (1.5)/2.
        """
        planted = Partition.from_classes(3, [[0, 2], [1]])
        found = Partition.from_classes(3, [[0, 1], [2]])
        assert node_cost(found, path3, planted) == pytest.approx(0.75, abs=1e-12)

    def test_node_cost_random_partition_fixed_seed(self):
        """Coste de una partición aleatoria: F = ‖V‖² − ‖H̃⊤V‖²"""
        spec = PlantedSpec((6, 6, 6), np.array([[2, 1, 0], [1, 0, 3], [0, 3, 1]]))
        g, planted = sample_graph(spec, GenConfig(), seed=12)
        found = Partition(np.random.default_rng(2024).integers(0, 3, size=18))
        V = structural_basis(g, planted)
        projected = normalized_indicator(found).T @ V
        expected = float(np.sum(V ** 2) - np.sum(projected ** 2))

        cost = node_cost(found, g, planted)
        assert cost == pytest.approx(expected, abs=1e-10)
        assert cost > 0
        assert node_cost(found, g, planted) == cost


class TestExperimentConfig:
    """Tests para la configuración de barridos"""

    def test_requires_equal_class_sizes(self):
        with pytest.raises(EvaluationError):
            ExperimentConfig(n=10, k=3, alpha_grid=(0.5,), s_grid=(100,))

    def test_empty_grid(self):
        with pytest.raises(EvaluationError):
            ExperimentConfig(n=12, k=3, alpha_grid=(), s_grid=(100,))

    def test_unknown_algorithm(self):
        with pytest.raises(EvaluationError):
            ExperimentConfig(n=12, k=3, alpha_grid=(0.5,), s_grid=(100,), algorithms=('wl',))

    def test_from_dict_defaults(self):
        cfg = ExperimentConfig.from_dict({'n': 12, 'k': 3, 'alpha_grid': [0.5], 's_grid': [100, 300]})
        assert cfg.class_sizes == (4, 4, 4)
        assert cfg.cells == 2
        assert cfg.robust.max_components == 3
        assert cfg.filter == FilterSpec.adjacency()

    def test_from_dict_missing_key(self):
        with pytest.raises(EvaluationError):
            ExperimentConfig.from_dict({'n': 12, 'k': 3})

    def test_dict_round_trip(self, small_config):
        assert ExperimentConfig.from_dict(small_config.to_dict()) == small_config


class TestSeeds:
    """Tests para la derivación de semillas por celda"""

    def test_deterministic(self):
        assert cell_seed(7, 1, 2, 3) == cell_seed(7, 1, 2, 3)

    def test_distinct_cells(self):
        seeds = {cell_seed(7, a, s, t) for a in range(3) for s in range(3) for t in range(3)}
        assert len(seeds) == 27

    def test_independent_of_grid_size(self, small_config):
        """Añadir valores a la rejilla no cambia las semillas existentes"""
        bigger = replace(small_config, s_grid=small_config.s_grid + (3200,), trials=2)
        original = {(a, s, t): seed for a, _, s, _, t, seed in iter_cells(small_config)}
        extended = {(a, s, t): seed for a, _, s, _, t, seed in iter_cells(bigger)}
        for key, seed in original.items():
            assert extended[key] == seed


class TestRunTrial:
    """Tests para una celda del barrido"""

    def test_one_row_per_algorithm(self, small_config):
        rows = run_trial(small_config, 0.5, 200, 0, seed=123)
        assert [r.algorithm for r in rows] == ['spectral', 'robust_blind_wl']
        for r in rows:
            assert r.seed == 123
            assert r.accuracy in (0, 1)
            assert r.node_cost >= 0
            assert r.runtime_ms >= 0

    def test_reproducible(self, small_config):
        first = run_trial(small_config, 0.5, 200, 0, seed=99)
        second = run_trial(small_config, 0.5, 200, 0, seed=99)
        assert without_runtime(first) == without_runtime(second)

    def test_selected_algorithms_only(self, small_config):
        cfg = replace(small_config, algorithms=('spectral',))
        assert [r.algorithm for r in run_trial(cfg, 0.5, 200, 0, seed=1)] == ['spectral']

    def test_incompatible_filter_is_flagged(self, small_config):
        cfg = replace(small_config, filter=FilterSpec.identity(), algorithms=('spectral',))
        rows = run_trial(cfg, 0.5, 200, 0, seed=5)
        assert 'filter_incompatible' in rows[0].flags


class TestRunSweep:
    """Tests para el barrido completo"""

    def test_rows_and_progress(self, small_config):
        calls = []
        rows = run_sweep(small_config, progress=lambda done, total: calls.append((done, total)))
        assert len(rows) == 8
        assert calls == [(1, 4), (2, 4), (3, 4), (4, 4)]
        assert rows == sorted(rows, key=lambda r: r.sort_key)

    def test_cell_reproducible_in_isolation(self, small_config):
        """Cualquier fila se puede repetir con su semilla registrada"""
        rows = run_sweep(small_config)
        target = rows[-1]
        again = run_trial(small_config, target.alpha, target.s, target.trial, target.seed)
        match = [r for r in again if r.algorithm == target.algorithm][0]
        assert replace(match, runtime_ms=0.0) == replace(target, runtime_ms=0.0)


class TestOutputs:
    """Tests para CSV, JSON y resúmenes"""

    def test_csv_header_and_order(self):
        rows = [row(alpha=1.0), row(alpha=0.5, s=300), row(alpha=0.5, s=100)]
        parsed = list(csv.reader(io.StringIO(rows_to_csv(rows))))
        assert parsed[0] == CSV_COLUMNS
        assert [(line[2], line[3]) for line in parsed[1:]] == [('0.5', '100'), ('0.5', '300'), ('1.0', '100')]

    def test_csv_matches_golden_schema(self, small_config):
        """Columnas, orden y tipos fijos en un barrido con dos trials"""
        text = rows_to_csv(run_sweep(replace(small_config, trials=2)))
        assert text.splitlines()[0] == 'trial,seed,alpha,s,algorithm,accuracy,node_cost,runtime_ms,flags'

        parsed = list(csv.DictReader(io.StringIO(text)))
        projected = ['trial,alpha,s,algorithm'] + [
            f"{r['trial']},{r['alpha']},{r['s']},{r['algorithm']}" for r in parsed
        ]
        assert projected == GOLDEN_SCHEMA.read_text().splitlines()
        for r in parsed:
            assert int(r['seed']) >= 0
            assert r['accuracy'] in ('0', '1')
            assert np.isfinite(float(r['node_cost'])) and float(r['node_cost']) >= 0
            assert re.fullmatch(r'\d+\.\d{3}', r['runtime_ms'])

    def test_csv_formats(self):
        text = rows_to_csv([row(cost=0.1, flags=('rejected_draws=2', 'filter_incompatible'))])
        line = text.splitlines()[1]
        assert line == "0,1,0.5,100,spectral,1,0.10000000000000001,1.000,rejected_draws=2;filter_incompatible"

    def test_json_has_rows_and_summary(self):
        payload = json.loads(rows_to_json([row(), row(accuracy=0, trial=1)]))
        assert len(payload['rows']) == 2
        assert payload['summary'][0]['mean_accuracy'] == 0.5

    def test_summary_excludes_failed_draws(self):
        rows = [row(), row(trial=1, accuracy=0, flags=(FLAG_GENERATOR_FAILED,))]
        summary = summarize(rows)
        assert summary == [{
            'algorithm': 'spectral', 'alpha': 0.5, 's': 100, 'trials': 1,
            'mean_accuracy': 1.0, 'median_node_cost': 0.0,
        }]

    def test_accuracy_trend_increasing(self):
        rows = [row(s=100, accuracy=0), row(s=300, accuracy=0), row(s=300, trial=1), row(s=1000)]
        assert accuracy_trend(rows, 'spectral', 0.5) == pytest.approx(1.0)

    def test_accuracy_trend_constant(self):
        rows = [row(s=100), row(s=300)]
        assert accuracy_trend(rows, 'spectral', 0.5) == 1.0

    def test_accuracy_trend_never_recovers(self):
        """Precisión nula en todos los s: no hay tendencia que medir"""
        rows = [row(s=100, accuracy=0), row(s=300, accuracy=0), row(s=1000, accuracy=0)]
        assert np.isnan(accuracy_trend(rows, 'spectral', 0.5))

    def test_algorithm_ordering_holds(self):
        rows = [
            row('spectral', s=100, accuracy=0), row('robust_blind_wl', s=100, accuracy=1),
            row('spectral', s=300, accuracy=1), row('robust_blind_wl', s=300, accuracy=0),
        ]
        assert algorithm_ordering(rows) is True

    def test_algorithm_ordering_violated(self):
        """Solo cuenta el s más pequeño"""
        rows = [
            row('spectral', s=100, accuracy=1), row('robust_blind_wl', s=100, accuracy=0),
            row('spectral', s=300, accuracy=0), row('robust_blind_wl', s=300, accuracy=1),
        ]
        assert algorithm_ordering(rows) is False

    def test_algorithm_ordering_needs_both_algorithms(self):
        assert algorithm_ordering([row(s=100), row(s=300)]) is None
        assert algorithm_ordering([]) is None

    def test_json_records_algorithm_ordering(self):
        rows = [row('spectral', accuracy=0), row('robust_blind_wl', accuracy=1)]
        payload = json.loads(rows_to_json(rows))
        assert payload['robust_not_worse_at_smallest_s'] is True

    def test_accuracy_trend_needs_two_points(self):
        with pytest.raises(EvaluationError):
            accuracy_trend([row()], 'spectral', 0.5)


class TestConcentrationDiagnostic:
    """Tests para el decaimiento del error de la covarianza muestral"""

    def test_requires_two_decades(self, small_config):
        with pytest.raises(EvaluationError):
            concentration_diagnostic(replace(small_config, s_grid=(100, 1000)))
        with pytest.raises(EvaluationError):
            concentration_diagnostic(replace(small_config, s_grid=(100, 300, 1000)))

    def test_slope_close_to_square_root(self, small_config):
        cfg = replace(small_config, s_grid=(50, 500, 5000), trials=3)
        report = concentration_diagnostic(cfg, alpha=0.7)
        assert report.alpha == 0.7
        assert report.s_values == (50, 500, 5000)
        assert report.median_errors[0] > report.median_errors[-1]
        assert -0.8 < report.slope < -0.2
        assert 'effective_rank' in report.to_dict()

    def test_bound_shape_per_sample_size(self, small_config):
        """La cota decrece con s; sin hueco poblacional no está definida"""
        cfg = replace(small_config, s_grid=(50, 500, 5000), trials=1)
        report = concentration_diagnostic(cfg, alpha=0.7)
        rhs = np.array(report.bound_rhs)
        assert rhs.shape == (3,)
        if report.population_gap > 0:
            assert np.all(np.diff(rhs) < 0)
        else:
            assert np.all(np.isnan(rhs))


class TestFixtures:
    """Tests para los grafos irregulares"""

    def test_report_passes(self):
        report = fixtures_report()
        assert report.ok
        assert len(report.checks) == 8
        assert all(line.startswith('[OK]') for line in report.lines())

    def test_failed_check_is_reported(self):
        report = fixtures_report()
        report.add('forzado', False, 'detalle')
        assert not report.ok
        assert report.lines()[-1] == '[FALLO] forzado: detalle'


# ===============================================================================
# TUTORIAL RÁPIDO - Cómo usar estos tests:
# ===============================================================================
#
# 1. EJECUTAR TODOS LOS TESTS:
#    python -m pytest apps/partitions/tests/test_evaluation.py -v
#
# 2. SOLO LOS BARRIDOS:
#    python -m pytest apps/partitions/tests/test_evaluation.py -k "Sweep or Trial" -v
#
# ===============================================================================

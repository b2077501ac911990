"""
Protocolo experimental: métricas, barridos en α y s, diagnóstico de
concentración de la covarianza muestral y casos de prueba irregulares.
"""
import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import spearmanr

from ..conf import equipart_setting
from ..exceptions import EquipartError
from .generators import GenConfig, GeneratorError, draw_planted_spec, sample_graph
from .graphs import Graph, Partition, brute_force_cep, indicator_matrix, is_equitable, partitions_equal
from .refinement import RobustConfig, covariance_oracle, robust_blind_wl, wl_refine
from .signals import (
    FilterSpec,
    SignalModel,
    check_filter_compatibility,
    exact_covariance,
    filter_matrix,
    generate_samples,
    sample_covariance,
)
from .spectral import (
    BoundParams,
    effective_rank,
    eigengap_delta,
    f_cost,
    perron_partition,
    spectral_extract,
    structural_eigvec_indices,
    structural_eigvecs,
    symmetric_eig,
    theorem1_rhs,
)

logger = logging.getLogger(__name__)

ALGORITHMS = ('spectral', 'robust_blind_wl')
CSV_COLUMNS = ['trial', 'seed', 'alpha', 's', 'algorithm', 'accuracy', 'node_cost', 'runtime_ms', 'flags']
MAX_REDRAWS = 5
BOUND_FAILURE_PROBABILITY = 0.05

FLAG_GENERATOR_FAILED = 'generator_failed'
FLAG_FILTER_INCOMPATIBLE = 'filter_incompatible'
FLAG_NOT_CONVERGED = 'robust_not_converged'


class EvaluationError(EquipartError):
    """Excepción para configuraciones de experimento inválidas"""
    pass


class FixtureMismatchError(EquipartError):
    """Algún caso de prueba irregular no coincide con lo esperado"""
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Parámetros de un barrido experimental"""

    n: int
    k: int
    alpha_grid: Tuple[float, ...]
    s_grid: Tuple[int, ...]
    trials: int = 1
    master_seed: int = 0
    filter: FilterSpec = FilterSpec.adjacency()
    algorithms: Tuple[str, ...] = ALGORITHMS
    kmeans_restarts: int = 10
    robust: RobustConfig = field(default_factory=RobustConfig)
    max_deg: int = 4

    def __post_init__(self):
        if not self.alpha_grid or not self.s_grid:
            raise EvaluationError("Las rejillas de α y s no pueden estar vacías")
        if self.trials < 1:
            raise EvaluationError(f"trials debe ser >= 1: {self.trials}")
        if self.k < 1 or self.n % self.k:
            raise EvaluationError(f"n={self.n} debe ser múltiplo de k={self.k} (clases de igual tamaño)")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise EvaluationError(f"Algoritmos desconocidos: {sorted(unknown)}")

    @property
    def class_sizes(self) -> Tuple[int, ...]:
        return (self.n // self.k,) * self.k

    @property
    def cells(self) -> int:
        return len(self.alpha_grid) * len(self.s_grid) * self.trials

    @classmethod
    def from_dict(cls, data: Dict) -> 'ExperimentConfig':
        try:
            return cls._from_dict(data)
        except (KeyError, TypeError, ValueError) as e:
            raise EvaluationError(f"Configuración de experimento inválida: {str(e)}")

    @classmethod
    def _from_dict(cls, data: Dict) -> 'ExperimentConfig':
        robust = data.get('robust') or {}
        return cls(
            n=int(data['n']),
            k=int(data['k']),
            alpha_grid=tuple(float(a) for a in data['alpha_grid']),
            s_grid=tuple(int(s) for s in data['s_grid']),
            trials=int(data.get('trials', 1)),
            master_seed=int(data.get('master_seed', 0)),
            filter=FilterSpec(tuple(data.get('filter', (0.0, 1.0)))),
            algorithms=tuple(data.get('algorithms', ALGORITHMS)),
            kmeans_restarts=int(data.get('kmeans_restarts', equipart_setting('KMEANS_RESTARTS'))),
            robust=RobustConfig.from_settings(
                max_components=robust.get('max_components', int(data['k'])),
                covariance_regularizer=robust.get('covariance_regularizer'),
                em_restarts=robust.get('em_restarts'),
                component_selection=robust.get('component_selection'),
            ),
            max_deg=int(data.get('max_deg', 4)),
        )

    def to_dict(self) -> Dict:
        return {
            'n': self.n,
            'k': self.k,
            'alpha_grid': list(self.alpha_grid),
            's_grid': list(self.s_grid),
            'trials': self.trials,
            'master_seed': self.master_seed,
            'filter': list(self.filter.coefficients),
            'algorithms': list(self.algorithms),
            'kmeans_restarts': self.kmeans_restarts,
            'robust': asdict(self.robust),
            'max_deg': self.max_deg,
        }


@dataclass(frozen=True)
class MetricRow:
    """Resultado de un algoritmo en una celda (α, s, trial)"""

    trial: int
    seed: int
    alpha: float
    s: int
    algorithm: str
    accuracy: int
    node_cost: float
    runtime_ms: float
    flags: Tuple[str, ...] = ()

    @property
    def sort_key(self):
        return (self.alpha, self.s, self.trial, self.algorithm)

    def as_csv_row(self) -> List[str]:
        return [
            str(self.trial),
            str(self.seed),
            repr(self.alpha),
            str(self.s),
            self.algorithm,
            str(self.accuracy),
            format(self.node_cost, '.17g'),
            f"{self.runtime_ms:.3f}",
            ';'.join(self.flags),
        ]


@dataclass(frozen=True)
class ConcentrationReport:
    """Decaimiento de ‖Σ̂ − Σ‖₂ con s y diagnósticos del hueco espectral"""

    alpha: float
    s_values: Tuple[int, ...]
    median_errors: Tuple[float, ...]
    slope: float
    population_gap: float
    median_mixed_gaps: Tuple[float, ...]
    condition_rates: Tuple[float, ...]
    effective_rank: float
    # Lado derecho de la cota por s con Θ = K = 1; solo su forma es comparable
    bound_rhs: Tuple[float, ...]

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class FixtureReport:
    """Comprobaciones de los grafos irregulares y su resultado"""

    checks: List[Tuple[str, bool, str]] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str):
        self.checks.append((name, bool(ok), detail))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def lines(self) -> List[str]:
        return [f"[{'OK' if ok else 'FALLO'}] {name}: {detail}" for name, ok, detail in self.checks]


# Métricas

def graph_accuracy(found: Partition, planted: Partition) -> int:
    """1 si la partición coincide exactamente con la plantada (salvo etiquetas)"""
    if found.n != planted.n:
        raise EvaluationError(f"Particiones de tamaños distintos: {found.n} y {planted.n}")
    return int(partitions_equal(found, planted))


def structural_basis(g: Graph, planted: Partition, f: FilterSpec = None) -> np.ndarray:
    """V_EP: autovectores estructurales de f(A) para la partición plantada"""
    f = f or FilterSpec.adjacency()
    return structural_eigvecs(symmetric_eig(filter_matrix(g.adjacency, f)), planted)


def node_cost(found: Partition, g: Graph, planted: Partition, f: FilterSpec = None) -> float:
    """Coste F(Ĉ, V_EP) de la partición encontrada sobre los autovectores estructurales"""
    return f_cost(found, structural_basis(g, planted, f))


# Barridos

def cell_seed(master_seed: int, alpha_index: int, s_index: int, trial: int) -> int:
    """Semilla de una celda derivada de (α, s, trial) sin depender del resto de la rejilla"""
    sequence = np.random.SeedSequence(master_seed, spawn_key=(alpha_index, s_index, trial))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def _subseed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1, dtype=np.uint32)[0])


def _draw_graph(cfg: ExperimentConfig, seed: int) -> Tuple[Graph, Partition, int, List[str]]:
    """Grafo plantado; los sorteos fallidos se repiten con subsemillas nuevas"""
    rejected = 0
    for attempt in range(MAX_REDRAWS):
        draw_seed = _subseed(seed, 0, attempt)
        try:
            spec, spec_rejections = draw_planted_spec(cfg.k, cfg.max_deg, cfg.class_sizes, seed=draw_seed)
            g, planted = sample_graph(spec, GenConfig.from_settings(), seed=_subseed(draw_seed, 1))
            rejected += spec_rejections
            return g, planted, rejected, []
        except GeneratorError as e:
            rejected += 1
            logger.warning(f"Sorteo de grafo rechazado (intento {attempt + 1}): {str(e)}")
    return None, None, rejected, [FLAG_GENERATOR_FAILED]


def run_trial(cfg: ExperimentConfig, alpha: float, s: int, trial: int, seed: int) -> List[MetricRow]:
    """
    Ejecuta una celda (α, s, trial) con todos los algoritmos seleccionados.

    Todo lo aleatorio se deriva de `seed`, que queda registrada en cada
    fila para poder repetir la celda de forma aislada.
    """
    g, planted, rejected, flags = _draw_graph(cfg, seed)
    if rejected:
        flags.append(f"rejected_draws={rejected}")
    if g is None:
        return [
            MetricRow(trial, seed, alpha, s, algorithm, 0, 0.0, 0.0, tuple(flags))
            for algorithm in cfg.algorithms
        ]

    model = SignalModel(graph=g, planted=planted, alpha=alpha, filter=cfg.filter)
    if not check_filter_compatibility(model).compatible:
        flags.append(FLAG_FILTER_INCOMPATIBLE)

    sigma_hat = sample_covariance(generate_samples(model, s, seed=_subseed(seed, 1)))
    basis = structural_basis(g, planted, cfg.filter)

    rows = []
    for index, algorithm in enumerate(ALGORITHMS):
        if algorithm not in cfg.algorithms:
            continue
        algorithm_seed = _subseed(seed, 2, index)
        row_flags = list(flags)
        started = time.perf_counter()
        if algorithm == 'spectral':
            found = spectral_extract(sigma_hat, cfg.k, cfg.kmeans_restarts, algorithm_seed)
        else:
            result = robust_blind_wl(covariance_oracle(sigma_hat), g.n, cfg.robust, algorithm_seed)
            found = result.partition
            if not result.converged:
                row_flags.append(FLAG_NOT_CONVERGED)
        runtime_ms = (time.perf_counter() - started) * 1000.0
        rows.append(MetricRow(
            trial=trial,
            seed=seed,
            alpha=alpha,
            s=s,
            algorithm=algorithm,
            accuracy=graph_accuracy(found, planted),
            node_cost=f_cost(found, basis),
            runtime_ms=runtime_ms,
            flags=tuple(row_flags),
        ))
    return rows


def iter_cells(cfg: ExperimentConfig):
    """Celdas (índice α, α, índice s, s, trial, semilla) de la rejilla"""
    for alpha_index, alpha in enumerate(cfg.alpha_grid):
        for s_index, s in enumerate(cfg.s_grid):
            for trial in range(cfg.trials):
                yield alpha_index, alpha, s_index, s, trial, cell_seed(cfg.master_seed, alpha_index, s_index, trial)


def run_sweep(cfg: ExperimentConfig, progress: Optional[Callable[[int, int], None]] = None) -> List[MetricRow]:
    """
    Barrido completo sobre la rejilla α × s × trials.

    Args:
        cfg: Configuración del experimento
        progress: Callback opcional (celdas hechas, celdas totales)

    Returns:
        Filas ordenadas por (α, s, trial, algoritmo)
    """
    logger.info(f"Iniciando barrido: {cfg.cells} celdas, algoritmos {list(cfg.algorithms)}")
    rows = []
    for done, (_, alpha, _, s, trial, seed) in enumerate(iter_cells(cfg), 1):
        rows.extend(run_trial(cfg, alpha, s, trial, seed))
        if progress:
            progress(done, cfg.cells)
    rows.sort(key=lambda row: row.sort_key)
    logger.info(f"Barrido completado: {len(rows)} filas")
    return rows


def rows_to_csv(rows: Sequence[MetricRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for row in sorted(rows, key=lambda r: r.sort_key):
        writer.writerow(row.as_csv_row())
    return buffer.getvalue()


def rows_to_json(rows: Sequence[MetricRow]) -> str:
    payload = [dict(zip(CSV_COLUMNS, row.as_csv_row())) for row in sorted(rows, key=lambda r: r.sort_key)]
    return json.dumps({
        'rows': payload,
        'summary': summarize(rows),
        'robust_not_worse_at_smallest_s': algorithm_ordering(rows),
    }, indent=2)


def summarize(rows: Sequence[MetricRow]) -> List[Dict]:
    """Precisión media y coste mediano por (algoritmo, α, s), sin filas fallidas"""
    groups: Dict[Tuple, List[MetricRow]] = {}
    for row in rows:
        if FLAG_GENERATOR_FAILED in row.flags:
            continue
        groups.setdefault((row.algorithm, row.alpha, row.s), []).append(row)
    return [
        {
            'algorithm': algorithm,
            'alpha': alpha,
            's': s,
            'trials': len(members),
            'mean_accuracy': float(np.mean([r.accuracy for r in members])),
            'median_node_cost': float(np.median([r.node_cost for r in members])),
        }
        for (algorithm, alpha, s), members in sorted(groups.items())
    ]


def algorithm_ordering(rows: Sequence[MetricRow]) -> Optional[bool]:
    """
    True si en el s más pequeño robust_blind_wl acierta al menos tanto como
    el espectral para cada α. Es una expectativa estadística: se registra,
    no se exige. None si no hay ambos algoritmos en ese s.
    """
    summary = summarize(rows)
    if not summary:
        return None
    smallest = min(item['s'] for item in summary)
    means: Dict[float, Dict[str, float]] = {}
    for item in summary:
        if item['s'] == smallest:
            means.setdefault(item['alpha'], {})[item['algorithm']] = item['mean_accuracy']
    pairs = [m for m in means.values() if 'spectral' in m and 'robust_blind_wl' in m]
    if not pairs:
        return None
    ordered = all(m['robust_blind_wl'] >= m['spectral'] for m in pairs)
    if not ordered:
        logger.info(f"robust_blind_wl por debajo del espectral con s={smallest}")
    return ordered


def accuracy_trend(rows: Sequence[MetricRow], algorithm: str, alpha: float) -> float:
    """
    Correlación de Spearman entre s y la precisión media a α fijo.

    Una precisión constante no nula cuenta como tendencia no decreciente
    (1.0); si es cero en todos los s no hay tendencia y se devuelve NaN.
    """
    points = [
        (item['s'], item['mean_accuracy'])
        for item in summarize(rows)
        if item['algorithm'] == algorithm and item['alpha'] == alpha
    ]
    if len(points) < 2:
        raise EvaluationError("Se necesitan al menos dos valores de s para la tendencia")
    s_values, accuracies = zip(*points)
    if len(set(accuracies)) == 1:
        return 1.0 if accuracies[0] > 0 else float('nan')
    return float(spearmanr(s_values, accuracies).statistic)


# Diagnóstico de concentración

def concentration_diagnostic(cfg: ExperimentConfig, alpha: float = None) -> ConcentrationReport:
    """
    Mediana de ‖Σ̂ − Σ‖₂ por s y pendiente en escala log-log.

    Se usa el primer α de la rejilla salvo que se indique otro. Cada
    trial usa el mismo grafo para todos los s.

    Raises:
        EvaluationError: Si s_grid no tiene al menos 3 puntos en 2 décadas
    """
    s_values = sorted(cfg.s_grid)
    if len(s_values) < 3 or s_values[-1] < 100 * s_values[0]:
        raise EvaluationError("El diagnóstico necesita al menos 3 valores de s que cubran 2 décadas")
    alpha = cfg.alpha_grid[0] if alpha is None else alpha
    logger.info(f"Diagnóstico de concentración con α={alpha}, s={s_values}, {cfg.trials} trials")

    errors = np.zeros((len(s_values), cfg.trials))
    mixed_gaps = np.zeros((len(s_values), cfg.trials))
    population_gaps, ranks, norms = [], [], []
    for trial in range(cfg.trials):
        seed = cell_seed(cfg.master_seed, 0, 0, trial)
        g, planted, _, flags = _draw_graph(cfg, seed)
        if g is None:
            raise EvaluationError(f"No se pudo generar el grafo del trial {trial}")
        model = SignalModel(graph=g, planted=planted, alpha=alpha, filter=cfg.filter)
        sigma = exact_covariance(model)
        ranks.append(effective_rank(sigma))
        norms.append(float(np.linalg.norm(sigma, 2)))
        for s_index, s in enumerate(s_values):
            sigma_hat = sample_covariance(generate_samples(model, s, seed=_subseed(seed, 1, s_index)))
            errors[s_index, trial] = np.linalg.norm(sigma_hat - sigma, 2)
            gap = eigengap_delta(sigma, sigma_hat, cfg.k)
            mixed_gaps[s_index, trial] = gap.mixed_gap
        population_gaps.append(gap.population_gap)

    medians = np.median(errors, axis=1)
    slope = float(np.polyfit(np.log(s_values), np.log(medians), 1)[0])
    logger.info(f"Pendiente log-log del error: {slope:.3f}")
    population_gap = float(np.median(population_gaps))
    rank = float(np.median(ranks))
    bound_rhs = tuple(
        _bound_rhs(float(np.median(norms)), rank, cfg, s, population_gap) for s in s_values
    )
    return ConcentrationReport(
        alpha=alpha,
        s_values=tuple(s_values),
        median_errors=tuple(float(m) for m in medians),
        slope=slope,
        population_gap=population_gap,
        median_mixed_gaps=tuple(float(m) for m in np.median(mixed_gaps, axis=1)),
        condition_rates=tuple(float(r) for r in np.mean(mixed_gaps > 0, axis=1)),
        effective_rank=rank,
        bound_rhs=bound_rhs,
    )


def _bound_rhs(sigma_norm: float, rank: float, cfg: ExperimentConfig, s: int, delta: float) -> float:
    """Cota con Θ = K = 1; NaN si el hueco poblacional no es positivo"""
    if delta <= 0:
        return float('nan')
    params = BoundParams(
        sigma_norm=sigma_norm, r=rank, n=cfg.n, s=s, k=cfg.k, delta=delta,
        K=1.0, theta=1.0, c=BOUND_FAILURE_PROBABILITY,
    )
    return theorem1_rhs(params)


# Grafos irregulares

def perron_counterexample_graph() -> Graph:
    """Grafo con lazos cuyo vector de Perron [1,1,1,1,2,2] tiene menos valores que clases"""
    return Graph.from_edge_list(6, [
        (0, 4, 2), (4, 5, 4), (5, 1, 2), (1, 2, 4), (2, 3, 4),
        (0, 0, 4), (3, 3, 4), (4, 4, 3), (5, 5, 3),
    ])


def singular_counterexample_graph() -> Graph:
    """Grafo con lazos y adyacencia singular: un autovector estructural tiene autovalor 0"""
    return Graph.from_edge_list(4, [
        (0, 1, 1), (0, 2, 1), (1, 2, 1), (1, 3, 1), (2, 3, 1),
        (2, 2, 2), (3, 3, 2),
    ])


def fixtures_report() -> FixtureReport:
    """
    Verifica el comportamiento irregular de los autovectores estructurales.

    Returns:
        FixtureReport con cada comprobación; `ok` es False si alguna falla
    """
    report = FixtureReport()

    g = perron_counterexample_graph()
    perron = np.array([1, 1, 1, 1, 2, 2], dtype=np.int64)
    product = g.adjacency.astype(np.int64) @ perron
    report.add('perron_eigenvector', np.array_equal(product, 8 * perron), f"A·v = {product.tolist()}")
    grouping = perron_partition(g)
    report.add('perron_partition_classes', grouping.k == 2, f"{grouping.k} clases: {grouping.to_list()}")
    report.add('perron_partition_not_equitable', not is_equitable(g, grouping, 0), "la agrupación de Perron no es equitativa")
    cep = wl_refine(g)
    report.add('perron_graph_cep_classes', cep.k == 6, f"la cEP tiene {cep.k} clases")

    g = singular_counterexample_graph()
    determinant = float(np.linalg.det(g.adjacency))
    report.add('singular_determinant', abs(determinant) < 1e-9, f"det(A) = {determinant:.3e}")
    cep = brute_force_cep(g)
    report.add('singular_cep_matches_wl', cep == wl_refine(g), f"cEP por fuerza bruta: {cep.to_list()}")
    d = symmetric_eig(g.adjacency)
    zero = np.flatnonzero(np.abs(d.eigenvalues) < 1e-9)
    basis, _ = np.linalg.qr(indicator_matrix(cep))
    overlap = float(np.linalg.norm(d.eigenvectors[:, zero].T @ basis, 2)) if zero.size else 0.0
    report.add('singular_zero_eigenspace_in_span', overlap >= 1 - 1e-9, f"solapamiento {overlap:.12f}")
    indices = structural_eigvec_indices(d, cep)
    has_zero = any(abs(d.eigenvalues[i]) < 1e-9 for i in indices)
    report.add('singular_structural_zero', has_zero, f"índices estructurales {indices}")

    for line in report.lines():
        logger.info(line)
    return report

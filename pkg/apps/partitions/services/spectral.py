"""
Extracción espectral de la cEP: autodescomposición simétrica, k-means
sobre los k autovectores principales, autovectores estructurales,
partición de Perron y las cantidades de la cota de concentración.
"""
import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg
from sklearn.cluster import KMeans

from ..conf import equipart_setting
from ..exceptions import EquipartError
from .graphs import Graph, Partition, indicator_matrix
from .refinement import span_membership

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10
DEGENERACY_TOL = 1e-10
SIGN_TOL = 1e-12


class SpectralError(EquipartError):
    """Excepción para fallos del autosolver o precondiciones espectrales"""
    pass


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Autovalores en orden descendente y autovectores ortonormales por columnas"""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class BoundParams:
    """Parámetros de la cota de concentración (Θ y K los fija el usuario)"""

    sigma_norm: float
    r: float
    n: int
    s: int
    k: int
    delta: float
    K: float
    theta: float
    c: float

    def __post_init__(self):
        for name in ('sigma_norm', 'r', 'n', 's', 'k', 'delta', 'K', 'theta'):
            if getattr(self, name) <= 0:
                raise SpectralError(f"El parámetro {name} debe ser positivo")
        if not 0 < self.c < 1:
            raise SpectralError(f"La probabilidad de fallo c debe estar en (0, 1): {self.c}")


@dataclass(frozen=True)
class EigengapReport:
    """Hueco poblacional γ_k − γ_{k+1} y mixto γ_k − γ̂_{k+1}"""

    population_gap: float
    mixed_gap: float
    condition_holds: bool


def symmetric_eig(M: np.ndarray) -> EigenDecomposition:
    """
    Autodescomposición completa de una matriz simétrica.

    Los autovalores se ordenan de mayor a menor y cada autovector tiene
    positiva su primera componente de módulo mayor que 1e-12.

    Raises:
        SpectralError: Matriz no simétrica o fallo de convergencia
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SpectralError(f"Se esperaba una matriz cuadrada: {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    if np.max(np.abs(M - M.T)) > SYMMETRY_TOL * scale:
        raise SpectralError("La matriz no es simétrica")

    try:
        values, vectors = scipy.linalg.eigh(M)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise SpectralError(f"El autosolver no converge: {str(e)}")

    values = values[::-1].copy()
    vectors = vectors[:, ::-1].copy()
    for column in range(vectors.shape[1]):
        significant = np.flatnonzero(np.abs(vectors[:, column]) > SIGN_TOL)
        if significant.size and vectors[significant[0], column] < 0:
            vectors[:, column] *= -1.0

    return EigenDecomposition(eigenvalues=values, eigenvectors=vectors)


def top_k_eigvecs(d: EigenDecomposition, k: int) -> np.ndarray:
    """Las k primeras columnas de P; avisa si el corte entre γ_k y γ_{k+1} es ambiguo"""
    if not 1 <= k <= d.n:
        raise SpectralError(f"k debe estar entre 1 y {d.n}: {k}")
    if k < d.n and d.eigenvalues[k - 1] - d.eigenvalues[k] < DEGENERACY_TOL:
        logger.warning(
            f"Hueco espectral degenerado entre γ_{k} y γ_{k + 1}: "
            f"{d.eigenvalues[k - 1] - d.eigenvalues[k]:.3e}"
        )
    return d.eigenvectors[:, :k]


def f_cost(p: Partition, V: np.ndarray) -> float:
    """Coste de k-means: suma de desviaciones cuadráticas de las filas a su media de clase"""
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[0] != p.n:
        raise SpectralError(f"V tiene {V.shape[0]} filas y la partición {p.n} nodos")
    H = indicator_matrix(p)
    means = (H.T @ V) / p.class_sizes[:, None]
    return float(np.sum((V - H @ means) ** 2))


def kmeans(rows: np.ndarray, k: int, restarts: int, seed: int) -> Partition:
    """
    Lloyd con inicialización k-means++ y el mejor de `restarts` reinicios.

    Un clúster vacío se reubica en el punto más lejano (regla
    determinista de scikit-learn).
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[:, None]
    if not 1 <= k <= rows.shape[0]:
        raise SpectralError(f"k debe estar entre 1 y {rows.shape[0]}: {k}")
    model = KMeans(
        n_clusters=k,
        init='k-means++',
        n_init=restarts,
        algorithm='lloyd',
        random_state=seed,
    ).fit(rows)
    return Partition(model.labels_)


def spectral_extract(sigma_hat: np.ndarray, k: int, restarts: int = None, seed: int = 0) -> Partition:
    """
    Extrae k clases con los k autovectores principales de Σ̂ y k-means.

    Args:
        sigma_hat: Covarianza (muestral o exacta)
        k: Número de clases
        restarts: Reinicios de k-means (por defecto KMEANS_RESTARTS)
        seed: Semilla de k-means

    Returns:
        Partición en k clases
    """
    if restarts is None:
        restarts = equipart_setting('KMEANS_RESTARTS')
    d = symmetric_eig(sigma_hat)
    return kmeans(top_k_eigvecs(d, k), k, restarts, seed)


def perron_partition(g: Graph, tol: float = None) -> Partition:
    """
    Agrupa los nodos por entradas (casi) iguales del vector de Perron.

    La cEP refina esta partición, que puede ser estrictamente más gruesa.
    Los nodos se encadenan por orden: dos valores consecutivos a menos de
    tol·‖v‖∞ comparten clase.

    Raises:
        SpectralError: Si el autovalor dominante no es simple
    """
    if tol is None:
        tol = equipart_setting('PERRON_TOL')
    d = symmetric_eig(g.adjacency)
    if d.n > 1 and d.eigenvalues[0] - d.eigenvalues[1] <= DEGENERACY_TOL:
        raise SpectralError("El autovalor dominante no es simple")

    perron = d.eigenvectors[:, 0]
    if perron.sum() < 0:
        perron = -perron
    scale = float(np.max(np.abs(perron)))
    order = np.argsort(perron, kind='stable')
    labels = np.empty(g.n, dtype=np.int64)
    labels[order[0]] = 0
    current = 0
    for previous, node in zip(order[:-1], order[1:]):
        if perron[node] - perron[previous] > tol * scale:
            current += 1
        labels[node] = current
    return Partition(labels)


def _eigenvalue_groups(d: EigenDecomposition) -> List[np.ndarray]:
    """Índices agrupados por autovalores repetidos"""
    scale = max(1.0, float(np.max(np.abs(d.eigenvalues))))
    groups, start = [], 0
    for index in range(1, d.n + 1):
        if index == d.n or d.eigenvalues[index - 1] - d.eigenvalues[index] > DEGENERACY_TOL * scale:
            groups.append(np.arange(start, index))
            start = index
    return groups


def _structural_parts(d: EigenDecomposition, p: Partition, tol: float):
    """Por cada autoespacio: índices estructurales y base rotada hacia span(H)"""
    H = indicator_matrix(p)
    for group in _eigenvalue_groups(d):
        basis = d.eigenvectors[:, group]
        coupling = basis.T @ H
        projection = basis @ coupling
        if not span_membership(projection, H, tol=tol):
            continue
        U, singular, _ = np.linalg.svd(coupling, full_matrices=False)
        rank = int(np.sum(singular > tol))
        if rank:
            yield group[:rank], basis @ U[:, :rank]


def structural_eigvec_indices(d: EigenDecomposition, p: Partition, tol: float = None) -> List[int]:
    """
    Índices de los autovectores constantes por bloques en p.

    En autoespacios degenerados se proyectan las columnas de H sobre el
    autoespacio y se cuentan tantos índices como su rango.
    """
    if tol is None:
        tol = equipart_setting('STRUCTURAL_TOL')
    indices = []
    for group, _ in _structural_parts(d, p, tol):
        indices.extend(int(i) for i in group)
    return indices


def structural_eigvecs(d: EigenDecomposition, p: Partition, tol: float = None) -> np.ndarray:
    """Base ortonormal n×r del subespacio estructural (V_EP)"""
    if tol is None:
        tol = equipart_setting('STRUCTURAL_TOL')
    blocks = [vectors for _, vectors in _structural_parts(d, p, tol)]
    if not blocks:
        return np.zeros((d.n, 0))
    return np.hstack(blocks)


def effective_rank(sigma: np.ndarray) -> float:
    """r = Tr(Σ)/‖Σ‖₂"""
    sigma = np.asarray(sigma, dtype=float)
    norm = float(np.max(np.abs(scipy.linalg.eigvalsh(sigma))))
    if norm == 0:
        raise SpectralError("El rango efectivo no está definido para la matriz nula")
    return float(np.trace(sigma)) / norm


def theorem1_rhs(b: BoundParams) -> float:
    """√(8k)‖Σ‖₂Θ(√(K²r log(n/c)/s) + K²r log(n/c)/s)/δ"""
    ratio = b.K ** 2 * b.r * math.log(b.n / b.c) / b.s
    return math.sqrt(8 * b.k) * b.sigma_norm * b.theta * (math.sqrt(ratio) + ratio) / b.delta


def eigengap_delta(sigma: np.ndarray, sigma_hat: np.ndarray, k: int) -> EigengapReport:
    """
    Huecos espectrales de la condición de la cota.

    La condición exige δ > 0 con γ_k − γ̂_{k+1} >= δ; si el hueco mixto no
    es positivo no existe tal δ.
    """
    population = scipy.linalg.eigvalsh(sigma)[::-1]
    sample = scipy.linalg.eigvalsh(sigma_hat)[::-1]
    if not 1 <= k < population.size:
        raise SpectralError(f"k debe estar entre 1 y {population.size - 1}: {k}")
    population_gap = float(population[k - 1] - population[k])
    mixed_gap = float(population[k - 1] - sample[k])
    return EigengapReport(
        population_gap=population_gap,
        mixed_gap=mixed_gap,
        condition_holds=mixed_gap > 0,
    )

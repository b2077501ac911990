"""
Modelo de señales sobre grafos: filtros polinomiales, muestras
y = αf(A)H̃x + (1-α)z, covarianza exacta y covarianza muestral.
"""
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..exceptions import EquipartError
from .graphs import Graph, Partition, indicator_matrix, is_equitable, quotient
from .refinement import color_refinement

logger = logging.getLogger(__name__)


class SignalError(EquipartError):
    """Excepción para modelos de señal o dimensiones inválidas"""
    pass


@dataclass(frozen=True)
class FilterSpec:
    """Filtro polinomial f(A) = Σ_k h_k A^k"""

    coefficients: Tuple[float, ...]

    def __post_init__(self):
        coefficients = tuple(float(c) for c in self.coefficients)
        if not coefficients or not any(c != 0 for c in coefficients):
            raise SignalError("El filtro necesita al menos un coeficiente no nulo")
        object.__setattr__(self, 'coefficients', coefficients)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def identity(cls) -> 'FilterSpec':
        return cls((1.0,))

    @classmethod
    def adjacency(cls) -> 'FilterSpec':
        """Filtro por defecto de los experimentos: f(A) = A"""
        return cls((0.0, 1.0))

    @classmethod
    def random(cls, degree: int, rng: np.random.Generator) -> 'FilterSpec':
        """Coeficientes normales estándar con término principal no nulo"""
        coefficients = rng.standard_normal(degree + 1)
        if coefficients[-1] == 0:
            coefficients[-1] = 1.0
        return cls(tuple(coefficients))


@dataclass(frozen=True)
class SignalModel:
    """Grafo, partición plantada, mezcla de ruido α y filtro"""

    graph: Graph
    planted: Partition
    alpha: float
    filter: FilterSpec = FilterSpec.adjacency()

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise SignalError(f"alpha debe estar en [0, 1]: {self.alpha}")
        if self.planted.n != self.graph.n:
            raise SignalError("La partición plantada no cubre los nodos del grafo")


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Matriz n×s de salidas muestreadas y parámetros de procedencia"""

    Y: np.ndarray
    seed: int
    alpha: float
    coefficients: Tuple[float, ...]

    def __post_init__(self):
        if self.Y.ndim != 2 or self.Y.shape[1] < 1:
            raise SignalError("Un SampleSet necesita al menos una muestra")

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def s(self) -> int:
        return self.Y.shape[1]


@dataclass(frozen=True)
class FilterCheck:
    """Resultado de comprobar que f(A) y f(A)² conservan la cEP plantada"""

    compatible: bool
    classes_f: int
    classes_f2: int


def _horner(M: np.ndarray, coefficients: Sequence[float], X: np.ndarray) -> np.ndarray:
    result = coefficients[-1] * X
    for coefficient in reversed(coefficients[:-1]):
        result = M @ result + coefficient * X
    return result


def apply_filter(g: Graph, f: FilterSpec, X: np.ndarray) -> np.ndarray:
    """
    Aplica f(A) a las columnas de X por el esquema de Horner.

    Nunca forma A^k: son d productos matriz-vector por columna.

    Raises:
        SignalError: Si X no tiene n filas
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] != g.n:
        raise SignalError(f"X tiene {X.shape[0]} filas y el grafo {g.n} nodos")
    return _horner(g.adjacency, f.coefficients, X)


def filter_matrix(M: np.ndarray, f: FilterSpec) -> np.ndarray:
    """f(M) para una matriz cuadrada cualquiera (p.ej. el cociente A^π)"""
    M = np.asarray(M, dtype=float)
    return _horner(M, f.coefficients, np.eye(M.shape[0]))


def normalized_indicator(p: Partition) -> np.ndarray:
    """H̃ = H diag(1/√|C_i|), con columnas ortonormales"""
    return indicator_matrix(p) / np.sqrt(p.class_sizes)


def _sample_streams(seed: int, s: int, k: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Excitaciones x y ruido z con una subsecuencia Philox por muestra"""
    X = np.empty((k, s))
    Z = np.empty((n, s))
    for index in range(s):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))
        X[:, index] = rng.standard_normal(k)
        Z[:, index] = rng.standard_normal(n)
    return X, Z


def generate_samples(m: SignalModel, s: int, seed: int) -> SampleSet:
    """
    Genera s muestras independientes del modelo.

    La columna i es α·f(A)H̃x_i + (1-α)·z_i con x_i ~ N(0, I_k) y
    z_i ~ N(0, I_n); cada muestra usa su propia subsecuencia derivada de
    (seed, i), así que el resultado no depende del orden de generación.

    Args:
        m: Modelo de señal
        s: Número de muestras
        seed: Semilla

    Returns:
        SampleSet con Y de tamaño n×s
    """
    if s < 1:
        raise SignalError(f"Se necesita al menos una muestra: s={s}")

    excitation = apply_filter(m.graph, m.filter, normalized_indicator(m.planted))
    X, Z = _sample_streams(seed, s, m.planted.k, m.graph.n)
    Y = m.alpha * (excitation @ X) + (1.0 - m.alpha) * Z
    return SampleSet(Y=Y, seed=seed, alpha=m.alpha, coefficients=m.filter.coefficients)


def sample_covariance(ss: SampleSet) -> np.ndarray:
    """Σ̂ = (1/s) Σ y_i y_i⊤, sin restar la media (el modelo es centrado)"""
    sigma = (ss.Y @ ss.Y.T) / ss.s
    return 0.5 * (sigma + sigma.T)


def exact_covariance(m: SignalModel) -> np.ndarray:
    """Σ = α² f(A)H̃H̃⊤f(A)⊤ + (1-α)² I_n"""
    excitation = apply_filter(m.graph, m.filter, normalized_indicator(m.planted))
    sigma = m.alpha ** 2 * (excitation @ excitation.T)
    sigma += (1.0 - m.alpha) ** 2 * np.eye(m.graph.n)
    return 0.5 * (sigma + sigma.T)


def check_filter_compatibility(m: SignalModel) -> FilterCheck:
    """
    Comprueba que la partición plantada es la cEP de f(A) y de f(A)².

    Se evalúa sobre el cociente f(A)^π = f(A^π): cualquier EP más gruesa
    de f(A) es unión de clases plantadas y aparece como un refinamiento
    de colores no trivial del cociente.
    """
    if not is_equitable(m.graph, m.planted):
        logger.warning("La partición plantada no es equitativa en el grafo")
        return FilterCheck(compatible=False, classes_f=0, classes_f2=0)

    filtered = filter_matrix(quotient(m.graph, m.planted), m.filter)
    classes_f = color_refinement(filtered).k
    classes_f2 = color_refinement(filtered @ filtered).k
    compatible = classes_f == m.planted.k and classes_f2 == m.planted.k
    if not compatible:
        logger.warning(
            f"Filtro {m.filter.coefficients} incompatible: f(A) da {classes_f} clases, "
            f"f(A)² da {classes_f2}, plantadas {m.planted.k}"
        )
    return FilterCheck(compatible=compatible, classes_f=classes_f, classes_f2=classes_f2)

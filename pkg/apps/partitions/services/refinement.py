"""
Refinamiento de colores (Weisfeiler-Lehman) y su versión ciega guiada
por un oráculo y = Ax, en variante exacta y robusta (mezcla gaussiana).
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from sklearn.mixture import GaussianMixture

from ..conf import equipart_setting
from ..exceptions import EquipartError
from .graphs import Graph, Partition, indicator_matrix

logger = logging.getLogger(__name__)

# Una coloración es una partición; su índice t es la posición en el historial
Coloring = Partition

SELECTION_RULES = ('bic', 'fixed-k')

# Cuantización relativa para comparar pesos reales
QUANTIZATION = 1e-9


class RefinementError(EquipartError):
    """Excepción para oráculos inválidos o refinamientos que no convergen"""
    pass


@dataclass(frozen=True)
class Oracle:
    """
    Operador lineal desconocido aplicado columna a columna.

    `exact` indica que las salidas son exactas y se pueden comparar
    bit a bit (p.ej. el grafo con pesos enteros).
    """

    n: int
    func: Callable[[np.ndarray], np.ndarray]
    exact: bool = False

    def __call__(self, B: np.ndarray) -> np.ndarray:
        B = np.asarray(B, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if B.shape[0] != self.n:
            raise RefinementError(f"El oráculo espera {self.n} filas y recibió {B.shape[0]}")
        Y = np.asarray(self.func(B), dtype=float)
        if Y.shape != B.shape:
            raise RefinementError(f"El oráculo devolvió forma {Y.shape}, se esperaba {B.shape}")
        return Y


@dataclass(frozen=True)
class RobustConfig:
    """Parámetros de la variante robusta de BlindWL"""

    max_components: int = 6
    covariance_regularizer: float = 1e-6
    em_restarts: int = 3
    component_selection: str = 'bic'

    def __post_init__(self):
        if self.max_components < 1:
            raise RefinementError(f"max_components debe ser >= 1: {self.max_components}")
        if self.covariance_regularizer <= 0:
            raise RefinementError("El regularizador de covarianza debe ser positivo")
        if self.em_restarts < 1:
            raise RefinementError(f"em_restarts debe ser >= 1: {self.em_restarts}")
        if self.component_selection not in SELECTION_RULES:
            raise RefinementError(f"Regla de selección desconocida: {self.component_selection}")

    @classmethod
    def from_settings(cls, **overrides) -> 'RobustConfig':
        """Construye la configuración con los valores de settings.EQUIPART"""
        values = {
            'max_components': equipart_setting('ROBUST_MAX_COMPONENTS'),
            'covariance_regularizer': equipart_setting('ROBUST_REGULARIZER'),
            'em_restarts': equipart_setting('ROBUST_EM_RESTARTS'),
            'component_selection': equipart_setting('ROBUST_SELECTION'),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass(frozen=True)
class RobustResult:
    """Partición estimada por la variante robusta y estado de convergencia"""

    partition: Partition
    converged: bool
    rounds: int


def _quantize(sums: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Pesos enteros se comparan tal cual; los reales tras cuantizar"""
    if np.all(weights == np.round(weights)):
        return sums
    scale = float(np.max(np.abs(weights))) or 1.0
    return np.rint(sums / (scale * QUANTIZATION))


def color_refinement(
    weights: np.ndarray,
    init: Optional[Partition] = None,
    history: bool = False,
) -> Union[Partition, Tuple[Partition, List[Partition]]]:
    """
    Refinamiento de colores sobre una matriz de pesos cuadrada.

    El nuevo color de cada nodo se asigna con un diccionario indexado por
    (color propio, peso total hacia cada color), en orden de primera
    aparición, por lo que no hay colisiones de hash.

    Args:
        weights: Matriz n×n; la fila i son los pesos salientes del nodo i
        init: Coloración inicial (uniforme por defecto)
        history: Si es True devuelve también la partición de cada ronda

    Returns:
        La partición estable (y el historial si se pide)
    """
    weights = np.asarray(weights, dtype=float)
    n = weights.shape[0]
    current = init if init is not None else Partition.uniform(n)
    if current.n != n:
        raise RefinementError(f"La coloración inicial tiene {current.n} nodos, se esperaban {n}")

    rounds = [current]
    for _ in range(n):
        sums = _quantize(weights @ indicator_matrix(current), weights)
        palette = {}
        labels = np.empty(n, dtype=np.int64)
        for node in range(n):
            signature = (int(current.assignment[node]), tuple(sums[node].tolist()))
            labels[node] = palette.setdefault(signature, len(palette))
        refined = Partition(labels)
        if refined.k == current.k:
            break
        current = refined
        rounds.append(current)
        logger.debug(f"Ronda {len(rounds) - 1} de refinamiento: {current.k} colores")

    if history:
        return current, rounds
    return current


def wl_refine(g: Graph, init: Optional[Coloring] = None, history: bool = False):
    """
    Algoritmo de Weisfeiler-Lehman sobre el grafo g.

    Con coloración inicial uniforme devuelve la partición equitativa más
    gruesa (cEP); con otra coloración, la EP más gruesa que la refina.
    Para grafos ponderados se agrega el peso total por color vecino.
    """
    return color_refinement(g.adjacency, init=init, history=history)


def exact_oracle(g: Graph) -> Oracle:
    """Oráculo que calcula B ↦ A·B de forma exacta"""
    adjacency = g.adjacency
    return Oracle(n=g.n, func=lambda B: adjacency @ B, exact=g.is_integral)


def covariance_oracle(sigma: np.ndarray, exact: bool = False) -> Oracle:
    """Oráculo aproximado ŷ = Σ̂x a partir de una (estimación de) covarianza"""
    sigma = np.asarray(sigma, dtype=float)
    return Oracle(n=sigma.shape[0], func=lambda B: sigma @ B, exact=exact)


def span_membership(y: np.ndarray, B: np.ndarray, tol: float = 0.0) -> bool:
    """
    True si cada columna de y es constante (con tolerancia) en cada clase de B.

    Args:
        y: Matriz n×m
        B: Matriz indicadora n×k
        tol: Diferencia máxima permitida dentro de una clase
    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    labels = np.argmax(np.asarray(B), axis=1)
    for c in np.unique(labels):
        block = y[labels == c]
        if np.max(block.max(axis=0) - block.min(axis=0)) > tol:
            return False
    return True


def block_indicator(vector: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """
    Indicadora de los bloques donde un vector es constante.

    Sirve como matriz inicial de blind_wl para buscar una EP más fina a
    partir de un vector que es constante por bloques en algunos nodos.
    """
    vector = np.asarray(vector, dtype=float)
    scale = float(np.max(np.abs(vector))) or 1.0
    order = np.argsort(vector, kind='stable')
    labels = np.empty(vector.size, dtype=np.int64)
    current = 0
    labels[order[0]] = 0
    for previous, node in zip(order[:-1], order[1:]):
        if vector[node] - vector[previous] > tol * scale:
            current += 1
        labels[node] = current
    return indicator_matrix(Partition(labels))


def _validate_indicator(B: np.ndarray, n: int) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if B.shape[0] != n:
        raise RefinementError(f"La matriz inicial tiene {B.shape[0]} filas, se esperaban {n}")
    if not np.all(np.isin(B, (0.0, 1.0))) or not np.all(B.sum(axis=1) == 1):
        raise RefinementError("La matriz inicial no es una indicadora de partición")
    return B


def blind_wl(
    o: Oracle,
    n: int,
    init_B: Optional[np.ndarray] = None,
    history: bool = False,
):
    """
    BlindWL: refinamiento guiado solo por el oráculo.

    Parte de la columna de unos (o de init_B) y mientras O(B) no esté en
    span(B) agrupa las filas por igualdad exacta del par (O(B)_i, B_i).
    Al reagrupar cada clase conserva una sola columna indicadora.

    Args:
        o: Oráculo exacto
        n: Número de nodos
        init_B: Matriz indicadora inicial opcional
        history: Si es True devuelve también la partición de cada ronda

    Returns:
        La partición más gruesa P con o(H_P) ∈ span(H_P)

    Raises:
        RefinementError: Oráculo no exacto o más de n rondas (oráculo no lineal)
    """
    if not o.exact:
        raise RefinementError("blind_wl requiere un oráculo exacto; usa robust_blind_wl")

    B = np.ones((n, 1)) if init_B is None else _validate_indicator(init_B, n)
    current = Partition(np.argmax(B, axis=1))
    B = indicator_matrix(current)
    rounds = [current]

    iterations = 0
    while True:
        Y = o(B)
        if span_membership(Y, B, tol=0.0):
            break
        iterations += 1
        if iterations > n:
            raise RefinementError(f"BlindWL no converge en {n} rondas: el oráculo no parece lineal")
        _, labels = np.unique(np.hstack([Y, B]), axis=0, return_inverse=True)
        current = Partition(labels.ravel())
        B = indicator_matrix(current)
        rounds.append(current)
        logger.debug(f"BlindWL ronda {iterations}: {current.k} clases")

    if history:
        return current, rounds
    return current


def _fit_mixture(X: np.ndarray, cfg: RobustConfig, seed: int) -> np.ndarray:
    """Agrupa las filas de X con una mezcla gaussiana diagonal"""
    distinct = np.unique(X, axis=0).shape[0]
    upper = min(cfg.max_components, distinct)
    if upper <= 1:
        return np.zeros(X.shape[0], dtype=np.int64)

    if cfg.component_selection == 'fixed-k':
        candidates = [upper]
    else:
        candidates = range(1, upper + 1)

    best_model, best_bic = None, np.inf
    for components in candidates:
        model = GaussianMixture(
            n_components=components,
            covariance_type='diag',
            reg_covar=cfg.covariance_regularizer,
            n_init=cfg.em_restarts,
            random_state=seed,
        ).fit(X)
        bic = model.bic(X)
        # En empate gana el modelo con menos componentes
        if bic < best_bic:
            best_model, best_bic = model, bic

    # Las componentes vacías desaparecen al canonizar las etiquetas
    return best_model.predict(X)


def robust_blind_wl(o: Oracle, n: int, cfg: RobustConfig, seed: int) -> RobustResult:
    """
    Variante robusta de BlindWL para oráculos con ruido.

    En cada ronda agrupa las filas de [O(B) | B] con una mezcla gaussiana
    y usa las indicadoras de los grupos como nueva B. Termina cuando la
    partición se repite o tras n rondas.

    Args:
        o: Oráculo (p.ej. covariance_oracle de la covarianza muestral)
        n: Número de nodos
        cfg: Configuración de la mezcla
        seed: Semilla para EM

    Returns:
        RobustResult con la partición estimada y si hubo convergencia
    """
    previous = Partition.uniform(n)
    B = indicator_matrix(previous)
    seeds = np.random.SeedSequence(seed).generate_state(n, dtype=np.uint32)

    for round_index in range(n):
        X = np.hstack([o(B), B])
        labels = _fit_mixture(X, cfg, int(seeds[round_index]))
        current = Partition(labels)
        logger.debug(f"BlindWL robusto ronda {round_index + 1}: {current.k} clases")
        if current == previous:
            return RobustResult(partition=current, converged=True, rounds=round_index + 1)
        previous = current
        B = indicator_matrix(current)

    logger.warning(f"BlindWL robusto no converge en {n} rondas; se devuelve la última partición")
    return RobustResult(partition=previous, converged=False, rounds=n)

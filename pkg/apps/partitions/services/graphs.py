"""
Grafos ponderados no dirigidos, particiones y álgebra del grafo cociente.

Contiene la verificación exacta de particiones equitativas (AH = HA^π)
y el oráculo de fuerza bruta para la partición equitativa más gruesa
que usa la suite de tests.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from ..exceptions import EquipartError

logger = logging.getLogger(__name__)

# Matriz k×k de pesos medios entre clases (A^π)
QuotientMatrix = np.ndarray

BRUTE_FORCE_MAX_NODES = 10


class GraphError(EquipartError):
    """Excepción para grafos o particiones mal formados"""
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Grafo no dirigido con pesos no negativos y lazos en la diagonal."""

    adjacency: np.ndarray

    def __post_init__(self):
        adjacency = np.array(self.adjacency, dtype=float)
        if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
            raise GraphError(f"La matriz de adyacencia debe ser cuadrada: {adjacency.shape}")
        if not np.array_equal(adjacency, adjacency.T):
            raise GraphError("La matriz de adyacencia no es simétrica")
        if np.any(adjacency < 0):
            raise GraphError("Los pesos de las aristas deben ser no negativos")
        adjacency.setflags(write=False)
        object.__setattr__(self, 'adjacency', adjacency)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def is_simple(self) -> bool:
        """Sin lazos y con pesos en {0, 1}"""
        return bool(
            np.all(np.diag(self.adjacency) == 0)
            and np.all(np.isin(self.adjacency, (0.0, 1.0)))
        )

    @property
    def is_integral(self) -> bool:
        return bool(np.all(self.adjacency == np.round(self.adjacency)))

    def edges(self) -> List[Tuple[int, int, float]]:
        """Lista de aristas (u, v, w) con u <= v"""
        rows, cols = np.nonzero(np.triu(self.adjacency))
        return [(int(u), int(v), float(self.adjacency[u, v])) for u, v in zip(rows, cols)]

    @classmethod
    def from_edge_list(cls, n: int, edges: Iterable[Sequence]) -> 'Graph':
        """
        Construye un grafo a partir de una lista de aristas ponderadas.

        Args:
            n: Número de nodos
            edges: Iterable de tuplas (u, v, peso); u == v define un lazo

        Returns:
            Graph con la matriz de adyacencia simétrica

        Raises:
            GraphError: Nodo no entero o fuera de rango, arista duplicada o peso
                no positivo o no finito
        """
        if n < 1:
            raise GraphError(f"El número de nodos debe ser positivo: {n}")

        adjacency = np.zeros((n, n))
        seen = set()
        for edge in edges:
            u, v, weight = _node_id(edge[0]), _node_id(edge[1]), float(edge[2])
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"Nodo fuera de rango en la arista ({u}, {v}) con n={n}")
            if not np.isfinite(weight) or weight <= 0:
                raise GraphError(f"Peso no positivo o no finito en la arista ({u}, {v}): {weight}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"Arista duplicada: {key}")
            seen.add(key)
            # Un lazo de peso w aporta w a A[v, v]
            adjacency[u, v] = weight
            adjacency[v, u] = weight

        return cls(adjacency)

    @classmethod
    def from_networkx(cls, graph: nx.Graph, weight: str = 'weight') -> 'Graph':
        """Convierte un grafo de networkx con nodos 0..n-1"""
        nodes = sorted(graph.nodes())
        adjacency = nx.to_numpy_array(graph, nodelist=nodes, weight=weight)
        # networkx cuenta los lazos una sola vez en to_numpy_array
        return cls(adjacency)


@dataclass(frozen=True, eq=False)
class Partition:
    """
    Asignación de nodos a clases con identificadores canónicos.

    La clase del primer nodo es la 0, la siguiente clase que aparece es
    la 1, etc. Así dos particiones iguales tienen el mismo vector.
    """

    assignment: np.ndarray
    k: int = field(init=False)
    class_sizes: np.ndarray = field(init=False)

    def __post_init__(self):
        labels = np.asarray(self.assignment)
        if labels.ndim != 1 or labels.size == 0:
            raise GraphError("La asignación debe ser un vector no vacío")
        _, first_index, inverse = np.unique(labels, return_index=True, return_inverse=True)
        # Reordenar las clases por orden de primera aparición
        order = np.argsort(first_index)
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        canonical = rank[inverse.ravel()].astype(np.int64)
        canonical.setflags(write=False)
        sizes = np.bincount(canonical)
        sizes.setflags(write=False)
        object.__setattr__(self, 'assignment', canonical)
        object.__setattr__(self, 'k', int(order.size))
        object.__setattr__(self, 'class_sizes', sizes)

    @property
    def n(self) -> int:
        return self.assignment.size

    def classes(self) -> List[np.ndarray]:
        """Nodos de cada clase, en orden canónico"""
        return [np.flatnonzero(self.assignment == c) for c in range(self.k)]

    def to_list(self) -> List[int]:
        return [int(c) for c in self.assignment]

    @classmethod
    def uniform(cls, n: int) -> 'Partition':
        return cls(np.zeros(n, dtype=np.int64))

    @classmethod
    def singletons(cls, n: int) -> 'Partition':
        return cls(np.arange(n))

    @classmethod
    def from_classes(cls, n: int, classes: Iterable[Iterable[int]]) -> 'Partition':
        """Construye la partición a partir de una lista de clases"""
        labels = np.full(n, -1, dtype=np.int64)
        for index, members in enumerate(classes):
            labels[list(members)] = index
        if np.any(labels < 0):
            raise GraphError("Las clases no cubren todos los nodos")
        return cls(labels)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.assignment, other.assignment)

    def __hash__(self):
        return hash(self.assignment.tobytes())

    def __repr__(self):
        return f"Partition(k={self.k}, assignment={self.to_list()})"


def partitions_equal(p1: Partition, p2: Partition) -> bool:
    """Igualdad de particiones como comparación de vectores canónicos"""
    return p1 == p2


def indicator_matrix(p: Partition) -> np.ndarray:
    """
    Matriz indicadora H (n×k) con H[i, j] = 1 si el nodo i está en la clase j.
    """
    H = np.zeros((p.n, p.k))
    H[np.arange(p.n), p.assignment] = 1.0
    return H


def quotient(g: Graph, p: Partition) -> QuotientMatrix:
    """
    Calcula A^π = (H⊤H)^{-1} H⊤AH.

    Para particiones no equitativas es la media por clase de los pesos
    salientes; si la partición es equitativa el valor es exacto.

    Args:
        g: Grafo
        p: Partición de los nodos de g

    Returns:
        Matriz k×k del grafo cociente
    """
    _check_same_size(g, p)
    H = indicator_matrix(p)
    return (H.T @ g.adjacency @ H) / p.class_sizes[:, None]


def default_tolerance(g: Graph) -> float:
    """Tolerancia 0 para pesos enteros y 1e-9·max|A| para pesos reales"""
    if g.is_integral:
        return 0.0
    return 1e-9 * float(np.max(np.abs(g.adjacency)))


def is_equitable(g: Graph, p: Partition, tol: Optional[float] = None) -> bool:
    """
    Comprueba si AH == H·A^π con tolerancia en la norma máxima.

    Args:
        g: Grafo
        p: Partición candidata
        tol: Tolerancia; por defecto la de default_tolerance

    Returns:
        True si la partición es equitativa
    """
    _check_same_size(g, p)
    if tol is None:
        tol = default_tolerance(g)
    H = indicator_matrix(p)
    residual = g.adjacency @ H - H @ quotient(g, p)
    return bool(np.max(np.abs(residual)) <= tol)


def refines(p1: Partition, p2: Partition) -> bool:
    """True si cada clase de p1 está contenida en alguna clase de p2"""
    if p1.n != p2.n:
        raise GraphError(f"Particiones de tamaños distintos: {p1.n} y {p2.n}")
    pairs = np.unique(np.stack([p1.assignment, p2.assignment], axis=1), axis=0)
    return pairs.shape[0] == p1.k


@lru_cache(maxsize=None)
def _restricted_growth_strings(n: int) -> np.ndarray:
    """Todas las particiones de n elementos como cadenas de crecimiento restringido"""
    strings = [[0]]
    for _ in range(1, n):
        extended = []
        for prefix in strings:
            top = max(prefix) + 1
            extended.extend(prefix + [c] for c in range(top + 1))
        strings = extended
    table = np.array(strings, dtype=np.int64)
    table.setflags(write=False)
    return table


def _equitable_mask(adjacency: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Evalúa en bloque qué filas de `labels` son particiones equitativas"""
    count, n = labels.shape
    width = int(labels.max()) + 1
    H = np.zeros((count, n, width))
    H[np.arange(count)[:, None], np.arange(n)[None, :], labels] = 1.0
    AH = np.einsum('uv,bvj->buj', adjacency, H)
    sizes = H.sum(axis=1)
    sums = np.einsum('bui,buj->bij', H, AH)
    means = np.divide(sums, sizes[:, :, None], out=np.zeros_like(sums), where=sizes[:, :, None] > 0)
    residual = AH - np.einsum('bui,bij->buj', H, means)
    return np.max(np.abs(residual), axis=(1, 2)) == 0


def brute_force_cep(g: Graph) -> Partition:
    """
    Enumera todas las particiones de g y devuelve la equitativa más gruesa.

    Solo para grafos pequeños (n <= 10) con pesos enteros; se usa como
    oráculo en los tests.

    Raises:
        GraphError: Grafo demasiado grande o si alguna partición
            equitativa no refina a la mínima (la cEP es única)
    """
    if g.n > BRUTE_FORCE_MAX_NODES:
        raise GraphError(f"Fuerza bruta limitada a {BRUTE_FORCE_MAX_NODES} nodos: n={g.n}")

    table = _restricted_growth_strings(g.n)
    equitable = []
    for start in range(0, table.shape[0], 20000):
        chunk = table[start:start + 20000]
        equitable.append(chunk[_equitable_mask(g.adjacency, chunk)])
    candidates = np.concatenate(equitable)

    counts = candidates.max(axis=1) + 1
    coarsest = Partition(candidates[np.argmin(counts)])
    for labels in candidates:
        if not refines(Partition(labels), coarsest):
            raise GraphError(
                f"Partición equitativa {labels.tolist()} no refina a {coarsest.to_list()}"
            )

    logger.debug(f"Fuerza bruta: {candidates.shape[0]} particiones equitativas, cEP con {coarsest.k} clases")
    return coarsest


def _check_same_size(g: Graph, p: Partition):
    if g.n != p.n:
        raise GraphError(f"La partición tiene {p.n} nodos y el grafo {g.n}")


def _node_id(value) -> int:
    """Identificador de nodo entero; 2.0 se acepta, 2.5 o NaN no"""
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise GraphError(f"Identificador de nodo inválido: {value!r}")
    if not np.isfinite(number) or number != int(number):
        raise GraphError(f"El identificador de nodo debe ser entero: {value!r}")
    return int(number)

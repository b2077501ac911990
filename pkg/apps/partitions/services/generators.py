"""
Modelo de configuración coloreado localmente.

Genera grafos simples con una partición equitativa plantada exacta
AH = HA^π: cada nodo de la clase i tiene exactamente D[i][j] vecinos en
la clase j.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..conf import equipart_setting
from ..exceptions import EquipartError
from .graphs import Graph, Partition
from .refinement import color_refinement

logger = logging.getLogger(__name__)

MAX_REPAIR_SWAPS = 100


class GeneratorError(EquipartError):
    """Excepción para especificaciones inválidas o muestreos que no convergen"""
    pass


@dataclass(frozen=True, eq=False)
class PlantedSpec:
    """Tamaños de clase y matriz D de grados coloreados"""

    class_sizes: Tuple[int, ...]
    quotient_degrees: np.ndarray

    def __post_init__(self):
        sizes = tuple(int(size) for size in self.class_sizes)
        D = np.array(self.quotient_degrees, dtype=np.int64)
        if D.ndim != 2 or D.shape != (len(sizes), len(sizes)):
            raise GeneratorError(f"D debe ser {len(sizes)}×{len(sizes)}: {D.shape}")
        D.setflags(write=False)
        object.__setattr__(self, 'class_sizes', sizes)
        object.__setattr__(self, 'quotient_degrees', D)
        errors = self.violations()
        if errors:
            raise GeneratorError("; ".join(errors))

    @property
    def k(self) -> int:
        return len(self.class_sizes)

    @property
    def n(self) -> int:
        return sum(self.class_sizes)

    def violations(self) -> List[str]:
        """Lista de invariantes incumplidos (vacía si la especificación es válida)"""
        return spec_violations(self.class_sizes, self.quotient_degrees)

    def planted_partition(self) -> Partition:
        """Clases consecutivas: la clase 0 ocupa los primeros nodos"""
        return Partition(np.repeat(np.arange(self.k), self.class_sizes))

    def to_dict(self) -> Dict:
        return {'sizes': list(self.class_sizes), 'D': self.quotient_degrees.tolist()}

    @classmethod
    def from_dict(cls, data: Dict) -> 'PlantedSpec':
        try:
            return cls(class_sizes=tuple(data['sizes']), quotient_degrees=np.array(data['D']))
        except KeyError as e:
            raise GeneratorError(f"Falta la clave {str(e)} en la especificación")


@dataclass(frozen=True)
class GenConfig:
    """Reintentos por bloque y reinicios globales del muestreador"""

    max_retries: int = 50
    global_restarts: int = 20

    def __post_init__(self):
        if self.max_retries < 1 or self.global_restarts < 1:
            raise GeneratorError("max_retries y global_restarts deben ser >= 1")

    @classmethod
    def from_settings(cls) -> 'GenConfig':
        return cls(
            max_retries=equipart_setting('GEN_MAX_RETRIES'),
            global_restarts=equipart_setting('GEN_GLOBAL_RESTARTS'),
        )


def spec_violations(sizes: Sequence[int], D: np.ndarray) -> List[str]:
    """Consistencia, paridad y margen para grafos simples"""
    errors = []
    if any(size < 1 for size in sizes):
        errors.append("Todas las clases deben tener al menos un nodo")
    if np.any(D < 0):
        errors.append("D debe ser no negativa")
    k = len(sizes)
    for i in range(k):
        if sizes[i] * D[i, i] % 2:
            errors.append(f"Paridad: sizes[{i}]·D[{i}][{i}] es impar")
        if D[i, i] > sizes[i] - 1:
            errors.append(f"D[{i}][{i}]={D[i, i]} excede sizes[{i}]-1")
        for j in range(k):
            if i == j:
                continue
            if sizes[i] * D[i, j] != sizes[j] * D[j, i]:
                errors.append(f"Inconsistencia: sizes[{i}]·D[{i}][{j}] != sizes[{j}]·D[{j}][{i}]")
            if D[i, j] > sizes[j]:
                errors.append(f"D[{i}][{j}]={D[i, j]} excede sizes[{j}]")
    return errors


def planted_spec_is_collapsible(D: np.ndarray) -> bool:
    """
    True si el cociente admite una partición equitativa más gruesa.

    Cualquier EP más gruesa que la plantada es unión de clases plantadas,
    así que basta con refinar colores sobre D (pesos salientes).
    Dos filas idénticas son el caso más simple.
    """
    D = np.asarray(D, dtype=float)
    return color_refinement(D).k < D.shape[0]


def _draw_entries(
    k: int,
    max_deg: int,
    sizes: Sequence[int],
    rng: np.random.Generator,
    max_attempts: int,
) -> Optional[np.ndarray]:
    """Sorteo de D entrada a entrada con rechazo de entradas inconsistentes"""
    D = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for _ in range(max_attempts):
            value = int(rng.integers(0, max_deg + 1))
            if sizes[i] * value % 2 == 0 and value <= sizes[i] - 1:
                D[i, i] = value
                break
        for j in range(i + 1, k):
            for _ in range(max_attempts):
                value = int(rng.integers(0, max_deg + 1))
                mirrored, remainder = divmod(sizes[i] * value, sizes[j])
                if remainder == 0 and mirrored <= max_deg and value <= sizes[j] and mirrored <= sizes[i]:
                    D[i, j], D[j, i] = value, mirrored
                    break
            else:
                return None
    return D


def draw_planted_spec(
    k: int,
    max_deg: int,
    sizes: Sequence[int],
    seed: int,
    max_restarts: int = 1000,
) -> Tuple[PlantedSpec, int]:
    """
    Sortea una especificación plantada y cuenta los rechazos.

    Con tamaños iguales D es simétrica con entradas uniformes en
    {0..max_deg}. Se rechazan las matrices que violan los invariantes o
    cuyo cociente colapsa clases (p.ej. dos filas idénticas).

    Returns:
        (PlantedSpec, número de matrices rechazadas)

    Raises:
        GeneratorError: Si se agotan los reinicios
    """
    if len(sizes) != k:
        raise GeneratorError(f"Se esperaban {k} tamaños de clase: {list(sizes)}")
    rng = np.random.default_rng(seed)
    rejected = 0
    for _ in range(max_restarts):
        D = _draw_entries(k, max_deg, sizes, rng, max_attempts=max_restarts)
        if D is None or spec_violations(sizes, D) or planted_spec_is_collapsible(D):
            rejected += 1
            continue
        if rejected:
            logger.debug(f"Especificación aceptada tras {rejected} rechazos")
        return PlantedSpec(class_sizes=tuple(sizes), quotient_degrees=D), rejected

    raise GeneratorError(f"No se encontró una matriz D válida en {max_restarts} intentos")


def sample_quotient_degrees(k: int, max_deg: int, sizes: Sequence[int], seed: int) -> np.ndarray:
    """Matriz D k×k de grados coloreados (ver draw_planted_spec)"""
    spec, _ = draw_planted_spec(k, max_deg, sizes, seed)
    return np.array(spec.quotient_degrees)


def _collisions(pairs: np.ndarray) -> List[int]:
    """Índices de pares que son lazos o repiten una arista anterior"""
    seen = set()
    bad = []
    for index, (u, v) in enumerate(pairs.tolist()):
        key = (min(u, v), max(u, v))
        if u == v or key in seen:
            bad.append(index)
        else:
            seen.add(key)
    return bad


def _repair(pairs: np.ndarray, rng: np.random.Generator, bipartite: bool) -> Optional[np.ndarray]:
    """
    Intercambios dobles de aristas dirigidos a las colisiones.

    En bloques bipartitos solo se intercambian los extremos del lado j
    para que cada arista siga uniendo las dos clases.
    """
    pairs = pairs.copy()
    for _ in range(MAX_REPAIR_SWAPS + 1):
        bad = _collisions(pairs)
        if not bad:
            return pairs
        good = np.setdiff1d(np.arange(len(pairs)), bad)
        if good.size == 0:
            return None
        b, g = bad[0], int(rng.choice(good))
        (a, c), (x, y) = pairs[b].tolist(), pairs[g].tolist()
        if bipartite or rng.random() < 0.5:
            proposal = [(a, y), (x, c)]
        else:
            proposal = [(a, x), (c, y)]

        keys = Counter((min(u, v), max(u, v)) for u, v in pairs.tolist())
        for u, v in (pairs[b].tolist(), pairs[g].tolist()):
            keys[(min(u, v), max(u, v))] -= 1
        new_keys = [(min(u, v), max(u, v)) for u, v in proposal]
        valid = (
            all(u != v for u, v in proposal)
            and new_keys[0] != new_keys[1]
            and all(keys[key] <= 0 for key in new_keys)
        )
        if valid:
            pairs[b], pairs[g] = proposal
    return None


def _wire_within(nodes: np.ndarray, degree: int, rng: np.random.Generator) -> Optional[np.ndarray]:
    """Grafo simple degree-regular dentro de una clase por emparejamiento de stubs"""
    if degree == 0:
        return np.zeros((0, 2), dtype=np.int64)
    stubs = np.repeat(nodes, degree)
    rng.shuffle(stubs)
    return _repair(stubs.reshape(-1, 2), rng, bipartite=False)


def _wire_between(
    nodes_i: np.ndarray,
    degree_ij: int,
    nodes_j: np.ndarray,
    degree_ji: int,
    rng: np.random.Generator,
) -> Optional[np.ndarray]:
    """Emparejamiento bipartito birregular entre dos clases"""
    if degree_ij == 0:
        return np.zeros((0, 2), dtype=np.int64)
    stubs_i = np.repeat(nodes_i, degree_ij)
    stubs_j = np.repeat(nodes_j, degree_ji)
    rng.shuffle(stubs_j)
    return _repair(np.column_stack([stubs_i, stubs_j]), rng, bipartite=True)


def sample_graph(spec: PlantedSpec, cfg: GenConfig, seed: int) -> Tuple[Graph, Partition]:
    """
    Muestrea un grafo simple con la partición plantada exacta.

    Cada par de clases (i, j) se cablea de forma independiente; un bloque
    que falla se reintenta hasta max_retries veces y, si sigue fallando,
    se reinicia el grafo completo.

    Args:
        spec: Especificación plantada válida
        cfg: Reintentos y reinicios
        seed: Semilla

    Returns:
        (Graph, Partition plantada)

    Raises:
        GeneratorError: Si se agotan los reintentos
    """
    rng = np.random.default_rng(seed)
    planted = spec.planted_partition()
    members = planted.classes()
    D = spec.quotient_degrees

    for restart in range(cfg.global_restarts):
        blocks = []
        for i in range(spec.k):
            for j in range(i, spec.k):
                for _ in range(cfg.max_retries):
                    if i == j:
                        block = _wire_within(members[i], int(D[i, i]), rng)
                    else:
                        block = _wire_between(members[i], int(D[i, j]), members[j], int(D[j, i]), rng)
                    if block is not None:
                        break
                if block is None:
                    break
                blocks.append(block)
            else:
                continue
            break
        else:
            adjacency = np.zeros((spec.n, spec.n))
            edges = np.vstack(blocks) if blocks else np.zeros((0, 2), dtype=np.int64)
            adjacency[edges[:, 0], edges[:, 1]] = 1.0
            adjacency[edges[:, 1], edges[:, 0]] = 1.0
            return Graph(adjacency), planted

        logger.debug(f"Reinicio global {restart + 1} del muestreador")

    raise GeneratorError(
        f"No se pudo muestrear el grafo tras {cfg.global_restarts} reinicios "
        f"de {cfg.max_retries} intentos por bloque"
    )

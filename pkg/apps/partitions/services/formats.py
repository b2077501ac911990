"""
Formatos de archivo: grafos (JSON y lista de aristas), particiones,
conjuntos de muestras (binario y CSV), autodescomposiciones y
especificaciones plantadas.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np

from ..exceptions import EquipartError
from .generators import PlantedSpec
from .graphs import Graph, GraphError, Partition
from .signals import SampleSet
from .spectral import EigenDecomposition

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SAMPLESET_MAGIC = b'EQSS'
SAMPLESET_HEADER = np.dtype([
    ('magic', 'S4'),
    ('n', '<u8'),
    ('s', '<u8'),
    ('seed', '<i8'),
    ('alpha', '<f8'),
    ('degree', '<u8'),
])


class FormatError(EquipartError):
    """Excepción para archivos ilegibles o con formato incorrecto"""
    pass


# Grafos

def graph_to_dict(g: Graph) -> Dict:
    return {'n': g.n, 'edges': [[u, v, w] for u, v, w in g.edges()]}


def graph_from_dict(data: Dict) -> Graph:
    try:
        n = data['n']
        if isinstance(n, bool) or not isinstance(n, int):
            raise FormatError(f"n debe ser un entero: {n!r}")
        return Graph.from_edge_list(n, data['edges'])
    except (KeyError, TypeError, ValueError, GraphError) as e:
        raise FormatError(f"Grafo JSON inválido: {str(e)}")


def graph_to_edge_list_text(g: Graph) -> str:
    lines = [f"n={g.n}"]
    lines.extend(f"{u} {v} {w:.17g}" for u, v, w in g.edges())
    return "\n".join(lines) + "\n"


def graph_from_edge_list_text(text: str) -> Graph:
    """Cabecera 'n=<int>' seguida de una línea 'u v w' por arista"""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith('n='):
        raise FormatError("La lista de aristas debe empezar con la cabecera n=<int>")
    try:
        n = int(lines[0][2:])
        edges = [tuple(float(token) for token in line.split()) for line in lines[1:]]
        if any(len(edge) != 3 for edge in edges):
            raise FormatError("Cada arista debe tener la forma 'u v w'")
        return Graph.from_edge_list(n, edges)
    except (ValueError, GraphError) as e:
        raise FormatError(f"Lista de aristas inválida: {str(e)}")


def write_graph(g: Graph, path: PathLike):
    """JSON si la extensión es .json; lista de aristas en cualquier otro caso"""
    path = Path(path)
    if path.suffix == '.json':
        path.write_text(json.dumps(graph_to_dict(g)))
    else:
        path.write_text(graph_to_edge_list_text(g))
    logger.info(f"Grafo de {g.n} nodos escrito en {path}")


def read_graph(path: PathLike) -> Graph:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise FormatError(f"No se pudo leer el grafo {path}: {str(e)}")
    if path.suffix == '.json':
        try:
            return graph_from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise FormatError(f"JSON inválido en {path}: {str(e)}")
    return graph_from_edge_list_text(text)


# Particiones

def write_partition(p: Partition, path: PathLike):
    Path(path).write_text(json.dumps(p.to_list()))


def read_partition(path: PathLike) -> Partition:
    try:
        labels = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise FormatError(f"No se pudo leer la partición {path}: {str(e)}")
    if not isinstance(labels, list) or not all(isinstance(c, int) for c in labels):
        raise FormatError("Una partición es un array JSON de enteros")
    return Partition(np.array(labels, dtype=np.int64))


# Conjuntos de muestras

def sampleset_to_bytes(ss: SampleSet) -> bytes:
    """Cabecera little-endian, coeficientes del filtro e Y por columnas"""
    header = np.zeros(1, dtype=SAMPLESET_HEADER)
    header['magic'] = SAMPLESET_MAGIC
    header['n'] = ss.n
    header['s'] = ss.s
    header['seed'] = ss.seed
    header['alpha'] = ss.alpha
    header['degree'] = len(ss.coefficients) - 1
    coefficients = np.asarray(ss.coefficients, dtype='<f8')
    body = np.asarray(ss.Y, dtype='<f8').ravel(order='F')
    return header.tobytes() + coefficients.tobytes() + body.tobytes()


def sampleset_from_bytes(data: bytes) -> SampleSet:
    if len(data) < SAMPLESET_HEADER.itemsize:
        raise FormatError("Archivo de muestras truncado")
    header = np.frombuffer(data, dtype=SAMPLESET_HEADER, count=1)[0]
    if header['magic'] != SAMPLESET_MAGIC:
        raise FormatError("El archivo no es un conjunto de muestras (magic incorrecto)")
    n, s, degree = int(header['n']), int(header['s']), int(header['degree'])
    offset = SAMPLESET_HEADER.itemsize
    expected = offset + 8 * (degree + 1) + 8 * n * s
    if len(data) != expected:
        raise FormatError(f"Tamaño inesperado: {len(data)} bytes, se esperaban {expected}")
    coefficients = np.frombuffer(data, dtype='<f8', count=degree + 1, offset=offset)
    offset += 8 * (degree + 1)
    body = np.frombuffer(data, dtype='<f8', count=n * s, offset=offset)
    return SampleSet(
        Y=body.reshape((n, s), order='F').astype(float),
        seed=int(header['seed']),
        alpha=float(header['alpha']),
        coefficients=tuple(float(c) for c in coefficients),
    )


def write_sampleset(ss: SampleSet, path: PathLike):
    """Binario por defecto; CSV (una muestra por línea) si la extensión es .csv"""
    path = Path(path)
    if path.suffix == '.csv':
        np.savetxt(path, ss.Y.T, delimiter=',', fmt='%.17g')
    else:
        path.write_bytes(sampleset_to_bytes(ss))
    logger.info(f"{ss.s} muestras escritas en {path}")


def read_sampleset(path: PathLike) -> SampleSet:
    try:
        return sampleset_from_bytes(Path(path).read_bytes())
    except OSError as e:
        raise FormatError(f"No se pudo leer {path}: {str(e)}")


def read_covariance(path: PathLike) -> np.ndarray:
    """Covarianza en formato .npy o CSV"""
    path = Path(path)
    try:
        if path.suffix == '.npy':
            sigma = np.load(path)
        else:
            sigma = np.loadtxt(path, delimiter=',')
    except (OSError, ValueError) as e:
        raise FormatError(f"No se pudo leer la covarianza {path}: {str(e)}")
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise FormatError(f"La covarianza debe ser cuadrada: {sigma.shape}")
    return sigma


# Autodescomposiciones

def _number_array(values) -> str:
    return "[" + ",".join(format(float(v), '.17g') for v in values) + "]"


def decomposition_to_json(d: EigenDecomposition) -> str:
    """Autovalores y autovectores por filas con 17 cifras significativas"""
    return (
        '{"eigenvalues":' + _number_array(d.eigenvalues)
        + ',"eigenvectors":' + _number_array(d.eigenvectors.ravel(order='C'))
        + ',"n":' + str(d.n) + '}'
    )


def decomposition_from_json(text: str) -> EigenDecomposition:
    try:
        data = json.loads(text)
        n = int(data['n'])
        values = np.array(data['eigenvalues'], dtype=float)
        vectors = np.array(data['eigenvectors'], dtype=float).reshape((n, n))
    except (KeyError, ValueError, json.JSONDecodeError) as e:
        raise FormatError(f"Autodescomposición JSON inválida: {str(e)}")
    return EigenDecomposition(eigenvalues=values, eigenvectors=vectors)


# Especificaciones plantadas

def write_planted_spec(spec: PlantedSpec, path: PathLike):
    Path(path).write_text(json.dumps(spec.to_dict()))


def read_planted_spec(path: PathLike) -> PlantedSpec:
    try:
        return PlantedSpec.from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError) as e:
        raise FormatError(f"No se pudo leer la especificación {path}: {str(e)}")


def write_sidecar(path: PathLike, spec: PlantedSpec, seed: int, extra: Dict = None):
    """JSON adjunto al grafo generado con la especificación y la semilla"""
    payload = {'spec': spec.to_dict(), 'seed': seed}
    payload.update(extra or {})
    Path(path).write_text(json.dumps(payload, indent=2))

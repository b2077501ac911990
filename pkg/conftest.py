"""
Configuración de pytest para equipart.
Fixtures y configuraciones compartidas para todos los tests.
"""
import os
import django
import networkx as nx
import pytest
from django.contrib.auth import get_user_model

# Configurar Django settings
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'equipart.settings')
django.setup()

from apps.partitions.models import ExperimentRun, MetricRecord  # noqa: E402
from apps.partitions.services.evaluation import (  # noqa: E402
    ExperimentConfig,
    MetricRow,
    perron_counterexample_graph,
    singular_counterexample_graph,
)
from apps.partitions.services.graphs import Graph  # noqa: E402

User = get_user_model()


@pytest.fixture
def user(db):
    """
    Fixture que crea un usuario de prueba.

    Returns:
        User: Usuario autenticado para tests
    """
    return User.objects.create_user(
        username='testuser',
        email='testuser@example.com',
        password='testpass123'
    )


@pytest.fixture
def authenticated_client(client, user):
    """
    Fixture que proporciona un cliente autenticado.

    Args:
        client: Cliente de test de Django
        user: Usuario de prueba

    Returns:
        Client: Cliente autenticado listo para usar
    """
    client.force_login(user)
    return client


@pytest.fixture
def admin_user(db):
    """
    Fixture que crea un usuario administrador.

    Returns:
        User: Usuario administrador para tests
    """
    return User.objects.create_superuser(
        username='admin',
        email='admin@example.com',
        password='adminpass123'
    )


@pytest.fixture
def admin_client(client, admin_user):
    """
    Fixture que proporciona un cliente autenticado como administrador.

    Returns:
        Client: Cliente autenticado como admin
    """
    client.force_login(admin_user)
    return client


# Grafos pequeños

@pytest.fixture
def path3():
    """Camino 0-1-2"""
    return Graph.from_networkx(nx.path_graph(3))


@pytest.fixture
def path4():
    """Camino 0-1-2-3"""
    return Graph.from_networkx(nx.path_graph(4))


@pytest.fixture
def cycle4():
    """Ciclo de 4 nodos"""
    return Graph.from_networkx(nx.cycle_graph(4))


@pytest.fixture
def star4():
    """Estrella con centro 0 y hojas 1, 2, 3"""
    return Graph.from_networkx(nx.star_graph(3))


@pytest.fixture
def perron_graph():
    """Grafo con lazos cuyo vector de Perron es [1,1,1,1,2,2]"""
    return perron_counterexample_graph()


@pytest.fixture
def singular_graph():
    """Grafo con lazos y adyacencia singular"""
    return singular_counterexample_graph()


@pytest.fixture
def small_config():
    """Configuración de barrido mínima (dos algoritmos, 2×2 celdas)"""
    return ExperimentConfig(
        n=24,
        k=3,
        alpha_grid=(0.5, 1.0),
        s_grid=(200, 800),
        trials=1,
        master_seed=7,
        max_deg=3,
    )


@pytest.fixture
def small_config_dict():
    """Configuración mínima en forma de diccionario JSON"""
    return {
        'n': 24,
        'k': 3,
        'alpha_grid': [0.5, 1.0],
        's_grid': [200, 800],
        'trials': 1,
        'master_seed': 7,
        'max_deg': 3,
    }


@pytest.fixture
def experiment_run(db, small_config_dict):
    """
    Fixture que crea un experimento con dos filas de métricas.

    Returns:
        ExperimentRun: Experimento completado de prueba
    """
    cfg = ExperimentConfig.from_dict(small_config_dict)
    run = ExperimentRun.objects.create(
        name='Experimento de prueba',
        config=cfg.to_dict(),
        master_seed=cfg.master_seed,
        total_cells=cfg.cells,
        completed_cells=cfg.cells,
        status='completed',
    )
    rows = [
        MetricRow(0, 11, 1.0, 200, 'spectral', 1, 0.0, 2.5, ('rejected_draws=1',)),
        MetricRow(0, 11, 0.5, 200, 'robust_blind_wl', 0, 0.25, 4.0),
    ]
    for row in rows:
        MetricRecord.from_metric_row(run, row).save()
    return run

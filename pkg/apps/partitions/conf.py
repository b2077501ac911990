"""
Valores por defecto configurables de la app partitions.

Se leen del diccionario ``settings.EQUIPART``; si Django no está
configurado (uso como librería pura) se usan los valores de DEFAULTS.
"""
from django.conf import settings

DEFAULTS = {
    'KMEANS_RESTARTS': 10,
    'ROBUST_MAX_COMPONENTS': 6,
    'ROBUST_REGULARIZER': 1e-6,
    'ROBUST_EM_RESTARTS': 3,
    'ROBUST_SELECTION': 'bic',
    'GEN_MAX_RETRIES': 50,
    'GEN_GLOBAL_RESTARTS': 20,
    'PERRON_TOL': 1e-8,
    'STRUCTURAL_TOL': 1e-8,
}


def equipart_setting(name):
    """
    Devuelve un valor de configuración de equipart.

    Args:
        name: Clave del diccionario EQUIPART (p.ej. 'KMEANS_RESTARTS')

    Returns:
        El valor configurado o el valor por defecto
    """
    if settings.configured:
        return getattr(settings, 'EQUIPART', {}).get(name, DEFAULTS[name])
    return DEFAULTS[name]

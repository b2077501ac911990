"""
Excepciones compartidas por los servicios de equipart.
"""


class EquipartError(Exception):
    """Excepción base para todos los errores de la librería"""
    pass

"""
Configuración de Celery para equipart
"""

import os
from celery import Celery

# Establecer el módulo de configuración de Django para Celery
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'equipart.settings')

app = Celery('equipart')

# Usar configuración de Django para Celery
app.config_from_object('django.conf:settings', namespace='CELERY')

# Autodescubrimiento de tareas en todas las apps instaladas
app.autodiscover_tasks()

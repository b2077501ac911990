"""
URLs del proyecto equipart: admin y descargas de experimentos.
"""
from django.contrib import admin
from django.urls import include, path

urlpatterns = [
    path('admin/', admin.site.urls),
    path('', include('apps.partitions.urls')),
]

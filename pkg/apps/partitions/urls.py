from django.urls import path
from . import views

app_name = 'partitions'

urlpatterns = [
    path('experiments/<int:pk>/status/', views.run_status, name='run_status'),
    path('experiments/<int:pk>/metrics.csv', views.run_csv, name='run_csv'),
    path('experiments/<int:pk>/metrics.json', views.run_json, name='run_json'),
]

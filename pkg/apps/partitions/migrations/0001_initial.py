# Generated by Django 5.2 on 2026-10-18 10:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(help_text='Nombre descriptivo del experimento', max_length=200)),
                ('config', models.JSONField(help_text='Configuración del barrido (n, k, rejillas de α y s, semilla maestra...)')),
                ('master_seed', models.BigIntegerField(default=0, help_text='Semilla maestra de la que derivan las semillas de cada celda')),
                ('total_cells', models.PositiveIntegerField(default=0, help_text='Número de celdas (α, s, trial) del barrido')),
                ('completed_cells', models.PositiveIntegerField(default=0, help_text='Celdas ya procesadas')),
                ('status', models.CharField(choices=[('pending', 'Pendiente'), ('processing', 'Procesando'), ('completed', 'Completado'), ('failed', 'Error')], default='pending', help_text='Estado actual del experimento', max_length=20)),
                ('task_id', models.CharField(blank=True, help_text='ID de la tarea Celery para seguimiento', max_length=50, null=True)),
                ('error_message', models.TextField(blank=True, default='', help_text='Último error si el experimento falló')),
                ('created_at', models.DateTimeField(auto_now_add=True, help_text='Fecha y hora de creación')),
                ('updated_at', models.DateTimeField(auto_now=True, help_text='Fecha y hora de última actualización')),
            ],
            options={
                'verbose_name': 'Experimento',
                'verbose_name_plural': 'Experimentos',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='MetricRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('trial', models.PositiveIntegerField(help_text='Índice de repetición')),
                ('seed', models.BigIntegerField(help_text='Semilla derivada de la celda')),
                ('alpha', models.FloatField(help_text='Mezcla señal/ruido α')),
                ('s', models.PositiveIntegerField(help_text='Número de muestras')),
                ('algorithm', models.CharField(choices=[('spectral', 'Espectral (k-means)'), ('robust_blind_wl', 'BlindWL robusto')], max_length=20)),
                ('accuracy', models.PositiveSmallIntegerField(help_text='1 si se recupera la partición exacta')),
                ('node_cost', models.FloatField(help_text='Coste F sobre los autovectores estructurales')),
                ('runtime_ms', models.FloatField(default=0.0)),
                ('flags', models.CharField(blank=True, default='', max_length=200)),
                ('run', models.ForeignKey(help_text='Experimento al que pertenece la fila', on_delete=django.db.models.deletion.CASCADE, related_name='records', to='partitions.experimentrun')),
            ],
            options={
                'verbose_name': 'Métrica',
                'verbose_name_plural': 'Métricas',
                'ordering': ['alpha', 's', 'trial', 'algorithm'],
                'unique_together': {('run', 'alpha', 's', 'trial', 'algorithm')},
            },
        ),
    ]

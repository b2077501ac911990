from django.db import models

from .services.evaluation import CSV_COLUMNS, MetricRow, rows_to_csv


class ExperimentRun(models.Model):
    """Barrido experimental lanzado desde la CLI o desde una tarea Celery"""

    name = models.CharField(
        max_length=200,
        help_text="Nombre descriptivo del experimento"
    )

    config = models.JSONField(
        help_text="Configuración del barrido (n, k, rejillas de α y s, semilla maestra...)"
    )

    master_seed = models.BigIntegerField(
        default=0,
        help_text="Semilla maestra de la que derivan las semillas de cada celda"
    )

    total_cells = models.PositiveIntegerField(
        default=0,
        help_text="Número de celdas (α, s, trial) del barrido"
    )

    completed_cells = models.PositiveIntegerField(
        default=0,
        help_text="Celdas ya procesadas"
    )

    # Estados de procesamiento
    STATUS_CHOICES = [
        ('pending', 'Pendiente'),
        ('processing', 'Procesando'),
        ('completed', 'Completado'),
        ('failed', 'Error'),
    ]

    status = models.CharField(
        max_length=20,
        choices=STATUS_CHOICES,
        default='pending',
        help_text="Estado actual del experimento"
    )

    task_id = models.CharField(
        max_length=50,
        blank=True,
        null=True,
        help_text="ID de la tarea Celery para seguimiento"
    )

    error_message = models.TextField(
        blank=True,
        default='',
        help_text="Último error si el experimento falló"
    )

    created_at = models.DateTimeField(
        auto_now_add=True,
        help_text="Fecha y hora de creación"
    )

    updated_at = models.DateTimeField(
        auto_now=True,
        help_text="Fecha y hora de última actualización"
    )

    class Meta:
        ordering = ['-created_at']
        verbose_name = "Experimento"
        verbose_name_plural = "Experimentos"

    def __str__(self):
        return self.name

    @property
    def progress_percent(self):
        """Porcentaje de celdas completadas"""
        if not self.total_cells:
            return 0
        return round(100 * self.completed_cells / self.total_cells)

    def metric_rows(self):
        """Filas del experimento como MetricRow, en el orden de emisión"""
        return [record.to_metric_row() for record in self.records.all()]

    def to_csv(self):
        return rows_to_csv(self.metric_rows())


class MetricRecord(models.Model):
    """Resultado de un algoritmo en una celda (α, s, trial)"""

    ALGORITHM_CHOICES = [
        ('spectral', 'Espectral (k-means)'),
        ('robust_blind_wl', 'BlindWL robusto'),
    ]

    run = models.ForeignKey(
        ExperimentRun,
        on_delete=models.CASCADE,
        related_name='records',
        help_text="Experimento al que pertenece la fila"
    )

    trial = models.PositiveIntegerField(help_text="Índice de repetición")
    seed = models.BigIntegerField(help_text="Semilla derivada de la celda")
    alpha = models.FloatField(help_text="Mezcla señal/ruido α")
    s = models.PositiveIntegerField(help_text="Número de muestras")
    algorithm = models.CharField(max_length=20, choices=ALGORITHM_CHOICES)
    accuracy = models.PositiveSmallIntegerField(help_text="1 si se recupera la partición exacta")
    node_cost = models.FloatField(help_text="Coste F sobre los autovectores estructurales")
    runtime_ms = models.FloatField(default=0.0)
    flags = models.CharField(max_length=200, blank=True, default='')

    class Meta:
        ordering = ['alpha', 's', 'trial', 'algorithm']
        unique_together = ['run', 'alpha', 's', 'trial', 'algorithm']
        verbose_name = "Métrica"
        verbose_name_plural = "Métricas"

    def __str__(self):
        return f"{self.run.name} - α={self.alpha} s={self.s} trial={self.trial} {self.algorithm}"

    @classmethod
    def from_metric_row(cls, run, row: MetricRow):
        return cls(
            run=run,
            trial=row.trial,
            seed=row.seed,
            alpha=row.alpha,
            s=row.s,
            algorithm=row.algorithm,
            accuracy=row.accuracy,
            node_cost=row.node_cost,
            runtime_ms=row.runtime_ms,
            flags=';'.join(row.flags),
        )

    def to_metric_row(self) -> MetricRow:
        return MetricRow(
            trial=self.trial,
            seed=self.seed,
            alpha=self.alpha,
            s=self.s,
            algorithm=self.algorithm,
            accuracy=self.accuracy,
            node_cost=self.node_cost,
            runtime_ms=self.runtime_ms,
            flags=tuple(flag for flag in self.flags.split(';') if flag),
        )

    def as_dict(self):
        return dict(zip(CSV_COLUMNS, self.to_metric_row().as_csv_row()))

from django.contrib import admin, messages

from .forms import ExperimentConfigForm
from .models import ExperimentRun, MetricRecord
from .tasks import dispatch_experiment


class MetricRecordInline(admin.TabularInline):
    """Inline para mostrar las métricas dentro del experimento"""
    model = MetricRecord
    extra = 0
    can_delete = False
    readonly_fields = ['trial', 'seed', 'alpha', 's', 'algorithm', 'accuracy', 'node_cost', 'runtime_ms', 'flags']
    fields = readonly_fields


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    """Admin personalizado para ExperimentRun"""

    list_display = [
        'name',
        'status',
        'progress_percent',
        'master_seed',
        'created_at'
    ]

    list_filter = [
        'status',
        'created_at',
    ]

    search_fields = [
        'name',
    ]

    readonly_fields = [
        'master_seed',
        'status',
        'task_id',
        'total_cells',
        'completed_cells',
        'progress_percent',
        'error_message',
        'created_at',
        'updated_at'
    ]

    form = ExperimentConfigForm
    inlines = [MetricRecordInline]
    actions = ['launch_experiments']

    @admin.action(description="Lanzar los experimentos seleccionados")
    def launch_experiments(self, request, queryset):
        """Encola cada experimento como tarea Celery"""
        for run in queryset:
            try:
                dispatch_experiment(run)
                self.message_user(request, f'Experimento "{run.name}" encolado.', messages.SUCCESS)
            except Exception as e:
                run.status = 'failed'
                run.error_message = str(e)
                run.save(update_fields=['status', 'error_message'])
                self.message_user(request, f'Error al lanzar "{run.name}": {str(e)}', messages.ERROR)

    def progress_percent(self, obj):
        """Progreso en porcentaje"""
        return f"{obj.progress_percent}%"
    progress_percent.short_description = "Progreso"


@admin.register(MetricRecord)
class MetricRecordAdmin(admin.ModelAdmin):
    """Admin personalizado para MetricRecord"""

    list_display = [
        'run',
        'alpha',
        's',
        'trial',
        'algorithm',
        'accuracy',
        'node_cost',
    ]

    list_filter = [
        'algorithm',
        'accuracy',
        'run',
    ]

    search_fields = [
        'run__name',
    ]

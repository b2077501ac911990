from django.contrib.auth.decorators import login_required
from django.http import HttpResponse, JsonResponse
from django.shortcuts import get_object_or_404

from .models import ExperimentRun
from .services.evaluation import algorithm_ordering, summarize


@login_required
def run_status(request, pk):
    """Estado y progreso de un experimento"""
    run = get_object_or_404(ExperimentRun, pk=pk)
    return JsonResponse({
        'id': run.pk,
        'name': run.name,
        'status': run.status,
        'completed_cells': run.completed_cells,
        'total_cells': run.total_cells,
        'progress_percent': run.progress_percent,
        'error_message': run.error_message,
    })


@login_required
def run_csv(request, pk):
    """Descarga las métricas del experimento en CSV"""
    run = get_object_or_404(ExperimentRun, pk=pk)
    response = HttpResponse(run.to_csv(), content_type='text/csv')
    response['Content-Disposition'] = f'attachment; filename="experiment_{run.pk}.csv"'
    return response


@login_required
def run_json(request, pk):
    """Métricas y resumen por (algoritmo, α, s) en JSON"""
    run = get_object_or_404(ExperimentRun, pk=pk)
    rows = run.metric_rows()
    return JsonResponse({
        'id': run.pk,
        'name': run.name,
        'config': run.config,
        'rows': [record.as_dict() for record in run.records.all()],
        'summary': summarize(rows),
        'robust_not_worse_at_smallest_s': algorithm_ordering(rows),
    })

"""
Tareas Celery para ejecutar barridos experimentales de forma asíncrona.
"""
import logging

from celery import chord, shared_task
from django.db import transaction
from django.db.models import F

from .models import ExperimentRun, MetricRecord
from .services.evaluation import ExperimentConfig, cell_seed, iter_cells, run_sweep, run_trial

logger = logging.getLogger(__name__)

# Frecuencia con la que se persiste el progreso en la base de datos
PROGRESS_EVERY = 10


class ExperimentTaskError(Exception):
    """Excepción personalizada para errores en la ejecución de experimentos"""
    pass


def _load_run(run_id: int) -> ExperimentRun:
    try:
        return ExperimentRun.objects.get(id=run_id)
    except ExperimentRun.DoesNotExist:
        raise ExperimentTaskError(f"Experimento con ID {run_id} no encontrado")


def _mark_failed(run_id: int, error: Exception):
    """Marca el experimento como fallido sin ocultar el error original"""
    try:
        ExperimentRun.objects.filter(id=run_id).update(status='failed', error_message=str(error))
        logger.error(f"Experimento {run_id} marcado como fallido: {str(error)}")
    except Exception as save_error:
        logger.error(f"Error al actualizar estado fallido: {str(save_error)}")


def save_rows(run: ExperimentRun, rows) -> int:
    """Persiste filas MetricRow del experimento; devuelve cuántas se guardaron"""
    with transaction.atomic():
        MetricRecord.objects.bulk_create([MetricRecord.from_metric_row(run, row) for row in rows])
    return len(rows)


@shared_task(bind=True)
def run_experiment(self, run_id: int) -> dict:
    """
    Tarea Celery que ejecuta el barrido completo de un experimento.

    Args:
        run_id: ID del ExperimentRun a procesar

    Returns:
        dict: Resultado con el número de filas generadas
    """
    try:
        run = _load_run(run_id)
        cfg = ExperimentConfig.from_dict(run.config)
        logger.info(f"Iniciando experimento: {run.name} (ID: {run_id}), {cfg.cells} celdas")

        run.status = 'processing'
        run.total_cells = cfg.cells
        run.completed_cells = 0
        run.save(update_fields=['status', 'total_cells', 'completed_cells'])
        run.records.all().delete()

        def progress(done: int, total: int):
            self.update_state(
                state='PROGRESS',
                meta={'current': done, 'total': total, 'status': f'Celda {done} de {total}'}
            )
            if done % PROGRESS_EVERY == 0 or done == total:
                ExperimentRun.objects.filter(id=run_id).update(completed_cells=done)

        rows = run_sweep(cfg, progress=progress)
        saved = save_rows(run, rows)

        ExperimentRun.objects.filter(id=run_id).update(status='completed', completed_cells=cfg.cells)
        logger.info(f"Experimento completado: {saved} filas")
        return {'run_id': run_id, 'rows': saved, 'status': 'completed'}

    except ExperimentTaskError as e:
        _mark_failed(run_id, e)
        raise
    except Exception as e:
        _mark_failed(run_id, e)
        raise ExperimentTaskError(f"Error inesperado: {str(e)}")


@shared_task
def run_experiment_cell(run_id: int, alpha_index: int, s_index: int, trial: int) -> int:
    """Ejecuta una sola celda (α, s, trial) y guarda sus filas"""
    run = _load_run(run_id)
    cfg = ExperimentConfig.from_dict(run.config)
    alpha, s = cfg.alpha_grid[alpha_index], cfg.s_grid[s_index]
    seed = cell_seed(cfg.master_seed, alpha_index, s_index, trial)
    rows = run_trial(cfg, alpha, s, trial, seed)
    saved = save_rows(run, rows)
    ExperimentRun.objects.filter(id=run_id).update(completed_cells=F('completed_cells') + 1)
    logger.debug(f"Celda α={alpha} s={s} trial={trial} del experimento {run_id}: {saved} filas")
    return saved


@shared_task
def finalize_experiment(results, run_id: int) -> dict:
    """Callback del chord: marca el experimento como completado"""
    ExperimentRun.objects.filter(id=run_id).update(status='completed')
    total = sum(results)
    logger.info(f"Experimento {run_id} completado en paralelo: {total} filas")
    return {'run_id': run_id, 'rows': total, 'status': 'completed'}


def dispatch_experiment(run: ExperimentRun, parallel: bool = False):
    """
    Lanza un experimento en Celery.

    En modo paralelo cada celda es una tarea independiente; el orden de
    ejecución no afecta al resultado porque cada celda deriva su semilla
    de la semilla maestra y las filas se ordenan al exportar.
    """
    run.status = 'processing'
    run.save(update_fields=['status'])
    if not parallel:
        task = run_experiment.delay(run.id)
    else:
        cfg = ExperimentConfig.from_dict(run.config)
        run.total_cells = cfg.cells
        run.completed_cells = 0
        run.save(update_fields=['total_cells', 'completed_cells'])
        run.records.all().delete()
        cells = [
            run_experiment_cell.s(run.id, alpha_index, s_index, trial)
            for alpha_index, _, s_index, _, trial, _ in iter_cells(cfg)
        ]
        task = chord(cells)(finalize_experiment.s(run.id))

    # En modo eager la tarea ya ha terminado; no se sobrescribe su estado
    task_id = getattr(task, 'id', None)
    if task_id:
        run.task_id = task_id
        ExperimentRun.objects.filter(id=run.id).update(task_id=task_id)
    return task

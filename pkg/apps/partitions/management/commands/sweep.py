from ..base import EquipartCommand, load_json_file
from ...models import ExperimentRun
from ...services.evaluation import EvaluationError, ExperimentConfig, rows_to_csv, rows_to_json, run_sweep
from ...tasks import dispatch_experiment, save_rows


class Command(EquipartCommand):
    help = "Barrido experimental sobre las rejillas de α y s a partir de una configuración JSON"

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help="Configuración del experimento (JSON)")
        parser.add_argument('--seed', type=int, help="Sustituye master_seed de la configuración")
        parser.add_argument('--out', help="Archivo de salida; por defecto stdout")
        parser.add_argument('--format', choices=('csv', 'json'), default='csv')
        parser.add_argument('--save', action='store_true', help="Guarda el experimento y sus métricas en la base de datos")
        parser.add_argument('--name', help="Nombre del experimento guardado")
        parser.add_argument('--async', dest='run_async', action='store_true', help="Encola el experimento en Celery")
        parser.add_argument('--parallel', action='store_true', help="Con --async, una tarea Celery por celda")

    def run(self, *args, **options):
        data = load_json_file(options['config'], EvaluationError)
        if not isinstance(data, dict):
            raise EvaluationError("La configuración debe ser un objeto JSON")
        if options['seed'] is not None:
            data['master_seed'] = options['seed']
        cfg = ExperimentConfig.from_dict(data)

        if options['save'] or options['run_async']:
            run = ExperimentRun.objects.create(
                name=options['name'] or f"Barrido n={cfg.n} k={cfg.k} seed={cfg.master_seed}",
                config=cfg.to_dict(),
                master_seed=cfg.master_seed,
                total_cells=cfg.cells,
            )
            if options['run_async']:
                task = dispatch_experiment(run, parallel=options['parallel'])
                self.stdout.write(self.style.SUCCESS(f"Experimento {run.pk} encolado (tarea {task.id})"))
                return

        def progress(done, total):
            if options['verbosity'] > 1:
                self.stderr.write(f"Celda {done}/{total}")

        rows = run_sweep(cfg, progress=progress)
        if options['save']:
            save_rows(run, rows)
            run.status = 'completed'
            run.completed_cells = cfg.cells
            run.save(update_fields=['status', 'completed_cells'])
            self.stderr.write(f"Experimento guardado con ID {run.pk}")

        text = rows_to_csv(rows) if options['format'] == 'csv' else rows_to_json(rows)
        self.emit(text, options['out'])

import json

from ..base import EquipartCommand, load_json_file
from ...services.evaluation import EvaluationError, ExperimentConfig, concentration_diagnostic


class Command(EquipartCommand):
    help = "Decaimiento de ‖Σ̂ − Σ‖₂ con s, huecos espectrales y rango efectivo"

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help="Configuración del experimento (JSON)")
        parser.add_argument('--alpha', type=float, help="α del diagnóstico (por defecto el primero de la rejilla)")
        parser.add_argument('--seed', type=int, help="Sustituye master_seed de la configuración")
        parser.add_argument('--out', help="Informe JSON; por defecto stdout")
        parser.add_argument('--format', choices=('csv', 'json'), default='json')

    def run(self, *args, **options):
        data = load_json_file(options['config'], EvaluationError)
        if options['seed'] is not None:
            data['master_seed'] = options['seed']
        report = concentration_diagnostic(ExperimentConfig.from_dict(data), alpha=options['alpha'])

        if options['format'] == 'json':
            text = json.dumps(report.to_dict(), indent=2)
        else:
            lines = ['s,median_error,median_mixed_gap,condition_rate,bound_rhs']
            columns = (
                report.s_values, report.median_errors, report.median_mixed_gaps,
                report.condition_rates, report.bound_rhs,
            )
            for values in zip(*columns):
                lines.append(','.join(format(value, '.17g') for value in values))
            text = '\n'.join(lines) + '\n'
        self.emit(text, options['out'])
        self.stderr.write(f"Pendiente log-log: {report.slope:.3f} (rango efectivo {report.effective_rank:.2f})")

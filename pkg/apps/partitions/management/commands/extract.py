import json
from pathlib import Path

from django.core.management.base import CommandError

from ..base import EXIT_ERROR, EquipartCommand
from ...services.evaluation import graph_accuracy
from ...services.formats import (
    decomposition_to_json,
    read_covariance,
    read_graph,
    read_partition,
    read_sampleset,
    write_partition,
)
from ...services.refinement import RobustConfig, blind_wl, covariance_oracle, exact_oracle, robust_blind_wl, wl_refine
from ...services.signals import sample_covariance
from ...services.spectral import spectral_extract, symmetric_eig

ALGORITHMS = ('spectral', 'robust_blind_wl', 'wl', 'blind_wl')


class Command(EquipartCommand):
    help = "Recupera una partición con un algoritmo a partir de muestras, una covarianza o un grafo"

    def add_arguments(self, parser):
        parser.add_argument('--algorithm', choices=ALGORITHMS, default='spectral')
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--samples', help="SampleSet binario")
        source.add_argument('--covariance', help="Covarianza (.npy o CSV)")
        source.add_argument('--graph', help="Grafo, para wl y blind_wl con el oráculo exacto")
        parser.add_argument('--k', type=int, help="Número de clases (algoritmo espectral)")
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--planted', help="Partición plantada para calcular la precisión")
        parser.add_argument('--out', help="Partición de salida (array JSON); por defecto stdout")
        parser.add_argument('--eigen-out', help="Autodescomposición de la covarianza en JSON")

    def run(self, *args, **options):
        algorithm = options['algorithm']
        if options['graph']:
            partition = self._from_graph(algorithm, read_graph(options['graph']))
        else:
            if options['samples']:
                sigma = sample_covariance(read_sampleset(options['samples']))
            else:
                sigma = read_covariance(options['covariance'])
            if options['eigen_out']:
                Path(options['eigen_out']).write_text(decomposition_to_json(symmetric_eig(sigma)))
            partition = self._from_covariance(algorithm, sigma, options)

        if options['planted']:
            accuracy = graph_accuracy(partition, read_partition(options['planted']))
            self.stderr.write(f"Precisión: {accuracy}")

        if options['out']:
            write_partition(partition, options['out'])
            self.stdout.write(self.style.SUCCESS(f"Partición de {partition.k} clases en {options['out']}"))
        else:
            self.stdout.write(json.dumps(partition.to_list()))

    def _from_graph(self, algorithm, graph):
        if algorithm == 'wl':
            return wl_refine(graph)
        if algorithm == 'blind_wl':
            return blind_wl(exact_oracle(graph), graph.n)
        raise CommandError(f"{algorithm} necesita --samples o --covariance", returncode=EXIT_ERROR)

    def _from_covariance(self, algorithm, sigma, options):
        if algorithm == 'spectral':
            if not options['k']:
                raise CommandError("El algoritmo espectral necesita --k", returncode=EXIT_ERROR)
            return spectral_extract(sigma, options['k'], seed=options['seed'])
        if algorithm == 'robust_blind_wl':
            overrides = {'max_components': options['k']} if options['k'] else {}
            cfg = RobustConfig.from_settings(**overrides)
            result = robust_blind_wl(covariance_oracle(sigma), sigma.shape[0], cfg, options['seed'])
            if not result.converged:
                self.stderr.write(self.style.WARNING(f"Sin convergencia tras {result.rounds} rondas"))
            return result.partition
        raise CommandError(f"{algorithm} necesita --graph", returncode=EXIT_ERROR)

from pathlib import Path

from django.core.management.base import CommandError

from ..base import EXIT_ERROR, EquipartCommand, parse_ints
from ...services.formats import read_planted_spec, write_graph, write_partition, write_sidecar
from ...services.generators import GenConfig, draw_planted_spec, sample_graph


class Command(EquipartCommand):
    help = "Genera un grafo simple con una partición equitativa plantada (modelo de configuración coloreado)"

    def add_arguments(self, parser):
        parser.add_argument('--sizes', help="Tamaños de clase separados por comas (p.ej. 30,30,30,30)")
        parser.add_argument('--max-deg', type=int, default=4, help="Grado coloreado máximo de D")
        parser.add_argument('--spec', help="Especificación plantada JSON {sizes, D} en lugar de sortearla")
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', required=True, help="Grafo de salida (.json o lista de aristas)")

    def run(self, *args, **options):
        seed = options['seed']
        rejected = 0
        if options['spec']:
            spec = read_planted_spec(options['spec'])
        elif options['sizes']:
            sizes = parse_ints(options['sizes'])
            spec, rejected = draw_planted_spec(len(sizes), options['max_deg'], sizes, seed=seed)
        else:
            raise CommandError("Se necesita --spec o --sizes", returncode=EXIT_ERROR)

        graph, planted = sample_graph(spec, GenConfig.from_settings(), seed=seed)

        out = Path(options['out'])
        write_graph(graph, out)
        write_partition(planted, out.with_name(f"{out.stem}.partition.json"))
        write_sidecar(out.with_name(f"{out.stem}.spec.json"), spec, seed, {'rejected_draws': rejected})
        self.stdout.write(self.style.SUCCESS(
            f"Grafo de {graph.n} nodos y {len(graph.edges())} aristas con {spec.k} clases "
            f"({rejected} matrices D rechazadas)"
        ))

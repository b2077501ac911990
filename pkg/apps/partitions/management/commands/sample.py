from ..base import EquipartCommand, parse_floats
from ...services.formats import read_graph, read_partition, write_sampleset
from ...services.signals import FilterSpec, SignalModel, check_filter_compatibility, generate_samples


class Command(EquipartCommand):
    help = "Genera s señales filtradas y = αf(A)H̃x + (1-α)z sobre un grafo con partición plantada"

    def add_arguments(self, parser):
        parser.add_argument('--graph', required=True, help="Grafo (.json o lista de aristas)")
        parser.add_argument('--partition', required=True, help="Partición plantada (array JSON)")
        parser.add_argument('--alpha', type=float, default=0.7)
        parser.add_argument('--s', type=int, default=300, help="Número de muestras")
        parser.add_argument('--filter', default='0,1', help="Coeficientes h_0,h_1,... del filtro")
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', required=True, help="SampleSet binario, o CSV si la extensión es .csv")

    def run(self, *args, **options):
        graph = read_graph(options['graph'])
        planted = read_partition(options['partition'])
        model = SignalModel(
            graph=graph,
            planted=planted,
            alpha=options['alpha'],
            filter=FilterSpec(parse_floats(options['filter'])),
        )
        check = check_filter_compatibility(model)
        if not check.compatible:
            self.stderr.write(self.style.WARNING(
                f"El filtro no conserva la partición plantada ({check.classes_f} y {check.classes_f2} clases)"
            ))
        samples = generate_samples(model, options['s'], seed=options['seed'])
        write_sampleset(samples, options['out'])
        self.stdout.write(self.style.SUCCESS(f"{samples.s} muestras de {samples.n} nodos"))

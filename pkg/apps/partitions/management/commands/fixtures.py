from ..base import EquipartCommand
from ...services.evaluation import FixtureMismatchError, fixtures_report


class Command(EquipartCommand):
    help = "Comprueba los grafos con autovectores estructurales irregulares (vector de Perron y autovalor 0)"

    def run(self, *args, **options):
        report = fixtures_report()
        for line in report.lines():
            self.stdout.write(line)
        if not report.ok:
            failed = [name for name, ok, _ in report.checks if not ok]
            raise FixtureMismatchError(f"Comprobaciones fallidas: {', '.join(failed)}")
        self.stdout.write(self.style.SUCCESS("Todas las comprobaciones son correctas"))

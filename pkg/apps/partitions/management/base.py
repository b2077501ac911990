"""
Base común de los comandos de equipart: traduce los errores del dominio
a CommandError con el código de salida adecuado.
"""
import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from ..exceptions import EquipartError
from ..services.evaluation import FixtureMismatchError

logger = logging.getLogger(__name__)

EXIT_ERROR = 1
EXIT_FIXTURE_MISMATCH = 2


class EquipartCommand(BaseCommand):
    """Comando con manejo uniforme de errores; las subclases implementan run()"""

    def run(self, *args, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except FixtureMismatchError as e:
            raise CommandError(str(e), returncode=EXIT_FIXTURE_MISMATCH)
        except EquipartError as e:
            logger.error(f"{self.__module__.rsplit('.', 1)[-1]}: {str(e)}")
            raise CommandError(str(e), returncode=EXIT_ERROR)
        except OSError as e:
            raise CommandError(f"Error de E/S: {str(e)}", returncode=EXIT_ERROR)

    def emit(self, text: str, out: str = None):
        """Escribe en el archivo indicado o en stdout"""
        if out:
            Path(out).write_text(text)
            self.stdout.write(self.style.SUCCESS(f"Escrito {out}"))
        else:
            self.stdout.write(text, ending='' if text.endswith('\n') else '\n')


def load_json_file(path: str, error_cls=EquipartError):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise error_cls(f"No se pudo leer {path}: {str(e)}")


def parse_floats(text: str):
    """'0,1,0.5' -> (0.0, 1.0, 0.5)"""
    try:
        return tuple(float(token) for token in text.split(',') if token.strip())
    except ValueError:
        raise CommandError(f"Lista de números inválida: {text}", returncode=EXIT_ERROR)


def parse_ints(text: str):
    return tuple(int(value) for value in parse_floats(text))

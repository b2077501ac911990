from django import forms
from django.core.exceptions import ValidationError

from .exceptions import EquipartError
from .models import ExperimentRun
from .services.evaluation import ExperimentConfig


class ExperimentConfigForm(forms.ModelForm):
    """Formulario para crear experimentos a partir de una configuración JSON"""

    class Meta:
        model = ExperimentRun
        fields = ['name', 'config']
        labels = {
            'name': 'Nombre del experimento',
            'config': 'Configuración JSON',
        }
        help_texts = {
            'config': 'Claves n, k, alpha_grid, s_grid y opcionalmente trials, master_seed, filter, algorithms, robust',
        }

    def clean_name(self):
        """Validación personalizada para el nombre"""
        name = (self.cleaned_data.get('name') or '').strip()
        if len(name) < 3:
            raise ValidationError('El nombre debe tener al menos 3 caracteres.')
        return name

    def clean_config(self):
        """Valida la configuración construyendo un ExperimentConfig"""
        config = self.cleaned_data.get('config')
        if not isinstance(config, dict):
            raise ValidationError('La configuración debe ser un objeto JSON.')
        try:
            experiment = ExperimentConfig.from_dict(config)
        except EquipartError as e:
            raise ValidationError(str(e))
        self.experiment = experiment
        return experiment.to_dict()

    def save(self, commit=True):
        """Guardar el experimento con la semilla y el número de celdas"""
        run = super().save(commit=False)
        run.master_seed = self.experiment.master_seed
        run.total_cells = self.experiment.cells
        if commit:
            run.save()
        return run

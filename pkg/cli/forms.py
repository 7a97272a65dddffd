"""
Command-line validation.

Django's command parser handles the raw flags; the forms below turn them
into a RunConfig and, once the input size is known, into partitions and
perturbations.
"""

from django import forms
from django.conf import settings
from django.core.exceptions import ValidationError

from graphcore.forms import InputForm, clean_node, clean_number
from kron.models import Partition
from .models import RunConfig

FORMATS = ('json', 'tsv')


def split_flag(text, cast):
    """``"1, 2,3"`` -> ``(1, 2, 3)``; None when the flag was not given."""
    if not text:
        return None
    try:
        return tuple(cast(part.strip()) for part in text.split(',') if part.strip())
    except ValueError:
        raise ValidationError(
            "cannot parse %(text)r", code='invalid', params={'text': text}
        ) from None


class FlagForm(InputForm):
    """Reports errors under the flag (``--v-lower``) rather than the field name."""
    flags = {'fmt': '--format'}

    def error(self):
        error = super().error()
        if error.field and not error.field.startswith('--'):
            error.field = self.flags.get(
                error.field, f"--{error.field.replace('_', '-')}"
            )
        return error


class RunConfigForm(FlagForm):
    """Clean the parsed options of one command into a RunConfig."""
    input = forms.CharField()
    output = forms.CharField(required=False)
    fmt = forms.ChoiceField(choices=[(name, name) for name in FORMATS])
    boundary = forms.CharField(required=False)
    perturb = forms.CharField(required=False)
    sigma = forms.CharField(required=False)
    omega = forms.CharField(required=False)
    v_lower = forms.FloatField(required=False)
    v_mag = forms.CharField(required=False)
    resistance_uniform = forms.BooleanField(required=False)
    ground = forms.BooleanField(required=False)
    seed = forms.IntegerField(required=False)
    tol = forms.FloatField(required=False)
    cap = forms.IntegerField(min_value=1, required=False)
    workers = forms.IntegerField(min_value=1, required=False)
    verbose = forms.BooleanField(required=False)
    debug_corrupt = forms.BooleanField(required=False)

    def __init__(self, data, command, formats=FORMATS):
        super().__init__(data)
        self.command = command
        self.formats = formats

    def clean_output(self):
        return self.cleaned_data['output'] or None

    def clean_fmt(self):
        fmt = self.cleaned_data['fmt']
        if fmt not in self.formats:
            raise ValidationError(
                "'%(command)s' writes structured results, which are JSON only",
                code='invalid',
                params={'command': self.command},
            )
        return fmt

    def clean_boundary(self):
        return split_flag(self.cleaned_data['boundary'], int)

    def clean_sigma(self):
        return split_flag(self.cleaned_data['sigma'], int)

    def clean_omega(self):
        return split_flag(self.cleaned_data['omega'], float)

    def clean_v_mag(self):
        return split_flag(self.cleaned_data['v_mag'], float)

    def clean_perturb(self):
        text = self.cleaned_data['perturb']
        if not text:
            return None
        parts = text.split(',')
        if len(parts) != 3:
            raise ValidationError("expected i,j,delta", code='invalid')
        try:
            return int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ValidationError(
                "cannot parse %(text)r", code='invalid', params={'text': text}
            ) from None

    def clean_positive(self, name, default=None):
        value = self.cleaned_data[name]
        if value is None:
            return default
        if not value > 0:
            raise ValidationError(
                "expected a positive value, got %(value)r",
                code='invalid',
                params={'value': value},
            )
        return value

    def clean_v_lower(self):
        return self.clean_positive('v_lower', 1.0)

    def clean_tol(self):
        return self.clean_positive('tol')

    def clean_seed(self):
        seed = self.cleaned_data['seed']
        return settings.DEFAULT_SEED if seed is None else seed

    def save(self):
        return RunConfig(command=self.command, **self.validate())


class BoundaryForm(FlagForm):
    """1-based boundary flag against an input of ``n`` nodes."""
    boundary = forms.Field(
        error_messages={'required': "this command needs a boundary set"}
    )

    def __init__(self, boundary, n):
        super().__init__({'boundary': boundary})
        self.n = n

    def clean_boundary(self):
        return [
            clean_node(node, self.n, f"--boundary[{k}]")
            for k, node in enumerate(self.cleaned_data['boundary'])
        ]

    def save(self):
        return Partition(self.n, tuple(self.validate()['boundary']))


class PerturbationForm(FlagForm):
    """1-based ``(i, j, delta)`` flag, returned 0-based."""
    perturb = forms.Field(
        error_messages={'required': "this command needs --perturb i,j,delta"}
    )

    def __init__(self, perturb, n):
        super().__init__({'perturb': perturb})
        self.n = n

    def clean_perturb(self):
        i, j, delta = self.cleaned_data['perturb']
        return (
            clean_node(i, self.n, '--perturb.i'),
            clean_node(j, self.n, '--perturb.j'),
            clean_number(delta, '--perturb.delta'),
        )

    def save(self):
        return self.validate()['perturb']

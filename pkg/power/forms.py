"""
Input forms for DC networks and cutset indicators.

A DC network is the JSON graph format (edge weights are susceptances) plus
``"p": [numbers]`` and optionally ``"theta": [numbers]``. A cutset is
``{"sigma": [0/1, ...]}`` over the sorted boundary.
"""

from django import forms
from django.core.exceptions import ValidationError

from graphcore.forms import GraphForm, InputForm, clean_number
from graphcore.utils import laplacian_from_graph
from .models import DcNetwork


class DcNetworkForm(GraphForm):
    p = forms.JSONField()
    theta = forms.JSONField(required=False)

    def clean_p(self):
        return self.clean_vector('p')

    def clean_theta(self):
        if self.cleaned_data['theta'] is None:
            return None
        return self.clean_vector('theta')

    def clean_vector(self, name):
        values = self.cleaned_data[name]
        n = self.cleaned_data.get('n')
        if not isinstance(values, list):
            raise ValidationError("expected a list of numbers", code='invalid')
        if n is not None and len(values) != n:
            raise ValidationError(
                "expected %(n)s values, got %(count)s",
                code='dimension',
                params={'n': n, 'count': len(values)},
            )
        return [clean_number(v, f"{name}[{k}]") for k, v in enumerate(values)]

    def save(self):
        graph = super().save()
        return DcNetwork(
            laplacian_from_graph(graph),
            self.cleaned_data['p'],
            self.cleaned_data['theta'],
        )


class SigmaForm(InputForm):
    """Cut indicator over ``m`` boundary nodes."""
    sigma = forms.JSONField()

    def __init__(self, data, m):
        super().__init__(data)
        self.m = m

    def clean_sigma(self):
        sigma = self.cleaned_data['sigma']
        if not isinstance(sigma, list):
            raise ValidationError("expected a list of 0/1 values", code='invalid')
        if len(sigma) != self.m:
            raise ValidationError(
                "expected %(m)s indicators, got %(count)s",
                code='dimension',
                params={'m': self.m, 'count': len(sigma)},
            )
        for k, value in enumerate(sigma):
            if isinstance(value, bool) or value not in (0, 1):
                raise ValidationError(
                    "expected 0 or 1, got %(value)r",
                    code='invalid',
                    params={'value': value, 'where': f"sigma[{k}]"},
                )
        if len(set(sigma)) < 2:
            raise ValidationError(
                "the cut must put boundary nodes on both sides",
                code='degenerate_cut',
            )
        return [int(value) for value in sigma]

    def save(self):
        return self.validate()['sigma']

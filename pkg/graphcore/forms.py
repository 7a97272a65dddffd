"""
Input forms for the JSON graph format.

    {"n": 3,
     "edges": [{"i": 1, "j": 2, "w": 1.0}, ...],
     "loops": [{"i": 2, "w": 0.5}, ...]}

Indices are 1-based with i < j; duplicate edges or loops are rejected.
"""

from collections.abc import Mapping

import numpy as np
from django import forms
from django.core.exceptions import NON_FIELD_ERRORS, ValidationError
from django.forms.utils import ErrorDict

from kronred.exceptions import CutsetDegenerate, DimensionError, InvalidInput
from .models import WeightedGraph


def clean_node(value, n, where):
    """Validate a 1-based node index and return it 0-based."""
    try:
        node = forms.IntegerField().clean(value)
    except ValidationError:
        raise ValidationError(
            "expected an integer, got %(value)r",
            code='invalid',
            params={'value': value, 'where': where},
        ) from None
    if not 1 <= node <= n:
        raise ValidationError(
            "node %(node)s is outside 1..%(n)s",
            code='out_of_range',
            params={'node': node, 'n': n, 'where': where},
        )
    return node - 1


def clean_number(value, where, min_value=None):
    try:
        return forms.FloatField(min_value=min_value).clean(value)
    except ValidationError as e:
        raise ValidationError(
            e.messages[0], code='invalid', params={'where': where}
        ) from None


def clean_entries(value, where):
    if value is None:
        return []
    if not isinstance(value, list):
        raise ValidationError(
            "expected a list", code='invalid', params={'where': where}
        )
    for k, entry in enumerate(value):
        if not isinstance(entry, Mapping):
            raise ValidationError(
                "expected a JSON object",
                code='invalid',
                params={'where': f"{where}[{k}]"},
            )
    return value


class InputForm(forms.Form):
    """
    Form over an already parsed JSON object.

    ``save`` builds the domain object and raises InvalidInput (exit code 2)
    naming the first offending field when the data does not validate.
    """
    error_classes = {
        'dimension': DimensionError,
        'degenerate_cut': CutsetDegenerate,
    }

    def __init__(self, data=None, *args, **kwargs):
        self.malformed = data is not None and not isinstance(data, Mapping)
        super().__init__({} if self.malformed else data, *args, **kwargs)

    def full_clean(self):
        if not self.malformed:
            return super().full_clean()
        self._errors = ErrorDict()
        self.cleaned_data = {}
        self.add_error(None, ValidationError(
            "expected a JSON object", code='invalid', params={'where': 'input'}
        ))

    def error(self):
        """The first validation error as an InvalidInput."""
        field, errors = next(iter(self.errors.as_data().items()))
        error = errors[0]
        where = (error.params or {}).get('where', field)
        error_class = self.error_classes.get(error.code, InvalidInput)
        return error_class(
            next(iter(error)), field=None if where == NON_FIELD_ERRORS else where
        )

    def validate(self):
        if not self.is_valid():
            raise self.error()
        return self.cleaned_data


class GraphForm(InputForm):
    """Validate the JSON graph format and build a WeightedGraph."""
    n = forms.IntegerField(min_value=1)
    edges = forms.JSONField(required=False)
    loops = forms.JSONField(required=False)

    def clean_edges(self):
        edges = clean_entries(self.cleaned_data['edges'], 'edges')
        n = self.cleaned_data.get('n')
        if n is None:
            return []
        seen = set()
        cleaned = []
        for k, edge in enumerate(edges):
            where = f"edges[{k}]"
            i = clean_node(edge.get('i'), n, f"{where}.i")
            j = clean_node(edge.get('j'), n, f"{where}.j")
            if i >= j:
                raise ValidationError(
                    "edge endpoints must satisfy i < j, got %(i)s,%(j)s",
                    code='invalid',
                    params={'i': i + 1, 'j': j + 1, 'where': where},
                )
            if (i, j) in seen:
                raise ValidationError(
                    "duplicate edge {%(i)s,%(j)s}",
                    code='duplicate',
                    params={'i': i + 1, 'j': j + 1, 'where': where},
                )
            seen.add((i, j))
            w = clean_number(edge.get('w'), f"{where}.w", min_value=0.0)
            cleaned.append((i, j, w))
        return cleaned

    def clean_loops(self):
        loops = clean_entries(self.cleaned_data['loops'], 'loops')
        n = self.cleaned_data.get('n')
        if n is None:
            return []
        seen = set()
        cleaned = []
        for k, loop in enumerate(loops):
            where = f"loops[{k}]"
            i = clean_node(loop.get('i'), n, f"{where}.i")
            if i in seen:
                raise ValidationError(
                    "duplicate loop at node %(i)s",
                    code='duplicate',
                    params={'i': i + 1, 'where': where},
                )
            seen.add(i)
            w = clean_number(loop.get('w'), f"{where}.w", min_value=0.0)
            cleaned.append((i, w))
        return cleaned

    def save(self):
        """Build the WeightedGraph from ``cleaned_data``."""
        data = self.validate()
        n = data['n']
        weights = np.zeros((n, n))
        for i, j, w in data['edges']:
            weights[i, j] = weights[j, i] = w
        for i, w in data['loops']:
            weights[i, i] = w
        return WeightedGraph(weights)


def serialize_graph(g, tol=0.0):
    """Render a WeightedGraph in the JSON graph format (1-based)."""
    return {
        'n': g.n,
        'edges': [
            {'i': i + 1, 'j': j + 1, 'w': w} for i, j, w in g.edges(tol)
        ],
        'loops': [{'i': i + 1, 'w': w} for i, w in g.loops(tol)],
    }

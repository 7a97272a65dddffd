"""
Dense TSV matrix format.

    n=<n>
    <row 1, tab separated>
    ...

Rows follow 1-based node order; values carry 17 significant digits.
"""

import numpy as np
from django import forms
from django.conf import settings
from django.core.exceptions import ValidationError

from graphcore.forms import InputForm
from .models import ResistanceMatrix


def render_tsv(matrix):
    """Serialize a square matrix with its ``n=<n>`` header."""
    matrix = np.asarray(matrix, dtype=float)
    fmt = f".{settings.FLOAT_DIGITS}g"
    lines = [f"n={matrix.shape[0]}"]
    lines.extend(
        '\t'.join(format(float(value), fmt) for value in row) for row in matrix
    )
    return '\n'.join(lines) + '\n'


class MatrixTsvForm(InputForm):
    """Parse the TSV matrix format, given as ``{'tsv': text}``, into a float array."""
    tsv = forms.CharField()

    def clean_tsv(self):
        lines = [line for line in self.cleaned_data['tsv'].splitlines() if line.strip()]
        n = self.clean_header(lines[0])
        return self.clean_rows(lines[1:], n)

    def clean_header(self, line):
        key, _, value = line.strip().partition('=')
        if key.strip() != 'n' or not value.strip().isdigit() or int(value) < 1:
            raise ValidationError(
                "expected header 'n=<n>', got %(line)r",
                code='invalid',
                params={'line': line.strip(), 'where': 'line 1'},
            )
        return int(value)

    def clean_rows(self, lines, n):
        if len(lines) != n:
            raise ValidationError(
                "header says n=%(n)s but %(rows)s rows follow",
                code='dimension',
                params={'n': n, 'rows': len(lines)},
            )
        matrix = np.empty((n, n))
        for k, line in enumerate(lines):
            where = f"line {k + 2}"
            cells = line.strip().split('\t')
            if len(cells) != n:
                raise ValidationError(
                    "expected %(n)s values, got %(cells)s",
                    code='dimension',
                    params={'n': n, 'cells': len(cells), 'where': where},
                )
            for col, cell in enumerate(cells):
                try:
                    matrix[k, col] = float(cell)
                except ValueError:
                    raise ValidationError(
                        "not a number: %(cell)r",
                        code='invalid',
                        params={'cell': cell, 'where': f"{where}, column {col + 1}"},
                    ) from None
        return matrix

    def save(self):
        return self.validate()['tsv']


class ResistanceForm(MatrixTsvForm):
    """TSV input validated as a ResistanceMatrix."""

    def save(self):
        return ResistanceMatrix(super().save())

"""Reading inputs and rendering results for the management commands."""

import json
from pathlib import Path

import numpy as np

from kronred.exceptions import InvalidInput, OutputUnwritable
from graphcore.forms import GraphForm
from graphcore.utils import laplacian_from_graph
from power.forms import DcNetworkForm
from resistance.forms import render_tsv
from .forms import BoundaryForm
from .models import Response


def _plain(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def json_response(data, status=0):
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    body = json.dumps(data, default=_plain, sort_keys=True, indent=2, allow_nan=False)
    return Response(body + '\n', status)


def matrix_response(cfg, data, matrix):
    if cfg.fmt == 'tsv':
        return Response(render_tsv(matrix))
    return json_response(data)


def read_json(cfg):
    try:
        return json.loads(Path(cfg.input).read_text())
    except OSError as e:
        raise InvalidInput(f"cannot read input: {e.strerror}", field='--input') from e
    except json.JSONDecodeError as e:
        raise InvalidInput(
            f"invalid JSON at line {e.lineno}, column {e.colno}", field='--input'
        ) from e


def load_laplacian(cfg):
    return laplacian_from_graph(GraphForm(read_json(cfg)).save())


def load_network(cfg):
    """The DC network and the raw JSON it came from."""
    data = read_json(cfg)
    return DcNetworkForm(data).save(), data


def partition(cfg, n):
    return BoundaryForm(cfg.boundary, n).save()


def labels(p):
    return [k + 1 for k in p.boundary]


def write_output(cfg, response, stdout):
    if not cfg.output:
        stdout.write(response.body, ending='')
        return
    try:
        Path(cfg.output).write_text(response.body)
    except OSError as e:
        raise OutputUnwritable(f"cannot write output: {e.strerror}", field='--output') from e

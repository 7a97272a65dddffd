from dataclasses import dataclass
from typing import NamedTuple


@dataclass(frozen=True)
class RunConfig:
    """
    One validated command-line invocation.

    Node indices (``boundary``, ``perturb``) are kept 1-based here; they are
    checked against the input size once the input has been read.
    """
    command: str
    input: str
    output: str = None
    fmt: str = 'json'
    boundary: tuple = None
    perturb: tuple = None
    sigma: tuple = None
    omega: tuple = None
    v_lower: float = 1.0
    v_mag: tuple = None
    resistance_uniform: bool = False
    ground: bool = False
    seed: int = 42
    tol: float = None
    cap: int = None
    workers: int = None
    verbose: bool = False
    debug_corrupt: bool = False


class Response(NamedTuple):
    """Fully rendered command output and the exit code to return."""
    body: str
    status: int = 0

"""
Text matrix format shared by the CLI:

    m k
    a+bi a+bi ...      (m rows of k entries)

Entries use "i" for the imaginary unit; lines starting with '#' are comments.
"""

from pathlib import Path
from typing import Union

import numpy as np

from .exceptions import InvalidParameterError, ShapeMismatchError


def _parse_entry(token: str) -> complex:
    try:
        return complex(token[:-1] + "j" if token.endswith("i") else token)
    except ValueError as e:
        raise InvalidParameterError(f"cannot parse matrix entry '{token}'") from e


def _format_entry(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def read_matrix(path: Union[str, Path]) -> np.ndarray:
    with open(path, "r") as f:
        lines = [line.split("#", 1)[0].strip() for line in f]
    lines = [line for line in lines if line]
    if not lines:
        raise InvalidParameterError(f"matrix file {path} is empty")
    try:
        m, k = (int(v) for v in lines[0].split())
    except ValueError as e:
        raise InvalidParameterError(f"matrix file {path}: header must be 'rows cols'") from e
    tokens = [t for line in lines[1:] for t in line.split()]
    if len(tokens) != m * k:
        raise ShapeMismatchError(f"matrix file {path}: header says {m}x{k}, found {len(tokens)} entries")
    return np.array([_parse_entry(t) for t in tokens], dtype=complex).reshape(m, k)


def write_matrix(path: Union[str, Path], matrix: np.ndarray) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    with open(path, "w") as f:
        f.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for row in matrix:
            f.write(" ".join(_format_entry(z) for z in row) + "\n")

"""JSON serialization of states and spectra.

States use ``{"kind": "pure"|"density", "dimA": n, "dimB": m, "data": [[re, im], ...]}``
with density data flattened row-major. Numbers are written with 17 significant
digits so a write/read round trip reproduces every float exactly.
"""

import json
from typing import Union

import numpy as np

from .errors import EntcatError
from .qcore import DensityMatrix, PureState

State = Union[PureState, DensityMatrix]


class StateFormatError(EntcatError):
    """Malformed state or spectrum JSON."""


def _num(x: float) -> str:
    if not np.isfinite(x):
        raise StateFormatError(f"non-finite number {x!r}")
    return format(float(x), ".17g")


def _pairs(values: np.ndarray) -> str:
    return "[" + ",".join(f"[{_num(z.real)},{_num(z.imag)}]" for z in values) + "]"


def dumps_state(state: State) -> str:
    if isinstance(state, PureState):
        kind, data = "pure", state.amplitudes
    elif isinstance(state, DensityMatrix):
        kind, data = "density", state.matrix.reshape(-1)
    else:
        raise StateFormatError(f"cannot serialize {type(state).__name__}")
    return (f'{{"kind":"{kind}","dimA":{state.dim_a},"dimB":{state.dim_b},'
            f'"data":{_pairs(np.asarray(data, dtype=complex))}}}')


def state_from_dict(obj) -> State:
    if not isinstance(obj, dict):
        raise StateFormatError("state must be a JSON object")
    missing = {"kind", "dimA", "dimB", "data"} - obj.keys()
    if missing:
        raise StateFormatError(f"missing keys: {sorted(missing)}")
    kind, da, db = obj["kind"], obj["dimA"], obj["dimB"]
    if not (isinstance(da, int) and isinstance(db, int)) or da < 1 or db < 1:
        raise StateFormatError("dimA and dimB must be positive integers")
    try:
        arr = np.asarray(obj["data"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateFormatError(f"bad data array: {exc}") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise StateFormatError("data must be a list of [re, im] pairs")
    values = arr[:, 0] + 1j * arr[:, 1]
    n = da * db
    if kind == "pure":
        if values.size != n:
            raise StateFormatError(f"pure state needs {n} amplitudes, got {values.size}")
        return PureState(values, da, db)
    if kind == "density":
        if values.size != n * n:
            raise StateFormatError(f"density matrix needs {n * n} entries, got {values.size}")
        return DensityMatrix(values.reshape(n, n), da, db)
    raise StateFormatError(f"unknown kind {kind!r}")


def loads_state(text: str) -> State:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"invalid JSON: {exc}") from None
    return state_from_dict(obj)


def read_state(path: str) -> State:
    with open(path) as fh:
        return loads_state(fh.read())


def write_state(state: State, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_state(state) + "\n")


def dumps_spectrum(values) -> str:
    return "[" + ",".join(_num(x) for x in np.asarray(values, dtype=float)) + "]"


def loads_spectrum(text: str) -> np.ndarray:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, list) or not obj or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
        raise StateFormatError("spectrum must be a non-empty JSON array of numbers")
    return np.asarray(obj, dtype=float)

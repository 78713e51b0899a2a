import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entcat import presets
from entcat.io import (StateFormatError, dumps_spectrum, dumps_state, loads_spectrum,
                       loads_state, read_state, write_state)
from entcat.qcore import DensityMatrix, PureState, random_density, random_pure_state


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_pure_round_trip_is_exact(da, db, seed):
    psi = random_pure_state(da, db, np.random.default_rng(seed))
    back = loads_state(dumps_state(psi))
    assert isinstance(back, PureState) and (back.dim_a, back.dim_b) == (da, db)
    assert np.array_equal(back.amplitudes, psi.amplitudes)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_density_round_trip_is_exact(da, db, seed):
    rho = random_density(da, db, np.random.default_rng(seed))
    back = loads_state(dumps_state(rho))
    assert isinstance(back, DensityMatrix)
    assert np.max(np.abs(back.matrix - rho.matrix)) <= 1e-15


def test_format_layout():
    obj = json.loads(dumps_state(presets.bell_state()))
    assert obj["kind"] == "pure" and obj["dimA"] == 2 and obj["dimB"] == 2
    assert len(obj["data"]) == 4 and obj["data"][1] == [0, 0]
    dens = json.loads(dumps_state(presets.bell_state().density()))
    assert dens["kind"] == "density" and len(dens["data"]) == 16
    assert dens["data"][3][0] == pytest.approx(0.5)  # row 0, column 3: row-major


def test_seventeen_significant_digits():
    text = dumps_spectrum([0.1, 0.9])
    assert text == "[0.10000000000000001,0.90000000000000002]"
    assert np.array_equal(loads_spectrum(text), [0.1, 0.9])


def test_file_round_trip(tmp_path):
    path = tmp_path / "s.json"
    write_state(presets.source_state(), str(path))
    back = read_state(str(path))
    assert np.array_equal(back.amplitudes, presets.source_state().amplitudes)


@pytest.mark.parametrize("text", [
    "{bad",
    "[1, 2]",
    '{"kind": "pure", "dimA": 2, "dimB": 2}',
    '{"kind": "mixed", "dimA": 1, "dimB": 1, "data": [[1, 0]]}',
    '{"kind": "pure", "dimA": 2, "dimB": 2, "data": [[1, 0]]}',
    '{"kind": "pure", "dimA": 0, "dimB": 2, "data": []}',
    '{"kind": "pure", "dimA": 1, "dimB": 1, "data": [[1, 0, 0]]}',
    '{"kind": "pure", "dimA": 1, "dimB": 1, "data": [["a", 0]]}',
])
def test_malformed_states(text):
    with pytest.raises(StateFormatError):
        loads_state(text)


def test_unnormalized_state_rejected_by_validation():
    with pytest.raises(ValueError):
        loads_state('{"kind": "pure", "dimA": 1, "dimB": 2, "data": [[1, 0], [1, 0]]}')


@pytest.mark.parametrize("text", ["[]", "{}", "[true]", '["x"]', "nope"])
def test_malformed_spectra(text):
    with pytest.raises(StateFormatError):
        loads_spectrum(text)

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monolab.errors import DomainError
from monolab.io import (
    RunReport,
    dumps,
    dumps_state,
    load_state,
    loads_state,
    scan_csv,
    state_from_dict,
    state_to_dict,
    write_atomic,
)
from monolab.states import RandomSpec, bell_state, random_state, w_state


class TestStateFiles:
    def test_pure_layout(self):
        d = state_to_dict(bell_state(), label="bell")
        assert d["type"] == "pure" and d["dims"] == [2, 2] and d["label"] == "bell"
        assert d["data"][0] == pytest.approx([2**-0.5, 0.0])

    def test_mixed_round_trip(self):
        s = random_state((2, 3), RandomSpec(1, 2, "induced_mixed", 2))
        back = loads_state(dumps_state(s))
        assert not back.is_pure
        assert np.array_equal(back.density(), s.density())

    def test_length_checked(self):
        d = state_to_dict(bell_state())
        d["data"] = d["data"][:3]
        with pytest.raises(DomainError, match="4 entries"):
            state_from_dict(d)

    def test_invariants_checked(self):
        d = state_to_dict(bell_state())
        d["data"][0] = [1.0, 0.0]
        with pytest.raises(DomainError, match="norm"):
            state_from_dict(d)

    @pytest.mark.parametrize("text", ["{", '{"dims": [2]}', '{"dims": [2], "type": "odd", "data": [[1, 0], [0, 0]]}'])
    def test_malformed(self, text):
        with pytest.raises(DomainError):
            loads_state(text)

    def test_file(self, tmp_path):
        p = tmp_path / "w3.json"
        write_atomic(p, dumps_state(w_state(3), seed={"master_seed": 0}))
        assert load_state(p).dims == (2, 2, 2)
        assert json.loads(p.read_text())["seed"] == {"master_seed": 0}


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), rank=st.one_of(st.none(), st.integers(1, 3)),
       dims=st.sampled_from([(2, 2), (2, 3), (2, 2, 2), (3, 2, 2)]))
def test_serialization_is_byte_stable(seed, rank, dims):
    spec = RandomSpec(seed, 0) if rank is None else RandomSpec(seed, 0, "induced_mixed", rank)
    text = dumps_state(random_state(dims, spec))
    assert dumps_state(loads_state(text)) == text


class TestReports:
    def test_nan_becomes_null(self):
        assert json.loads(dumps({"x": float("nan"), "y": np.float64(2.5)})) == {"x": None, "y": 2.5}

    def test_payload_excludes_wall_time(self):
        a = RunReport(["monolab", "x"], 0, "T", {"v": 1}, wall_time=1.0)
        b = RunReport(["monolab", "x"], 0, "T", {"v": 1}, wall_time=2.0)
        assert a.payload_json() == b.payload_json()
        assert json.loads(a.dumps())["command"] == ["monolab", "x"]

    def test_scan_csv(self):
        text = scan_csv([{"exponent": 1.0, "worst_residual": -0.5, "witness_id": "sample:3"}])
        assert text.splitlines() == ["exponent,worst_residual,witness_id", "1.0,-0.5,sample:3"]

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        p = tmp_path / "out.csv"
        write_atomic(p, "a\n")
        write_atomic(p, "b\n")
        assert p.read_text() == "b\n"
        assert [f.name for f in tmp_path.iterdir()] == ["out.csv"]

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            write_atomic(tmp_path / "missing" / "x.json", "{}")

import json
import math

import numpy as np
import pytest

from varifold_lab.reports import (
    TOLERANCE_PROFILES,
    canonical_dumps,
    collect_flags,
    file_digest,
    new_report,
    sanitize,
    write_report,
)


def test_canonical_dumps_is_deterministic():
    doc_a = {"b": 1, "a": [2.5, {"y": True, "x": None}]}
    doc_b = {"a": [2.5, {"x": None, "y": True}], "b": 1}
    assert canonical_dumps(doc_a) == canonical_dumps(doc_b)
    text = canonical_dumps(doc_a)
    assert text.endswith("\n")
    assert ": " not in text  # compact separators
    assert json.loads(text) == {"a": [2.5, {"x": None, "y": True}], "b": 1}


def test_sanitize_non_finite_floats():
    doc = {"nan": float("nan"), "pos": float("inf"), "neg": float("-inf")}
    assert sanitize(doc) == {"nan": "nan", "pos": "inf", "neg": "-inf"}
    # the encoded document is strict JSON
    json.loads(canonical_dumps(doc))


def test_sanitize_numpy_scalars_and_arrays():
    doc = {
        "arr": np.array([[1.0, 2.0], [3.0, float("nan")]]),
        "i": np.int64(7),
        "f": np.float64(0.5),
        "b": np.bool_(True),
        "keys": {np.int64(3): "three"},
    }
    got = sanitize(doc)
    assert got["arr"] == [[1.0, 2.0], [3.0, "nan"]]
    assert got["i"] == 7 and isinstance(got["i"], int)
    assert got["f"] == 0.5 and isinstance(got["f"], float)
    assert got["b"] is True
    assert got["keys"] == {"3": "three"}


def test_file_digest_matches_hashlib(tmp_path):
    import hashlib

    path = tmp_path / "blob.bin"
    data = bytes(range(256)) * 100
    path.write_bytes(data)
    assert file_digest(str(path)) == hashlib.sha256(data).hexdigest()


def test_new_report_skeleton(tmp_path):
    path = tmp_path / "in.json"
    path.write_text("{}\n")
    doc = new_report(str(path), "default")
    assert doc["tool"] == "varifold-lab"
    assert doc["tolerance_profile"] == "default"
    assert doc["analyses"] == {}
    assert doc["input"]["sha256"] == file_digest(str(path))
    assert "input" not in new_report(None, "strict")
    with pytest.raises(ValueError, match="unknown tolerance profile"):
        new_report(None, "sloppy")


def test_tolerance_profiles_are_nested():
    assert set(TOLERANCE_PROFILES) == {"strict", "default", "coarse"}
    keys = set(TOLERANCE_PROFILES["default"])
    for name, prof in TOLERANCE_PROFILES.items():
        assert set(prof) == keys, name
    for key in keys:
        s, d, c = (TOLERANCE_PROFILES[p][key] for p in ("strict", "default", "coarse"))
        if key == "monotonicity_slack":  # allowed slack is negative
            assert s >= d >= c
        else:
            assert s <= d <= c


def test_collect_flags_walks_nested_paths():
    doc = {
        "analyses": {
            "density": {"passed": True, "theta": 1.5},
            "items": [{"passed": False}, {"passed": True}],
        },
        "passed": True,
    }
    flags = collect_flags(doc)
    assert ("analyses.density", True) in flags
    assert ("analyses.items[0]", False) in flags
    assert ("analyses.items[1]", True) in flags
    assert ("report", True) in flags
    assert len(flags) == 4


def test_write_report_file_and_stdout(tmp_path, capsys):
    doc = {"z": 1, "a": math.pi}
    out = tmp_path / "r.json"
    write_report(doc, str(out))
    assert out.read_text() == canonical_dumps(doc)
    write_report(doc, None)
    assert capsys.readouterr().out == canonical_dumps(doc)

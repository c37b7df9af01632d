# test_config_and_reports.py
import json
import math
import re

import numpy as np
import pandas as pd
import pytest

from config import (
    CountConfig,
    DetEventConfig,
    MatrixDocument,
    ModelSpecDocument,
    WegnerConfig,
    dump_config,
    load_config,
    validate_document,
)
from errors import ConfigError
from evaluator import PropertyResult
from file_utils import dump_json, load_json, load_matrix, save_json
from hermitian_core import HermitianMatrix
from random_models import Family
from report_generator import (
    COUNT_COLUMNS,
    MC_COLUMNS,
    mc_frame,
    render_verify_table,
    write_count_csv,
    write_mc_csv,
    write_mc_json,
)
from wegner_mc import McReport

MATRIX = {"dim": 2, "re": [[0.05, 0.0], [0.0, 3.0]]}


def mc_reports():
    return [
        McReport(eps=0.1, m=1, trials=100, successes=12, p_hat=0.12, ci_low=0.07, ci_high=0.2, bound_value=0.5, seed=42),
        McReport(eps=0.1, m=2, trials=100, successes=0, p_hat=0.0, ci_low=0.0, ci_high=0.037, bound_value=math.inf, seed=42),
    ]


# ---------- JSON loading ----------

def test_json_syntax_error_names_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"a": }', encoding="utf-8")
    with pytest.raises(ConfigError, match=re.escape(f"{path}:1:7")):
        load_json(path)


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_json(tmp_path / "absent.json")


def test_dump_json_is_sorted_and_stable():
    text = dump_json({"b": 1, "a": [1.5, None]})
    assert text == '{\n  "a": [\n    1.5,\n    null\n  ],\n  "b": 1\n}\n'
    with pytest.raises(ValueError):
        dump_json({"x": math.inf})


def test_matrix_file_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    raw = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    A = HermitianMatrix(raw)
    path = save_json(tmp_path / "a.json", A.to_document())
    np.testing.assert_array_equal(load_matrix(path).entries, A.entries)


# ---------- Config validation ----------

def test_unknown_keys_are_rejected_with_their_path():
    with pytest.raises(ConfigError, match="bogus"):
        validate_document(CountConfig, {"matrix": MATRIX, "eps": [0.1], "bogus": 1})
    with pytest.raises(ConfigError, match="matrix.extra"):
        validate_document(CountConfig, {"matrix": dict(MATRIX, extra=0), "eps": [0.1]})


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"matrix": MATRIX, "eps": [0.0]}, "eps"),
        ({"matrix": MATRIX, "eps": [0.1], "m": [0]}, "m"),
        ({"eps": [0.1]}, "<root>"),
        ({"matrix": {"dim": 3, "re": [[1.0]]}, "eps": [0.1]}, "matrix"),
    ],
)
def test_invalid_count_configs(doc, field):
    with pytest.raises(ConfigError, match=f"field {field}"):
        validate_document(CountConfig, doc, source="count.json")


def test_non_hermitian_matrix_document():
    doc = validate_document(MatrixDocument, {"dim": 2, "re": [[0.0, 1.0], [2.0, 0.0]]})
    with pytest.raises(ValueError, match="not Hermitian"):
        doc.to_matrix()


def test_model_spec_documents():
    spec = validate_document(
        ModelSpecDocument,
        {"family": "anderson", "graph": {"kind": "path", "n": 4}, "site_dist": {"kind": "uniform_interval"}, "hopping_scale": 0.25},
    ).to_spec()
    assert spec.family == Family.ANDERSON and spec.sites == 4
    assert spec.hopping.entries[0, 1] == pytest.approx(0.25)

    bdg = validate_document(
        ModelSpecDocument,
        {"family": "bdg", "graph": {"kind": "grid", "nx": 2, "ny": 2}, "site_dist": {"kind": "uniform_disc"}},
    ).to_spec()
    assert bdg.block_size == 2 and bdg.dim == 8

    with pytest.raises(ConfigError, match="ny"):
        validate_document(ModelSpecDocument, {"family": "anderson", "graph": {"kind": "grid", "nx": 2}, "site_dist": {"kind": "uniform_interval"}})
    with pytest.raises(ConfigError, match="density"):
        validate_document(ModelSpecDocument, {"family": "anderson", "graph": {"kind": "path", "n": 2}, "site_dist": {"kind": "custom"}})


def test_model_source_needs_exactly_one_spec(tmp_path):
    spec_doc = {"family": "anderson", "graph": {"kind": "path", "n": 3}, "site_dist": {"kind": "uniform_interval"}}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec_doc), encoding="utf-8")
    cfg = validate_document(WegnerConfig, {"spec_path": str(path), "eps": [0.1]})
    assert cfg.load_spec().sites == 3
    with pytest.raises(ConfigError):
        validate_document(WegnerConfig, {"spec": spec_doc, "spec_path": str(path), "eps": [0.1]})
    with pytest.raises(ConfigError):
        validate_document(WegnerConfig, {"eps": [0.1]})


def test_det_event_config_checks_shift():
    spec_doc = {"family": "anderson", "graph": {"kind": "path", "n": 1}, "site_dist": {"kind": "uniform_interval"}}
    with pytest.raises(ConfigError, match="field a"):
        validate_document(DetEventConfig, {"spec": spec_doc, "a": 2, "delta": [0.1]})
    with pytest.raises(ConfigError, match="seed"):
        validate_document(DetEventConfig, {"spec": spec_doc, "a": 3, "delta": [0.1], "seed": 2 ** 64})


def test_dump_config_round_trip(tmp_path):
    cfg = validate_document(CountConfig, {"matrix": MATRIX, "eps": [0.1, 0.5]})
    dumped = dump_config(cfg)
    assert dumped["m"] == [1] and dumped["energy"] == 0.0
    path = tmp_path / "count.json"
    path.write_text(json.dumps(dumped), encoding="utf-8")
    assert load_config(path, CountConfig) == cfg


def test_load_config_applies_overrides(tmp_path):
    spec_doc = {"family": "anderson", "graph": {"kind": "path", "n": 2}, "site_dist": {"kind": "uniform_interval"}}
    path = tmp_path / "wegner.json"
    path.write_text(json.dumps({"spec": spec_doc, "eps": [0.1], "seed": 3}), encoding="utf-8")
    cfg = load_config(path, WegnerConfig, {"seed": 9, "trials": None})
    assert cfg.seed == 9
    assert cfg.trials == load_config(path, WegnerConfig).trials
    array = tmp_path / "array.json"
    array.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError, match="top-level value must be an object"):
        load_config(array, WegnerConfig)


# ---------- Reports ----------

def test_mc_frame_columns():
    frame = mc_frame(mc_reports())
    assert list(frame.columns) == MC_COLUMNS
    assert frame["successes"].tolist() == [12, 0]


def test_mc_csv_is_byte_identical_across_writes(tmp_path):
    first = write_mc_csv(tmp_path / "a.csv", mc_reports()).read_bytes()
    second = write_mc_csv(tmp_path / "b.csv", mc_reports()).read_bytes()
    assert first == second
    assert first.decode("utf-8").splitlines()[0] == ",".join(MC_COLUMNS)


def test_mc_json_document(tmp_path):
    path = write_mc_json(tmp_path / "r.json", mc_reports(), summary={"family": "anderson"})
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["summary"] == {"family": "anderson"}
    assert doc["reports"][1]["bound_value"] is None
    assert doc["reports"][1]["rule_of_three"] == pytest.approx(0.03)


def test_count_csv(tmp_path):
    rows = [{"eps": 0.1, "m": 1, "energy": 0.0, "count": 1, "at_least_m": True}]
    frame = pd.read_csv(write_count_csv(tmp_path / "c.csv", rows))
    assert list(frame.columns) == COUNT_COLUMNS
    assert frame["at_least_m"].tolist() == [1]


def test_verify_table():
    results = [
        PropertyResult(name="woodbury_identity", group="core", checked=10, worst_margin=1e-9),
        PropertyResult(name="haynsworth_additivity", group="core", checked=10, violations=1, worst_margin=-1.0),
    ]
    table = render_verify_table(results)
    assert "woodbury_identity" in table and "PASS" in table and "FAIL" in table

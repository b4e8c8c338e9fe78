import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spadesign.data import (
    LiftDataset,
    Membrane,
    TrimPolicy,
    Trial,
    export_table,
    format_table,
    inflation_cut,
    load_dataset,
    load_table,
    map_table,
    map_to_dataset,
    parse_table,
    save_dataset,
    to_samples,
    trim_dataset,
    validate,
)
from spadesign.designvec import DesignVector
from spadesign.errors import ValidationError
from spadesign.material import GentMaterial
from spadesign.membrane import MembraneDesign, force_height_map
from spadesign.surrogate import SurrogateConfig, predict_samples, train


def trial(index=3, height=10.0, pressure=(0.0, 2.0, 5.0, 4.0, 1.0), fracture=False):
    n = len(pressure)
    return Trial(height, index, tuple(float(i) for i in range(n)), tuple(pressure),
                 tuple(2.0 * p for p in pressure), contact=(True,) * n, fracture=fracture)


@pytest.fixture
def ds():
    a = Membrane(DesignVector(30.0, 2.0, (45.0, 5.0)), (trial(1), trial(2), trial(3), trial(3, 20.0)))
    b = Membrane(DesignVector(28.0, 1.5), (trial(3, fracture=True), trial(3, 30.0, (0.0, 1.0, 3.0))))
    return LiftDataset({"m1": a, "m2": b})


def test_empty_dataset_round_trips(tmp_path):
    p = tmp_path / "empty.json"
    save_dataset(LiftDataset(), p)
    back = load_dataset(p)
    assert len(back) == 0
    assert len(to_samples(back)) == 0


def test_json_round_trip(tmp_path, ds):
    p = tmp_path / "ds.json"
    save_dataset(ds, p)
    back = load_dataset(p)
    assert back == ds
    assert json.loads(p.read_text())["membranes"]["m2"]["design"]["ring1"] is None


def test_trim_keeps_selected_trial_and_cuts_at_peak(ds):
    t = trim_dataset(ds)
    a = t.membranes["m1"].trials
    assert [x.index for x in a] == [3, 3]
    assert a[0].pressure == (0.0, 2.0, 5.0)
    assert t.membranes["m2"].trials[0].height == 30.0  # fractured trial dropped
    assert trim_dataset(t) == t
    kept = trim_dataset(ds, TrimPolicy(keep_trial=1, inflation_only=False))
    assert kept.membranes["m1"].trials == (trial(1),)
    with pytest.raises(ValidationError):
        TrimPolicy(keep_trial=4)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=30))
def test_inflation_cut_is_first_argmax(ps):
    t = trial(pressure=tuple(ps))
    c = inflation_cut(t)
    assert len(c) == int(np.argmax(ps)) + 1
    assert max(c.pressure) == max(ps) and c.pressure[-1] == max(ps)
    assert inflation_cut(c) == c


def test_each_plate_height_is_one_test(ds):
    s = to_samples(trim_dataset(ds))
    assert set(s.membrane_ids) == {"m1", "m2"}
    w = s.weights()
    keys = sorted({(m, t) for m, t in zip(s.membrane, s.test)})
    assert len(keys) == 3
    totals = [w[(s.membrane == m) & (s.test == t)].sum() for m, t in keys]
    np.testing.assert_allclose(totals, totals[0], rtol=1e-12)


cells = st.one_of(
    st.none(), st.booleans(), st.integers(-10**6, 10**6),
    st.floats(allow_nan=True, allow_infinity=True), st.text("abc xyz,\"", min_size=1, max_size=6),
)


@given(st.lists(st.lists(cells, min_size=3, max_size=3), max_size=8))
def test_csv_round_trip_is_byte_identical(rows):
    cols = ["a", "b", "c"]
    text = format_table(cols, rows)
    head, back = parse_table(text)
    assert head == cols
    assert format_table(cols, back) == text


def test_csv_floats_round_trip_exactly(tmp_path):
    vals = [math.pi, 1e-300, -2.5e17, 0.1 + 0.2]
    p = tmp_path / "t.csv"
    export_table(["x"], [[v] for v in vals], p)
    _, rows = load_table(p)
    assert [r[0] for r in rows] == vals


def test_header_only_table(tmp_path):
    p = tmp_path / "h.csv"
    text = export_table(["x", "y"], [], p)
    assert text == "x,y\n"
    assert load_table(p) == (["x", "y"], [])
    with pytest.raises(ValidationError):
        parse_table("")
    with pytest.raises(ValidationError):
        format_table(["x"], [[1, 2]])


def test_unknown_fields_warn_but_load(ds):
    d = ds.to_dict()
    d["membranes"]["m1"]["note"] = "hand-logged"
    d["membranes"]["m1"]["trials"][0]["samples"]["temperature"] = [20.0] * 5
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        back = LiftDataset.from_dict(d)
    msgs = [str(x.message) for x in w]
    assert any("membranes/m1/note" in m for m in msgs)
    assert any("trials/0/samples/temperature" in m for m in msgs)
    assert back == ds


@pytest.mark.parametrize(
    "mutate, where",
    [
        (lambda d: d["membranes"]["m1"]["trials"][0].__setitem__("trial", 5), "membranes/m1/trials/0/trial"),
        (lambda d: d["membranes"]["m2"]["design"].__setitem__("thickness_mm", -1), "membranes/m2/design/thickness_mm"),
        (lambda d: d["membranes"]["m1"]["trials"][1]["samples"].pop("force_n"), "membranes/m1/trials/1/samples"),
        (lambda d: d.__setitem__("version", 2), "version"),
    ],
)
def test_schema_errors_name_the_path(ds, mutate, where):
    d = ds.to_dict()
    mutate(d)
    with pytest.raises(ValidationError, match=where):
        validate(d)


def test_semantic_errors_name_the_membrane(ds):
    d = ds.to_dict()
    d["membranes"]["m2"]["trials"][0]["samples"]["force_n"].pop()
    with pytest.raises(ValidationError, match="membranes/m2"):
        LiftDataset.from_dict(d)


def test_bad_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"format": ')
    with pytest.raises(ValidationError, match=":1:"):
        load_dataset(p)


def test_trial_validation():
    with pytest.raises(ValidationError):
        Trial(0.0, 3, (0.0, 1.0), (0.0,), (0.0, 1.0))
    with pytest.raises(ValidationError):
        Trial(0.0, 3, (1.0, 0.0), (0.0, 1.0), (0.0, 1.0))


def test_membrane_map_feeds_the_trainer(tmp_path):
    design = DesignVector(25.4, 2.0)
    md = MembraneDesign.from_mm(2.0, 25.4, GentMaterial.from_kpa(31.7, 39.6))
    rows = force_height_map(md, [2e3, 3e3, 4e3], [0.0, 10.0, 20.0])
    cols, table = map_table(rows)
    assert len(table) == 9 and cols[0] == "pressure_pa"
    ds = map_to_dataset(rows, design, [0.0, 10.0, 20.0])
    p = tmp_path / "map.json"
    save_dataset(ds, p)
    s = to_samples(load_dataset(p))
    assert len(s) == 9 and s.membrane_ids == ["bvp"]
    assert np.all(np.isfinite(s.force))
    m = train(s, SurrogateConfig(iterations=30, width=8, depth=1))
    assert np.all(np.isfinite(predict_samples(m, s)))

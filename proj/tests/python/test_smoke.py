import json
import os

import pytest

import varilet

WORKED = [0.0, 2.0, 1.0, 3.0, 0.0]
PEAK_CUT = [(1.0, "up", 3)]


def worked():
    return varilet.Field.from_series(WORKED)


def test_ttv_of_the_worked_series():
    f = worked()
    assert varilet.ttv(f) == 8.0
    assert varilet.classic_tv_1d(f) == 8.0
    assert varilet.count_contours(f, 0.5) == 2


def test_middle_space_is_a_four_edge_chain():
    m = varilet.middle_space(worked())
    assert m["format"] == "varilet.middle"
    assert len(m["vertices"]) == 5
    assert len(m["edges"]) == 4


def test_transform_and_filter():
    basis = varilet.transform(worked(), cuts=PEAK_CUT)
    assert basis.amplitudes == [2.0, 6.0]
    assert basis.varilets[0][:5] == [0.0, 0.5, 0.5, 0.5, 0.0]
    assert basis.varilets[1][:5] == pytest.approx([0, 1 / 6, 0, 2 / 6, 0], abs=0)
    assert varilet.filter(basis, basis.amplitudes).values == WORKED
    assert varilet.filter(basis, [2.0, 0.0]).values == [0.0, 1.0, 1.0, 1.0, 0.0]
    assert len(varilet.filter(basis, [2.0, 0.0], refined=True)) == 7


def test_lens_documents_and_basis_documents_round_trip():
    lens = varilet.build_lens(worked(), cuts=PEAK_CUT)
    assert lens["regions"][0]["kind"] == "root"
    basis = varilet.transform(worked(), lens=lens)
    again = varilet.Basis.from_json(basis.to_json())
    assert again.amplitudes == basis.amplitudes
    assert json.loads(again.to_json()) == json.loads(basis.to_json())


def test_branch_lens():
    basis = varilet.transform(worked(), branch=True)
    assert len(basis) == 3
    assert sum(basis.amplitudes) == 8.0


def test_errors_map_to_python_exceptions():
    with pytest.raises(varilet.ParseError):
        varilet.Field.from_series([1.0])
    with pytest.raises(varilet.LensError):
        varilet.transform(worked(), cuts=[(1.0, "up", 42)])
    basis = varilet.transform(worked(), cuts=PEAK_CUT)
    with pytest.raises(varilet.CoefficientError):
        varilet.filter(basis, [1.0, 2.0, 3.0])
    with pytest.raises(varilet.DegenerateFieldError):
        varilet.transform(varilet.Field.from_series([1.0, 1.0]))
    assert issubclass(varilet.LensError, varilet.VariletError)


def test_verify_and_fault_injection():
    report = varilet.verify(worked(), lens=varilet.build_lens(worked(), cuts=PEAK_CUT), trials=10)
    assert all(c["passed"] for c in report["checks"])
    broken = varilet.verify(worked(), lens=varilet.build_lens(worked(), cuts=PEAK_CUT), trials=5, fault="amplitude")
    assert not all(c["passed"] for c in broken["checks"])


def test_small_fuzz_run_is_clean():
    report = varilet.fuzz(seed=3, fields=4, max_vertices=30, trials=3)
    assert all(c["passed"] for c in report["checks"])


def test_graph_field_from_json():
    doc = {
        "vertices": [{"id": 0, "value": 0}, {"id": 1, "value": 2}],
        "edges": [{"id": 0, "endpoints": [0, 1]}, {"id": 1, "endpoints": [1, 0]}],
    }
    f = varilet.Field.from_json(json.dumps(doc))
    assert varilet.ttv(f) == 4.0


def test_svg_output_is_deterministic():
    a = varilet.field_svg(worked())
    assert a.startswith("<svg") and a == varilet.field_svg(worked())
    basis = varilet.transform(worked(), cuts=PEAK_CUT)
    assert varilet.basis_svg(basis).count("<polyline") == 2


def test_reading_the_csv_fixture():
    data = os.environ.get("VARILET_DATA")
    if not data:
        pytest.skip("fixture directory not provided")
    assert varilet.ttv(varilet.Field.read(os.path.join(data, "worked.csv"))) == 8.0

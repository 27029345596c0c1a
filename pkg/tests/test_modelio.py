import json

import numpy as np
import pytest

from covkit import modelio, scenarios
from covkit.errors import ModelParseError, WellPosednessError


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def assert_same_model(a, b):
    for k in "ABCD":
        np.testing.assert_array_equal(getattr(a, k), getattr(b, k), err_msg=k)


class TestBundled:
    def test_first_order(self):
        assert_same_model(modelio.load_model("first_order.json").model, scenarios.first_order_model())

    def test_mimo(self):
        assert_same_model(modelio.load_model("mimo.json").model, scenarios.mimo_model())

    @pytest.mark.parametrize("name,scale,shaping", [
        ("satellite/nominal_f1.json", 1.0, "F1"),
        ("satellite/nominal_f2.json", 1.0, "F2"),
        ("satellite/slow_f2.json", 0.25, "F2"),
    ])
    def test_satellite_recipes_match_python(self, name, scale, shaping):
        mf = modelio.load_model(name)
        assert_same_model(mf.model, scenarios.satellite_closed_loop(scale, shaping))
        assert mf.loops and all(abs(det) > 0.5 for _, det in mf.loops)

    @pytest.mark.parametrize("name,scale", [
        ("satellite/sensitivity_nominal.json", 1.0),
        ("satellite/sensitivity_slow.json", 0.25),
    ])
    def test_sensitivity_recipes_match_python(self, name, scale):
        assert_same_model(modelio.load_model(name).model,
                          scenarios.satellite_input_sensitivity(scale))

    def test_plant_labels(self):
        named = modelio.load_model("satellite/nominal_f1.json").named
        assert named["plant"].output_labels == ("Phi", "Theta", "Psi")


class TestParsing:
    def test_plain_realization(self, tmp_path):
        p = write(tmp_path, "m.json", {"A": [[-1, 0], [0, -2]], "B": [[1], [1]], "C": [[1, 1]]})
        m = modelio.load_model(p).model
        assert (m.n_x, m.n_u, m.n_p) == (2, 1, 1)
        np.testing.assert_array_equal(m.D, [[0.0]])

    def test_syntax_error_reports_line_and_column(self, tmp_path):
        p = write(tmp_path, "bad.json", '{"A": [[-1]],\n  "B": [[1]]\n  "C": [[1]]}')
        with pytest.raises(ModelParseError, match=r"line 3, column 3"):
            modelio.load_model(p)

    def test_missing_matrix(self, tmp_path):
        p = write(tmp_path, "m.json", {"A": [[-1]], "B": [[1]]})
        with pytest.raises(ModelParseError, match="C"):
            modelio.load_model(p)

    def test_ragged_rows(self, tmp_path):
        p = write(tmp_path, "m.json", {"A": [[-1, 0], [0]], "B": [[1], [1]], "C": [[1, 1]]})
        with pytest.raises(ModelParseError, match="ragged"):
            modelio.load_model(p)

    def test_shape_mismatch_is_a_parse_error(self, tmp_path):
        p = write(tmp_path, "m.json", {"A": [[-1]], "B": [[1], [2]], "C": [[1]]})
        with pytest.raises(ModelParseError):
            modelio.load_model(p)

    def test_unknown_tf_type(self, tmp_path):
        p = write(tmp_path, "m.json", {"tf_blocks": [[{"type": "lead_lag"}]]})
        with pytest.raises(ModelParseError, match="lead_lag"):
            modelio.load_model(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelParseError, match="no such file"):
            modelio.load_model(tmp_path / "nope.json")

    def test_top_level_not_object(self, tmp_path):
        with pytest.raises(ModelParseError):
            modelio.load_model(write(tmp_path, "m.json", "[1, 2]"))


class TestRecipes:
    def test_feedback_recipe(self, tmp_path):
        p = write(tmp_path, "loop.json", {
            "subsystems": {"integ": {"A": [[0.0]], "B": [[1.0]], "C": [[1.0]]},
                           "unity": {"identity": 1}},
            "steps": [{"name": "closed", "op": "feedback", "plant": "integ",
                       "controller": "unity", "sign": -1}],
        })
        mf = modelio.load_model(p)
        np.testing.assert_allclose(mf.model.A, [[-1.0]])
        assert mf.loops == [("closed", 1.0)]

    def test_ill_posed_loop(self, tmp_path):
        p = write(tmp_path, "loop.json", {
            "subsystems": {"g": {"gain": [[1.0]]}},
            "steps": [{"name": "bad", "op": "feedback", "plant": "g", "controller": "g", "sign": 1}],
        })
        with pytest.raises(ModelParseError):
            modelio.load_model(p)

    def test_unknown_op(self, tmp_path):
        p = write(tmp_path, "r.json", {"subsystems": {"g": {"gain": [[1.0]]}},
                                       "steps": [{"name": "x", "op": "parallel"}]})
        with pytest.raises(ModelParseError, match="parallel"):
            modelio.load_model(p)

    def test_unresolved_name(self, tmp_path):
        p = write(tmp_path, "r.json", {"subsystems": {"g": {"gain": [[1.0]]}},
                                       "steps": [{"name": "x", "op": "series", "chain": ["g", "h"]}]})
        with pytest.raises(ModelParseError, match="h"):
            modelio.load_model(p)

    def test_include_cycle(self, tmp_path):
        write(tmp_path, "a.json", {"include": ["b.json"], "subsystems": {}})
        write(tmp_path, "b.json", {"include": ["a.json"], "subsystems": {}})
        with pytest.raises(ModelParseError, match="cycle"):
            modelio.load_model(tmp_path / "a.json")

    def test_file_reference(self, tmp_path):
        write(tmp_path, "plant.json", {"A": [[-2.0]], "B": [[1.0]], "C": [[3.0]]})
        p = write(tmp_path, "r.json", {"subsystems": {"p": {"file": "plant.json"}}, "output": "p"})
        np.testing.assert_array_equal(modelio.load_model(p).model.C, [[3.0]])


class TestDump:
    @pytest.mark.parametrize("name", ["mimo.json", "satellite/nominal_f2.json"])
    def test_round_trip(self, tmp_path, name):
        model = modelio.load_model(name).model
        out = tmp_path / "dump.json"
        modelio.dump_model(model, out)
        again = modelio.load_model(out).model
        for k in "ABCD":
            a, b = getattr(model, k), getattr(again, k)
            np.testing.assert_allclose(b, a, rtol=1e-14, atol=0)
        assert not list(tmp_path.glob(".*.tmp"))

    def test_atomic_write_replaces(self, tmp_path):
        p = tmp_path / "f.txt"
        p.write_text("old")
        modelio.atomic_write_text(p, "new")
        assert p.read_text() == "new"


def test_feedback_ill_posed_direct():
    from covkit import ss
    with pytest.raises(WellPosednessError):
        ss.feedback(ss.static_gain([[2.0]]), ss.static_gain([[0.5]]), +1)

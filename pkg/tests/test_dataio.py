import pytest

from gds import (
    csv_text,
    doc_to_gds,
    emit_gds,
    gds_to_doc,
    parse_gds,
    singleton_gds,
)
from gds.errors import SchemaError
from gds.numerics import EXACT, FLOAT, Q
from gds.spaces import random_gds


class TestRoundTrip:
    def test_exact(self):
        for seed in range(5):
            X = random_gds(3, 2, seed=seed)
            assert parse_gds(emit_gds(X)) == X

    def test_float(self):
        X = random_gds(3, 2, seed=9, mode=FLOAT)
        Y = parse_gds(emit_gds(X), mode=FLOAT)
        assert Y.mode == FLOAT
        assert all(
            abs(a - b) < 1e-12
            for ra, rb in zip(X.features.rows, Y.features.rows)
            for a, b in zip(ra, rb)
        )

    def test_exact_document_readable_in_float_mode(self):
        X = singleton_gds([Q(3, 8)])
        Y = parse_gds(emit_gds(X), mode=FLOAT)
        assert Y.features.rows[0][0] == 0.375

    def test_doc_preserves_labels(self):
        X = random_gds(2, 2, seed=3)
        doc = gds_to_doc(X)
        assert doc["points"] == list(X.point_labels)
        assert list(doc["features"]) == list(X.features.labels)
        assert doc_to_gds(doc) == X

    def test_emitted_text_is_stable(self):
        X = random_gds(2, 2, seed=4)
        assert emit_gds(X) == emit_gds(parse_gds(emit_gds(X)))


class TestSchemaValidation:
    def good(self):
        return {
            "points": ["a", "b"],
            "weights": ["1/2", "1/2"],
            "features": {"f": ["0", "1"]},
        }

    def test_good_document_passes(self):
        X = doc_to_gds(self.good())
        assert X.n == 2 and X.k == 1

    @pytest.mark.parametrize(
        "mangle",
        [
            lambda d: d.pop("points"),
            lambda d: d.pop("weights"),
            lambda d: d.pop("features"),
            lambda d: d.update(extra=1),
            lambda d: d.update(points="ab"),
            lambda d: d.update(points=["a", 7]),
            lambda d: d.update(points=[]),
            lambda d: d.update(weights=["1/2"]),
            lambda d: d.update(weights=["1/2", "zebra"]),
            lambda d: d.update(features={}),
            lambda d: d.update(features={"f": ["0"]}),
            lambda d: d.update(features={"f": ["0", True]}),
            lambda d: d.update(features=["0", "1"]),
        ],
    )
    def test_mangled_documents_rejected(self, mangle):
        doc = self.good()
        mangle(doc)
        with pytest.raises(SchemaError):
            doc_to_gds(doc)

    def test_non_dict_rejected(self):
        with pytest.raises(SchemaError):
            doc_to_gds([1, 2, 3])

    def test_invalid_json_rejected(self):
        with pytest.raises(SchemaError):
            parse_gds("{not json")

    def test_float_literal_rejected_in_exact_mode(self):
        doc = self.good()
        doc["weights"] = [0.5, 0.5]
        with pytest.raises(SchemaError):
            doc_to_gds(doc, mode=EXACT)

    def test_unseparated_points_rejected(self):
        doc = self.good()
        doc["features"] = {"f": ["0", "0"]}
        with pytest.raises(SchemaError):
            doc_to_gds(doc)


class TestCsv:
    def test_layout(self):
        text = csv_text(["a", "b"], [[1, 2], ["x", Q(1, 2)]])
        assert text == "a,b\n1,2\nx,1/2\n"

    def test_quoting(self):
        text = csv_text(["v"], [["needs,comma"]])
        assert text == 'v\n"needs,comma"\n'

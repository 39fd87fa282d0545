"""DOT/JSON export: formatting contract and byte-stable round trips."""

import json

import numpy as np
import pytest

from pfsgraph.export import estimate_from_dict, export_graph, load_estimate, save_estimate
from pfsgraph.graphs import EdgeInfo, LocalGraphEstimate, QMatrix


def make_estimate(p=6, entries=None, layer=None, names=None, groups=None):
    entries = entries or {}
    values = np.ones((p, p))
    for (j, k), v in entries.items():
        values[j - 1, k - 1] = values[k - 1, j - 1] = v
    return LocalGraphEstimate(
        targets=frozenset({1}), radius=2, qmatrix=QMatrix(values),
        layer=layer or {1: 0},
        edge_info={e: EdgeInfo(efp=0.01, radius=1) for e in entries},
        names=names, groups=groups or {},
        config_hash="cafe0123",
    )


class TestDot:
    def test_empty_estimate_lists_isolated_targets(self):
        dot = export_graph(make_estimate(), "dot")
        assert dot.splitlines()[0] == "// format: pfsgraph-dot/1"
        assert '  n1 [label="X1", layer=0];' in dot
        assert "--" not in dot

    def test_edge_label_rounded_to_three_decimals(self):
        dot = export_graph(make_estimate(entries={(1, 2): 0.27}, layer={1: 0, 2: 1}), "dot")
        assert 'n1 -- n2 [label="0.270"];' in dot

    def test_names_and_groups_attributes(self):
        est = make_estimate(
            p=3, entries={(1, 2): 0.5}, layer={1: 0, 2: 1},
            names=("incidence", "smoking", "spare"), groups={1: "outcome"},
        )
        dot = export_graph(est, "dot")
        assert 'n1 [label="incidence", layer=0, group="outcome"];' in dot
        assert 'n2 [label="smoking", layer=1];' in dot

    def test_non_admitted_endpoint_has_no_layer_attr(self):
        est = make_estimate(entries={(1, 4): 0.2}, layer={1: 0})
        dot = export_graph(est, "dot")
        assert '  n4 [label="X4"];' in dot


class TestJsonRoundTrip:
    def test_export_parse_export_is_byte_identical(self):
        est = make_estimate(entries={(1, 2): 0.3, (2, 5): 0.12}, layer={1: 0, 2: 1, 5: 2})
        first = export_graph(est, "json")
        second = export_graph(estimate_from_dict(json.loads(first)), "json")
        assert first == second

    def test_save_load_preserves_structure(self, tmp_path):
        est = make_estimate(entries={(1, 3): 0.07}, layer={1: 0, 3: 1},
                            names=("a", "b", "c", "d", "e", "f"))
        path = tmp_path / "estimate.json"
        save_estimate(est, path)
        back = load_estimate(path)
        assert back.targets == est.targets
        assert back.radius == est.radius
        assert back.layer == est.layer
        assert np.array_equal(back.qmatrix.values, est.qmatrix.values)
        assert back.edge_info[(1, 3)].efp == pytest.approx(0.01)
        assert back.names[0] == "a"
        assert back.config_hash == "cafe0123"

    def test_schema_fields_present(self):
        doc = json.loads(export_graph(make_estimate(entries={(1, 2): 0.5}, layer={1: 0, 2: 1}), "json"))
        assert doc["format_version"] == 1
        assert set(doc) == {"format_version", "p", "radius", "targets", "config_hash", "nodes", "edges"}
        assert all(set(n) == {"id", "name", "layer", "group"} for n in doc["nodes"])
        assert all(set(e) == {"a", "b", "q", "efp", "radius"} for e in doc["edges"])

    def test_unknown_version_rejected(self):
        doc = json.loads(export_graph(make_estimate(), "json"))
        doc["format_version"] = 99
        with pytest.raises(ValueError):
            estimate_from_dict(doc)

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            export_graph(make_estimate(), "yaml")

    def test_orderings_are_stable(self):
        # same estimate assembled with different dict insertion orders
        a = make_estimate(entries={(1, 2): 0.4, (1, 5): 0.2}, layer={1: 0, 2: 1, 5: 1})
        b = LocalGraphEstimate(
            targets=a.targets, radius=a.radius, qmatrix=a.qmatrix,
            layer={5: 1, 1: 0, 2: 1},
            edge_info={(1, 5): EdgeInfo(efp=0.01, radius=1), (2, 1): EdgeInfo(efp=0.01, radius=1)},
            config_hash="cafe0123",
        )
        assert export_graph(a, "dot") == export_graph(b, "dot")
        assert export_graph(a, "json") == export_graph(b, "json")

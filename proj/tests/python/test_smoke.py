import json
import math
import os

import pytest

import infops

FIXTURES = os.environ.get("INFOPS_FIXTURE_DIR", os.path.join(os.path.dirname(__file__), "..", "fixtures"))


def test_graph_and_centrality():
    g = infops.Graph.load(os.path.join(FIXTURES, "small.edges"))
    assert g.node_count == 6
    assert g.edge_count == 10
    pr = infops.pagerank(g)
    assert math.isclose(sum(pr), 1.0, rel_tol=1e-12)
    assert infops.betweenness(infops.path_graph(4)) == [0.0, 2.0, 2.0, 0.0]


def test_bad_input_raises():
    with pytest.raises(infops.ParseError):
        infops.Graph.parse("a,b\nc\n")
    with pytest.raises(infops.Error):
        infops.Graph(2, [(0, 0, 1.0)])


def test_communities():
    g, truth = infops.planted_partition(3, 15, 0.9, 0.02, seed=42)
    k, q, labels = infops.select_k(g, 2, 6, seed=1)
    assert k == 3
    assert infops.nmi(labels, truth) >= 0.95
    assert math.isclose(infops.modularity(g, labels), q)


def test_diffusion_and_hawkes():
    mean, se = infops.expected_spread_ic(infops.complete_graph(4), 1.0, [0], replications=10)
    assert (mean, se) == (4.0, 0.0)
    series = infops.sir_ode(2.0, 0.5, 0.99, 0.01, 0.0, 10.0, 0.01)
    assert all(abs(s + i + r - 1.0) < 1e-9 for _, s, i, r in series)
    a = infops.simulate_hawkes(infops.complete_graph(3), 0.2, 0.2, 1.0, 20.0, seed=5)
    b = infops.simulate_hawkes(infops.complete_graph(3), 0.2, 0.2, 1.0, 20.0, seed=5)
    assert a == b


def test_opinions_and_nudging():
    shift = infops.Shift.linear(1.0)
    g = infops.Graph(2, [(0, 1, 1.0), (1, 0, 1.0)])
    times, states = infops.integrate(g, [0.9, 0.1], shift, T=1.0)
    gap = states[-1][0] - states[-1][1]
    assert abs(gap - 0.8 * math.exp(-2.0)) < 1e-6
    c = infops.nudging_policy([0.3], [0], infops.Shift.bounded(1.0, 0.2), [1.0], 0.0)
    assert math.isclose(c, 0.5)


def test_shapley():
    values = infops.shapley_exact(2, lambda s: {0: 0.0, 1: 1.0, 2: 1.0, 3: 3.0}[s])
    assert values == [1.5, 1.5]
    est, se = infops.shapley_mc(3, lambda s: float(bin(s).count("1")), 20, seed=1)
    assert est == [1.0, 1.0, 1.0]


def test_pipeline(tmp_path):
    with open(os.path.join(FIXTURES, "invalid_negative_rate.json")) as f:
        assert len(infops.validate_config(f.read())) == 1
    config = {
        "seed": 3,
        "output_dir": str(tmp_path),
        "graph": {"path": os.path.join(FIXTURES, "small.edges")},
        "stages": ["centrality"],
    }
    code, files, violations, error = infops.run_pipeline(json.dumps(config))
    assert code == 0, error
    assert [p for p, _ in files] == ["centrality.json"]
    with open(tmp_path / "centrality.json", "rb") as f:
        assert infops.sha256_hex(f.read().decode()) == files[0][1]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "ok"

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transversal_bounds.errors import (
    AsymmetricMatrix,
    BadDimension,
    OutOfRange,
    SamePart,
    TooLarge,
    ValidationError,
)
from transversal_bounds.model import (
    DensityMatrix,
    Mode,
    MultipartiteGraph,
    PartSpec,
    realized_density,
    validate_densities,
)


def test_validate_accepts_strings_and_fractions():
    d = validate_densities([[0, "3/4", "0.5"], ["3/4", 0, 0.25], ["0.5", 0.25, 0]])
    assert d.k == 3
    assert d[0, 1] == 0.75
    assert d.fraction(0, 1) == Fraction(3, 4)
    assert d.fraction(0, 2) == Fraction(1, 2)


def test_asymmetric_rejected():
    with pytest.raises(AsymmetricMatrix):
        validate_densities([[0, 0.5], [0.4, 0]])


@pytest.mark.parametrize("bad", [1.2, -0.1, float("nan")])
def test_out_of_range(bad):
    with pytest.raises(OutOfRange):
        validate_densities([[0, bad], [bad, 0]])


def test_bad_shapes():
    with pytest.raises(BadDimension):
        validate_densities([[0]])
    with pytest.raises(BadDimension):
        validate_densities([[0, 0.1, 0.2], [0.1, 0, 0.3]])


def test_uniform_and_complement():
    d = DensityMatrix.uniform(4, "1/3")
    c = d.complement()
    assert c.fraction(1, 2) == Fraction(2, 3)
    assert np.all(np.diag(c.d) == 0)


def test_density_json_round_trip():
    d = validate_densities([[0, "1/3", "2/7"], ["1/3", 0, "0.1"], ["2/7", "0.1", 0]])
    back = DensityMatrix.from_json(json.loads(json.dumps(d.to_json())))
    assert back == d
    assert back.fraction(0, 2) == Fraction(2, 7)


def test_partspec():
    p = PartSpec.parse("4, 5,6")
    assert p.n == (4, 5, 6) and p.total == 120 and p.k == 3
    with pytest.raises(ValidationError):
        PartSpec((0, 3))
    with pytest.raises(BadDimension):
        p.check_against(DensityMatrix.uniform(2, 0.5))


def test_graph_basics():
    g = MultipartiteGraph.from_edges(PartSpec((2, 3)), [(0, 0, 1, 2), (1, 1, 0, 1)])
    assert g.has_edge(0, 0, 1, 2) and g.has_edge(1, 2, 0, 0)
    assert not g.has_edge(0, 1, 1, 2)
    assert g.edge_count(0, 1) == 2
    assert realized_density(g, 0, 1) == Fraction(2, 6)
    assert g.complement().edge_count(0, 1) == 4
    with pytest.raises(SamePart):
        realized_density(g, 1, 1)


def test_same_part_edge_rejected():
    with pytest.raises(SamePart):
        MultipartiteGraph.from_edges(PartSpec((2, 2)), [(0, 0, 0, 1)])


def test_complete_and_empty():
    parts = PartSpec((3, 2, 4))
    assert MultipartiteGraph.complete(parts).edge_count(0, 2) == 12
    assert MultipartiteGraph.empty(parts).edge_count(0, 2) == 0


@settings(max_examples=60, deadline=None)
@given(
    sizes=st.lists(st.integers(1, 6), min_size=2, max_size=4),
    seed=st.integers(0, 2**32 - 1),
)
def test_graph_json_round_trip(sizes, seed):
    rng = np.random.default_rng(seed)
    parts = PartSpec(tuple(sizes))
    blocks = {}
    for i in range(len(sizes)):
        for j in range(i + 1, len(sizes)):
            blocks[(i, j)] = rng.random((sizes[i], sizes[j])) < 0.4
    g = MultipartiteGraph.from_matrices(parts, blocks)
    for (i, j), mat in blocks.items():
        assert np.array_equal(g.bool_matrix(i, j), mat)
        assert np.array_equal(g.bool_matrix(j, i), mat.T)
    back = MultipartiteGraph.from_json(json.loads(json.dumps(g.to_json())))
    assert back == g
    assert back.complement().complement() == g


def test_part_size_cap():
    with pytest.raises((TooLarge, ValidationError)):
        PartSpec((5000, 2))


def test_mode_aliases():
    assert Mode.parse("it") is Mode.INDEPENDENT
    assert Mode.parse("clique") is Mode.CLIQUE
    assert Mode.parse("transversal-clique") is Mode.CLIQUE
    with pytest.raises(ValidationError):
        Mode.parse("bogus")

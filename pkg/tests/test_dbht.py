import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrfilter.dbht import CONVERGING, DIVERGING, dbht, direct_bubble_tree
from corrfilter.errors import DataError, InconsistentInputs
from corrfilter.filtergraph import bubble_tree, pmfg
from corrfilter.linkage import Partition, cut
from corrfilter.metrics import adjusted_rand
from conftest import block_returns, corr_to_dist, random_corr


def glued_k4(r3, r4):
    """Correlations whose PMFG is K5 minus the edge (3, 4): two K4 bubbles
    sharing the triangle (0, 1, 2)."""
    c = np.full((5, 5), 0.6)
    c[3, :3] = c[:3, 3] = r3
    c[4, :3] = c[:3, 4] = r4
    c[3, 4] = c[4, 3] = 0.05
    np.fill_diagonal(c, 1.0)
    return c


def _orient(c):
    g = pmfg(corr_to_dist(c))
    bt = bubble_tree(g)
    dbt = direct_bubble_tree(bt, c, g)
    by_vertex = {next(iter(set(b) - {0, 1, 2})): k for k, b in enumerate(bt.bubbles)}
    return g, bt, dbt, by_vertex


def test_glued_k4_structure_and_direction():
    c = glued_k4(0.5, 0.4)
    g, bt, dbt, bub = _orient(c)
    assert len(g.edges) == 9 and not g.has_edge(3, 4)
    assert sorted(bt.bubbles) == [(0, 1, 2, 3), (0, 1, 2, 4)]
    assert bt.tree_edges[0][2] == (0, 1, 2)
    # attachment 3 * 0.5 beats 3 * 0.4: edge points toward the bubble holding 3
    assert dbt.directions == ((bub[4], bub[3]),)
    assert dbt.flags[bub[3]] == CONVERGING and dbt.flags[bub[4]] == DIVERGING
    c = glued_k4(0.4, 0.5)
    _, _, dbt, bub = _orient(c)
    assert dbt.directions == ((bub[3], bub[4]),)


def test_glued_k4_tie_goes_to_smaller_vertex():
    _, _, dbt, bub = _orient(glued_k4(0.45, 0.45))
    assert dbt.flags[bub[3]] == CONVERGING


def test_single_bubble_and_tiny():
    c = random_corr(4, 0)
    res = dbht(corr_to_dist(c), c)
    assert res.n_cl == 1 and len(res.dendrogram.merges) == 3
    c = random_corr(3, 1)
    res = dbht(corr_to_dist(c), c)
    assert res.partition.labels.tolist() == [0, 0, 0]
    with pytest.raises(DataError):
        dbht(np.zeros((2, 2)), np.ones((2, 2)))


@pytest.mark.parametrize("seed", range(5))
def test_recovers_four_blocks(seed):
    x, lab = block_returns(4, 15, 1000, seed, strength=1.0, noise=0.7)
    c = np.corrcoef(x)
    res = dbht(corr_to_dist(c), c)
    assert res.n_cl == 4
    assert adjusted_rand(res.partition, lab) >= 0.9
    assert adjusted_rand(cut(res.dendrogram, 4), lab) >= 0.9


@pytest.mark.parametrize("seed", range(5))
def test_two_blocks(seed):
    x, lab = block_returns(2, 15, 1000, seed, strength=1.0, noise=0.7)
    c = np.corrcoef(x)
    assert dbht(corr_to_dist(c), c).n_cl == 2


def test_converging_bubbles_lie_inside_blocks():
    x, lab = block_returns(2, 12, 2000, 9, strength=1.0, noise=0.5)
    c = np.corrcoef(x)
    g = pmfg(corr_to_dist(c))
    bt = bubble_tree(g)
    dbt = direct_bubble_tree(bt, c, g)
    assert len(dbt.converging) == 2
    for b in dbt.converging:
        members = np.asarray(bt.bubbles[b])
        assert len(set(lab[members])) == 1


@given(st.integers(0, 10_000), st.integers(5, 40))
def test_cut_reproduces_partition(seed, n):
    c = random_corr(n, seed)
    res = dbht(corr_to_dist(c), c)
    assert cut(res.dendrogram, res.n_cl) == res.partition
    assert res.n_cl == len(res.directed.converging)
    assert sorted(res.partition.sizes.tolist())[0] >= 1


def test_every_vertex_in_a_bubble():
    c = random_corr(30, 5)
    res = dbht(corr_to_dist(c), c)
    bubbles = res.directed.tree.bubbles
    assert set().union(*map(set, bubbles)) == set(range(30))
    assert len(res.directed.directions) == len(bubbles) - 1
    assert any(f == CONVERGING for f in res.directed.flags)


def test_inconsistent_inputs():
    c = random_corr(8, 2)
    d = corr_to_dist(c)
    d[0, 1] = d[1, 0] = d[0, 1] + 1e-6
    with pytest.raises(InconsistentInputs):
        dbht(d, c)


def test_deterministic_and_json(tmp_path):
    c = random_corr(25, 7)
    a, b = dbht(corr_to_dist(c), c), dbht(corr_to_dist(c), c)
    assert a.to_dict() == b.to_dict()
    a.write_json(tmp_path / "d.json")
    doc = json.loads((tmp_path / "d.json").read_text())
    assert doc["n_cl"] == a.n_cl and len(doc["labels"]) == 25
    assert len(doc["merges"]) == 24
    assert Partition(doc["labels"]) == a.partition

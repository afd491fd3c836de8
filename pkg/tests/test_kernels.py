"""Both kernel backends against each other and against independent checks."""
import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrfilter import _kernels, _pycore
from corrfilter.filtergraph import sorted_edges
from conftest import random_distance
from oracles import pam_optimum

BACKENDS = _kernels.backends()


def test_backend_selected():
    assert _kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


def random_graph(n, m, rng):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pick = rng.choice(len(pairs), size=min(m, len(pairs)), replace=False)
    e = np.array([pairs[k] for k in pick], dtype=np.intc).reshape(-1, 2)
    return e[:, 0].copy(), e[:, 1].copy()


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_lr_planarity_matches_networkx(name):
    mod = BACKENDS[name]
    rng = np.random.default_rng(7)
    for _ in range(600):
        n = int(rng.integers(5, 14))
        m = int(rng.integers(n, 3 * n - 5))
        us, vs = random_graph(n, m, rng)
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(zip(us.tolist(), vs.tolist()))
        assert bool(mod.lr_is_planar(n, us, vs)) == nx.check_planarity(g)[0]


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_kuratowski_graphs(name):
    mod = BACKENDS[name]
    for g, planar in [(nx.complete_graph(5), False), (nx.complete_bipartite_graph(3, 3), False),
                      (nx.petersen_graph(), False), (nx.icosahedral_graph(), True),
                      (nx.grid_2d_graph(4, 4), True)]:
        g = nx.convert_node_labels_to_integers(g)
        e = np.array(list(g.edges()), dtype=np.intc)
        assert bool(mod.lr_is_planar(g.number_of_nodes(), e[:, 0].copy(), e[:, 1].copy())) == planar


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
@pytest.mark.parametrize("n", [12, 40, 80])
def test_pmfg_greedy_backends_agree(n):
    el = sorted_edges(random_distance(n, n))
    us, vs = el.i.astype(np.intc), el.j.astype(np.intc)
    ref = BACKENDS["python"].pmfg_greedy(n, us, vs, 3 * (n - 2))
    got = BACKENDS["cython"].pmfg_greedy(n, us, vs, 3 * (n - 2))
    np.testing.assert_array_equal(ref[0], got[0])
    assert ref[1] == got[1]


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
@given(st.integers(0, 10_000), st.integers(1, 8))
def test_pam_backends_agree(seed, k):
    rng = np.random.default_rng(seed)
    d = random_distance(20, seed)
    init = rng.choice(20, size=k, replace=False)
    a = BACKENDS["python"].pam_swap(d, init, 300)
    b = BACKENDS["cython"].pam_swap(d, init, 300)
    np.testing.assert_array_equal(a[0], b[0])
    assert a[1] == b[1]


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_pam_local_optimum(name):
    mod = BACKENDS[name]
    rng = np.random.default_rng(3)
    for trial in range(20):
        d = random_distance(15, trial)
        k = int(rng.integers(1, 5))
        med, _ = mod.pam_swap(d, rng.choice(15, k, replace=False), 300)
        cost = d[med].min(0).sum()
        for slot in range(k):
            for c in set(range(15)) - set(med.tolist()):
                alt = med.copy()
                alt[slot] = c
                assert d[alt].min(0).sum() >= cost - 1e-12


def test_pam_all_medoids():
    d = random_distance(6, 0)
    med, sweeps = _pycore.pam_swap(d, np.arange(6), 300)
    assert sweeps == 0 and med.tolist() == list(range(6))


def test_pam_often_global_on_tiny_inputs():
    rng = np.random.default_rng(11)
    hits = 0
    for trial in range(40):
        d = random_distance(8, 100 + trial)
        med, _ = _kernels.pam_swap(d, rng.choice(8, 3, replace=False), 300)
        hits += abs(d[med].min(0).sum() - pam_optimum(d, 3)) < 1e-12
    assert hits >= 30


def test_read_only_inputs():
    d = random_distance(12, 1)
    d.setflags(write=False)
    med, _ = _kernels.pam_swap(d, [0, 1, 2], 100)
    assert len(med) == 3
    u = np.array([0, 1, 2], dtype=np.intc)
    u.setflags(write=False)
    assert _kernels.lr_is_planar(3, u, np.array([1, 2, 0], dtype=np.intc))

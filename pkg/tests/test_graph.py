import math

import numpy as np
import pytest

from speclust.errors import (
    BandwidthError,
    DegeneratePartitionError,
    GapError,
    IsolatedVertexError,
    ParameterError,
    ShapeError,
    SizeGuardError,
)
from speclust.graph import (
    Bipartition,
    FixedBandwidth,
    SelfTuningBandwidth,
    build_graph,
    build_similarity,
    cheeger_bounds,
    connected_components,
    min_ncut_bruteforce,
    ncut,
    rayleigh_ncut,
)


def unit_edge_graph():
    return build_graph(np.array([[0.0, 1.0], [1.0, 0.0]]))


def disjoint_pairs_graph(k):
    w = np.zeros((2 * k, 2 * k))
    for i in range(k):
        w[2 * i, 2 * i + 1] = 1.0
        w[2 * i + 1, 2 * i] = 1.0
    return build_graph(w)


def four_cycle_graph():
    w = np.zeros((4, 4))
    for i, j in ((0, 1), (1, 2), (2, 3), (3, 0)):
        w[i, j] = w[j, i] = 1.0
    return build_graph(w)


def random_graph(rng, n):
    w = rng.uniform(0.05, 1.0, size=(n, n))
    w = (w + w.T) / 2
    np.fill_diagonal(w, 0.0)
    return build_graph(w)


class TestBuildSimilarity:
    def test_identical_points(self):
        w = build_similarity(np.array([[1.0, 2.0], [1.0, 2.0]]), FixedBandwidth(1.0))
        assert w[0, 1] == pytest.approx(1.0)
        assert w[0, 0] == 0.0

    def test_unit_distance(self):
        w = build_similarity(np.array([[0.0], [1.0]]), FixedBandwidth(1.0))
        assert w[0, 1] == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_collinear_points(self):
        w = build_similarity(np.array([[0.0], [1.0], [2.0]]), FixedBandwidth(1.0))
        assert w[0, 2] == pytest.approx(math.exp(-4.0), abs=1e-12)

    def test_entries_in_unit_interval(self):
        rng = np.random.default_rng(0)
        w = build_similarity(rng.standard_normal((12, 3)), FixedBandwidth(0.7))
        off = w[~np.eye(12, dtype=bool)]
        assert (off > 0.0).all() and (off <= 1.0).all()
        assert np.array_equal(w, w.T)

    def test_self_tuning_hand_case(self):
        # collinear points 0, 1, 3, 7 with one neighbor: scales are the
        # nearest-other distances (1, 1, 2, 4)
        pts = np.array([[0.0], [1.0], [3.0], [7.0]])
        w = build_similarity(pts, SelfTuningBandwidth(1))
        assert w[0, 1] == pytest.approx(math.exp(-1.0 / (1.0 * 1.0)), abs=1e-12)
        assert w[1, 2] == pytest.approx(math.exp(-4.0 / (1.0 * 2.0)), abs=1e-12)
        assert w[2, 3] == pytest.approx(math.exp(-16.0 / (2.0 * 4.0)), abs=1e-12)

    def test_self_tuning_duplicate_point(self):
        pts = np.array([[0.0], [0.0], [5.0]])
        with pytest.raises(BandwidthError, match="point 0"):
            build_similarity(pts, SelfTuningBandwidth(1))

    def test_neighbor_count_exceeds_points(self):
        with pytest.raises(ParameterError):
            build_similarity(np.array([[0.0], [1.0]]), SelfTuningBandwidth(7))

    def test_too_few_points(self):
        with pytest.raises(ParameterError):
            build_similarity(np.array([[0.0]]), FixedBandwidth(1.0))

    def test_bad_sigma(self):
        with pytest.raises(ParameterError):
            build_similarity(np.zeros((3, 1)), FixedBandwidth(0.0))


class TestBuildGraph:
    def test_unit_edge(self):
        g = unit_edge_graph()
        assert np.allclose(g.degrees, [1.0, 1.0])
        assert np.allclose(g.w_norm, [[0.0, 1.0], [1.0, 0.0]])
        assert np.allclose(np.sort(g.lnorm_eigh().eigenvalues), [0.0, 2.0], atol=1e-12)

    def test_disjoint_pairs_zero_multiplicity(self):
        for k in (2, 3):
            g = disjoint_pairs_graph(k)
            vals = g.lnorm_eigh().eigenvalues
            assert (np.abs(vals) <= 1e-10).sum() == k

    def test_complete_triangle(self):
        w = np.ones((3, 3)) - np.eye(3)
        g = build_graph(w)
        expected = (np.ones((3, 3)) - np.eye(3)) / 2.0
        assert np.allclose(g.w_norm, expected, atol=1e-12)
        assert np.allclose(
            np.sort(g.lnorm_eigh().eigenvalues), [0.0, 1.5, 1.5], atol=1e-10
        )

    def test_isolated_vertex(self):
        w = np.zeros((3, 3))
        w[0, 1] = w[1, 0] = 1.0
        with pytest.raises(IsolatedVertexError, match="vertex 2"):
            build_graph(w)

    def test_asymmetric_rejected(self):
        w = np.array([[0.0, 1.0], [0.5, 0.0]])
        with pytest.raises(ShapeError):
            build_graph(w)

    def test_negative_rejected(self):
        w = np.array([[0.0, -1.0], [-1.0, 0.0]])
        with pytest.raises(ParameterError):
            build_graph(w)

    def test_nonzero_diagonal_rejected(self):
        w = np.array([[0.5, 1.0], [1.0, 0.0]])
        with pytest.raises(ParameterError):
            build_graph(w)

    def test_wnorm_eigenvalues_in_range(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            g = random_graph(rng, int(rng.integers(2, 9)))
            vals = g.wnorm_eigh().eigenvalues
            assert vals.max() <= 1.0 + 1e-10
            assert vals.min() >= -1.0 - 1e-10


class TestNcut:
    def test_unit_edge(self):
        g = unit_edge_graph()
        assert ncut(g, Bipartition([True, False])) == pytest.approx(2.0)

    def test_component_aligned_split(self):
        g = disjoint_pairs_graph(2)
        part = Bipartition([True, True, False, False])
        assert ncut(g, part) == pytest.approx(0.0)

    def test_four_cycle(self):
        g = four_cycle_graph()
        part = Bipartition([True, True, False, False])
        assert ncut(g, part) == pytest.approx(1.0)

    def test_scaling_invariance(self):
        rng = np.random.default_rng(17)
        g = random_graph(rng, 6)
        scaled = build_graph(g.w * 12.5)
        part = Bipartition([True, False, True, False, False, True])
        assert ncut(g, part) == pytest.approx(ncut(scaled, part), abs=1e-12)

    def test_empty_side_rejected(self):
        with pytest.raises(DegeneratePartitionError):
            Bipartition([True, True])

    def test_length_mismatch(self):
        g = unit_edge_graph()
        with pytest.raises(ShapeError):
            ncut(g, Bipartition([True, False, False]))


class TestRayleighNcut:
    def test_unit_edge(self):
        g = unit_edge_graph()
        assert rayleigh_ncut(g, Bipartition([True, False])) == pytest.approx(2.0)

    def test_component_aligned_split(self):
        g = disjoint_pairs_graph(2)
        part = Bipartition([True, True, False, False])
        assert rayleigh_ncut(g, part) == pytest.approx(0.0, abs=1e-12)

    def test_four_cycle(self):
        g = four_cycle_graph()
        part = Bipartition([True, True, False, False])
        assert rayleigh_ncut(g, part) == pytest.approx(1.0, abs=1e-12)

    def test_matches_ncut_everywhere(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            n = int(rng.integers(2, 9))
            g = random_graph(rng, n)
            for mask in range(1, 1 << (n - 1)):
                member = [(mask >> i) & 1 == 1 for i in range(n - 1)] + [False]
                part = Bipartition(member)
                assert abs(rayleigh_ncut(g, part) - ncut(g, part)) <= 1e-10


class TestMinNcutBruteforce:
    def test_disconnected_pairs(self):
        g = disjoint_pairs_graph(2)
        part, value = min_ncut_bruteforce(g)
        assert value == pytest.approx(0.0)
        # the attaining partition splits along components
        assert ncut(g, part) == pytest.approx(0.0)

    def test_unit_edge_single_candidate(self):
        g = unit_edge_graph()
        part, value = min_ncut_bruteforce(g)
        assert value == pytest.approx(2.0)
        assert part.membership.tolist() == [True, False]

    def test_barbell_separates_triangles(self):
        w = np.zeros((6, 6))
        for block in (range(3), range(3, 6)):
            for i in block:
                for j in block:
                    if i != j:
                        w[i, j] = 1.0
        w[2, 3] = w[3, 2] = 0.01
        g = build_graph(w)
        part, value = min_ncut_bruteforce(g)
        sides = frozenset(np.nonzero(part.membership)[0].tolist())
        assert sides in (frozenset({0, 1, 2}), frozenset({3, 4, 5}))
        assert value == pytest.approx(ncut(g, part))

    def test_size_guard(self):
        w = np.ones((21, 21)) - np.eye(21)
        g = build_graph(w)
        with pytest.raises(SizeGuardError):
            min_ncut_bruteforce(g)

    def test_oracle_is_minimum(self):
        rng = np.random.default_rng(31)
        g = random_graph(rng, 7)
        _, best = min_ncut_bruteforce(g)
        for mask in range(1, 1 << 6):
            member = [(mask >> i) & 1 == 1 for i in range(6)] + [False]
            assert best <= ncut(g, Bipartition(member)) + 1e-12


class TestConnectedComponents:
    def test_complete_graph(self):
        g = build_graph(np.ones((5, 5)) - np.eye(5))
        assert connected_components(g) == 1

    def test_disjoint_pairs(self):
        assert connected_components(disjoint_pairs_graph(3)) == 3

    def test_threshold_cuts_all_edges(self):
        g = disjoint_pairs_graph(2)
        assert connected_components(g, edge_threshold=2.0) == 4

    def test_zero_multiplicity_matches_components(self):
        rng = np.random.default_rng(41)
        for k in (1, 2, 3):
            blocks = []
            for _ in range(k):
                n = int(rng.integers(2, 5))
                w = rng.uniform(0.2, 1.0, size=(n, n))
                w = (w + w.T) / 2
                np.fill_diagonal(w, 0.0)
                blocks.append(w)
            total = sum(b.shape[0] for b in blocks)
            w = np.zeros((total, total))
            at = 0
            for b in blocks:
                w[at : at + b.shape[0], at : at + b.shape[0]] = b
                at += b.shape[0]
            g = build_graph(w)
            zeros = (np.abs(g.lnorm_eigh().eigenvalues) <= 1e-10).sum()
            assert zeros == connected_components(g) == k


class TestCheegerBounds:
    def test_unit_edge(self):
        lower, opt, upper = cheeger_bounds(unit_edge_graph())
        assert lower == pytest.approx(1.0)
        assert opt == pytest.approx(2.0)
        assert upper == pytest.approx(4.0)

    def test_near_disconnected_barbell(self):
        w = np.zeros((6, 6))
        for block in (range(3), range(3, 6)):
            for i in block:
                for j in block:
                    if i != j:
                        w[i, j] = 1.0
        w[2, 3] = w[3, 2] = 1e-6
        lower, opt, upper = cheeger_bounds(build_graph(w))
        assert 0.0 <= lower <= opt <= upper
        assert upper < 0.01

    def test_disconnected_rejected(self):
        with pytest.raises(GapError):
            cheeger_bounds(disjoint_pairs_graph(2))

    def test_sandwich_on_random_graphs(self):
        rng = np.random.default_rng(53)
        for _ in range(15):
            g = random_graph(rng, int(rng.integers(3, 13)))
            lower, opt, upper = cheeger_bounds(g)
            assert lower <= opt + 1e-12
            assert opt <= upper + 1e-12


class TestEigenvalueRelation:
    def test_adjacency_laplacian_complement(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            n = int(rng.integers(2, 10))
            g = random_graph(rng, n)
            vals_w = g.wnorm_eigh().eigenvalues
            vals_l = g.lnorm_eigh().eigenvalues
            for i in range(n):
                assert vals_w[i] == pytest.approx(1.0 - vals_l[n - 1 - i], abs=1e-10)

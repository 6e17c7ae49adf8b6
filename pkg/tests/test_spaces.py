import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphgp.spaces import (
    GraphCode,
    GraphSpace,
    GraphSpaceKind,
    NodePermutation,
    apply_permutation,
    bit_matrix,
    codes_to_uint64,
    dimension,
    edge_permutation,
    graph_from_json,
    graph_to_json,
    hamming,
    pairwise_hamming,
    permute_bits,
    popcount_u64,
)

ALL_KINDS = list(GraphSpaceKind)


class TestDimension:
    def test_directed_loops_3(self):
        assert dimension(GraphSpaceKind.DIRECTED_LOOPS, 3) == 9

    def test_undirected_3(self):
        assert dimension(GraphSpaceKind.UNDIRECTED, 3) == 3

    def test_single_node_undirected(self):
        assert dimension(GraphSpaceKind.UNDIRECTED, 1) == 0

    def test_formulas(self):
        for n in range(1, 9):
            assert dimension(GraphSpaceKind.UNDIRECTED, n) == n * (n - 1) // 2
            assert dimension(GraphSpaceKind.UNDIRECTED_LOOPS, n) == n * (n + 1) // 2
            assert dimension(GraphSpaceKind.DIRECTED, n) == n * (n - 1)
            assert dimension(GraphSpaceKind.DIRECTED_LOOPS, n) == n * n

    def test_zero_nodes_rejected(self):
        with pytest.raises(ValueError):
            dimension(GraphSpaceKind.UNDIRECTED, 0)
        with pytest.raises(ValueError):
            GraphSpace(GraphSpaceKind.UNDIRECTED, 0)


class TestSlotTable:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    @pytest.mark.parametrize("n", range(1, 9))
    def test_round_trip_and_count(self, kind, n):
        space = GraphSpace(kind, n)
        assert len(space.slots) == space.d == dimension(kind, n)
        for s in range(space.d):
            i, j = space.pair_of(s)
            assert space.slot_of(i, j) == s

    def test_lexicographic_order(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 4)
        assert space.slots == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
        loops = GraphSpace(GraphSpaceKind.UNDIRECTED_LOOPS, 2)
        assert loops.slots == ((0, 0), (0, 1), (1, 1))
        directed = GraphSpace(GraphSpaceKind.DIRECTED, 3)
        assert directed.slots == ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1))

    def test_undirected_pair_canonicalized(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 4)
        assert space.slot_of(3, 1) == space.slot_of(1, 3)

    def test_loop_rejected_without_loops(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 4)
        with pytest.raises(ValueError, match="loop"):
            space.slot_of(2, 2)
        GraphSpace(GraphSpaceKind.UNDIRECTED_LOOPS, 4).slot_of(2, 2)

    def test_max_nodes_guard(self):
        with pytest.raises(ValueError, match="maximum"):
            GraphSpace(GraphSpaceKind.UNDIRECTED, 17)
        assert GraphSpace(GraphSpaceKind.UNDIRECTED, 17, max_nodes=20).d == 136


class TestGraphCode:
    def test_xor_identity(self):
        space = GraphSpace(GraphSpaceKind.DIRECTED_LOOPS, 2)
        x = space.code_from_bits([1, 0, 1, 1])
        assert (x ^ x).bits == 0
        assert x.weight == 3

    def test_from_edges_duplicate_rejected(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 3)
        with pytest.raises(ValueError, match="duplicate"):
            space.code_from_edges([[0, 1], [1, 0]])

    def test_edges_round_trip(self, rng):
        for kind in ALL_KINDS:
            space = GraphSpace(kind, 5)
            for _ in range(20):
                x = space.random_code(rng)
                assert space.code_from_edges(x.edges()) == x

    def test_bits_length_checked(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 3)
        with pytest.raises(ValueError):
            space.code_from_bits([1, 0])
        with pytest.raises(ValueError):
            space.code_from_int(1 << 3)


class TestHamming:
    def test_identical(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 3)
        x = space.code_from_bits([0, 0, 0])
        assert hamming(x, x) == 0

    def test_two_bits(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 3)
        x = space.code_from_bits([1, 0, 1])
        y = space.code_from_bits([0, 1, 1])
        assert hamming(x, y) == 2

    def test_symmetry_random(self, rng):
        space = GraphSpace(GraphSpaceKind.DIRECTED_LOOPS, 3)
        for _ in range(1000):
            x, y = space.random_code(rng), space.random_code(rng)
            assert hamming(x, y) == hamming(y, x)
            assert (hamming(x, y) == 0) == (x == y)

    def test_space_mismatch_rejected(self):
        a = GraphSpace(GraphSpaceKind.UNDIRECTED, 3).empty_code()
        b = GraphSpace(GraphSpaceKind.UNDIRECTED, 4).empty_code()
        with pytest.raises(ValueError, match="different spaces"):
            hamming(a, b)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**10 - 1), st.integers(0, 2**10 - 1), st.integers(0, 2**10 - 1))
    def test_xor_translation_preserves_distance(self, xb, yb, zb):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 5)
        x, y, z = (GraphCode(space, b) for b in (xb, yb, zb))
        assert hamming(x ^ z, y ^ z) == hamming(x, y)


class TestNodePermutation:
    def test_not_a_permutation_rejected(self):
        with pytest.raises(ValueError):
            NodePermutation((0, 0, 1))

    def test_identity_action(self, rng):
        space = GraphSpace(GraphSpaceKind.DIRECTED, 4)
        ident = NodePermutation.identity(4)
        for _ in range(10):
            x = space.random_code(rng)
            assert apply_permutation(ident, x) == x

    def test_hand_worked_swap_on_three_nodes(self):
        # swapping nodes 0 and 1 sends the lone edge {0,2} to {1,2}
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 3)
        x = space.code_from_edges([[0, 2]])
        swapped = apply_permutation(NodePermutation((1, 0, 2)), x)
        assert swapped.edges() == ((1, 2),)

    def test_group_action_law(self, rng):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 5)
        for _ in range(50):
            sigma = NodePermutation(tuple(rng.permutation(5)))
            tau = NodePermutation(tuple(rng.permutation(5)))
            x = space.random_code(rng)
            assert apply_permutation(sigma.compose(tau), x) == apply_permutation(
                sigma, apply_permutation(tau, x)
            )

    def test_inverse(self, rng):
        for _ in range(20):
            sigma = NodePermutation(tuple(rng.permutation(6)))
            assert sigma.compose(sigma.inverse()) == NodePermutation.identity(6)

    def test_length_mismatch_rejected(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 4)
        with pytest.raises(ValueError):
            edge_permutation(NodePermutation((1, 0, 2)), space)

    def test_edge_permutation_identity(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED_LOOPS, 4)
        assert edge_permutation(NodePermutation.identity(4), space) == tuple(range(space.d))

    def test_edge_permutation_bijection_u4(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 4)
        perm = edge_permutation(NodePermutation((1, 2, 0, 3)), space)
        assert sorted(perm) == list(range(6))

    def test_edge_permutation_composition(self, rng):
        space = GraphSpace(GraphSpaceKind.DIRECTED, 4)
        for _ in range(20):
            sigma = NodePermutation(tuple(rng.permutation(4)))
            tau = NodePermutation(tuple(rng.permutation(4)))
            ps, pt = edge_permutation(sigma, space), edge_permutation(tau, space)
            pc = edge_permutation(sigma.compose(tau), space)
            # slot s -> pt[s] under tau, then -> ps[pt[s]] under sigma
            assert pc == tuple(ps[pt[s]] for s in range(space.d))

    def test_permutations_preserve_distance(self, rng):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 5)
        for _ in range(200):
            sigma = NodePermutation(tuple(rng.permutation(5)))
            x, y = space.random_code(rng), space.random_code(rng)
            assert hamming(apply_permutation(sigma, x), apply_permutation(sigma, y)) == hamming(x, y)

    def test_arbitrary_slot_permutation_preserves_distance(self, rng):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 5)
        d = space.d
        for _ in range(200):
            perm = tuple(rng.permutation(d))
            x, y = space.random_code(rng), space.random_code(rng)
            assert hamming(permute_bits(x, perm), permute_bits(y, perm)) == hamming(x, y)


class TestBulkBitOps:
    def test_popcount_u64_matches_int_bit_count(self, rng):
        vals = rng.integers(0, 2**63, size=500, dtype=np.uint64)
        counts = popcount_u64(vals)
        assert all(int(c) == int(v).bit_count() for c, v in zip(counts, vals))

    def test_pairwise_hamming_matches_scalar(self, rng):
        space = GraphSpace(GraphSpaceKind.DIRECTED_LOOPS, 3)
        xs = [space.random_code(rng) for _ in range(15)]
        ys = [space.random_code(rng) for _ in range(12)]
        D = pairwise_hamming(xs, ys)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                assert D[i, j] == hamming(x, y)

    def test_pairwise_hamming_wide_codes(self, rng):
        # d = 256 exercises the multi-word fallback
        space = GraphSpace(GraphSpaceKind.DIRECTED_LOOPS, 16)
        assert space.d == 256
        xs = [space.random_code(rng) for _ in range(6)]
        D = pairwise_hamming(xs)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys := xs):
                assert D[i, j] == hamming(x, y)
        with pytest.raises(ValueError):
            codes_to_uint64(xs)

    def test_bit_matrix(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 3)
        x = space.code_from_bits([1, 0, 1])
        assert bit_matrix([x]).tolist() == [[1.0, 0.0, 1.0]]


class TestJsonFormat:
    def test_round_trip(self):
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 4)
        x = space.code_from_edges([[0, 1], [2, 3]])
        assert graph_from_json(graph_to_json(x)) == x

    def test_either_order_canonicalized(self):
        a = graph_from_json({"kind": "U", "n": 3, "edges": [[2, 0]]})
        b = graph_from_json({"kind": "U", "n": 3, "edges": [[0, 2]]})
        assert a == b

    def test_duplicate_edges_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            graph_from_json({"kind": "U", "n": 3, "edges": [[0, 1], [1, 0]]})

    def test_self_loop_rejected_for_no_loop_kinds(self):
        with pytest.raises(ValueError, match="loop"):
            graph_from_json({"kind": "D", "n": 3, "edges": [[1, 1]]})
        loop = graph_from_json({"kind": "DL", "n": 3, "edges": [[1, 1]]})
        assert loop.weight == 1

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            graph_from_json({"kind": "X", "n": 3, "edges": []})

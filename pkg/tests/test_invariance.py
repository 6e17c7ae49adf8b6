import numpy as np
import pytest

from graphgp.invariance import (
    GroupTooLargeError,
    PermSubgroup,
    ProjectedKernel,
    build_quotient,
    draw_sample,
    enumerate_orbit,
    invariant_gram_exact,
    invariant_gram_sampled,
    invariant_kernel_exact,
    invariant_kernel_mc,
    invariant_kernel_sampled,
    orbit_equivalence_test,
    pair_histogram,
    project_function,
    quotient_kernel,
    quotient_kernel_matrix,
)
from graphgp.kernels import CustomPhi, Heat, KernelSpec, LaplacianVariant, kernel_profile, matern_spec
from graphgp.spaces import GraphSpace, GraphSpaceKind, apply_permutation, hamming

U3 = GraphSpace(GraphSpaceKind.UNDIRECTED, 3)
U4 = GraphSpace(GraphSpaceKind.UNDIRECTED, 4)


def matern_u4(variance=1.0):
    return matern_spec(U4.d, nu_base=2.5, kappa=1.0, variance=variance)


class TestPermSubgroup:
    def test_partition_validated(self):
        with pytest.raises(ValueError):
            PermSubgroup(4, ((0, 1), (1, 2, 3)))
        with pytest.raises(ValueError):
            PermSubgroup(4, ((0, 1),))

    def test_order_and_element_count(self):
        H = PermSubgroup(4, ((0, 1, 2), (3,)))
        assert H.order() == 6
        elements = list(H.elements())
        assert len(elements) == 6
        assert len({e.mapping for e in elements}) == 6
        for e in elements:
            assert e.mapping[3] == 3  # block {3} is fixed

    def test_full_and_trivial(self):
        assert PermSubgroup.full(4).order() == 24
        assert PermSubgroup.trivial(4).order() == 1

    def test_from_string(self):
        H = PermSubgroup.from_string("0,1,2|3", 4)
        assert H.blocks == ((0, 1, 2), (3,))

    def test_generators_generate_the_group(self):
        H = PermSubgroup(5, ((0, 1, 2), (3, 4)))
        seen = {tuple(range(5))}
        frontier = [tuple(range(5))]
        gens = H.generators()
        while frontier:
            nxt = []
            for m in frontier:
                for g in gens:
                    composed = tuple(g.mapping[m[i]] for i in range(5))
                    if composed not in seen:
                        seen.add(composed)
                        nxt.append(composed)
            frontier = nxt
        assert len(seen) == H.order() == 12

    def test_random_element_stays_in_group(self, rng):
        H = PermSubgroup(6, ((0, 1, 2), (3, 4), (5,)))
        for _ in range(100):
            sigma = H.random_element(rng)
            assert sorted(sigma.mapping[i] for i in (0, 1, 2)) == [0, 1, 2]
            assert sorted(sigma.mapping[i] for i in (3, 4)) == [3, 4]
            assert sigma.mapping[5] == 5

    def test_draw_sample_deterministic(self):
        H = PermSubgroup.full(4)
        assert draw_sample(H, 5, 42) == draw_sample(H, 5, 42)
        assert draw_sample(H, 5, 42) != draw_sample(H, 5, 43)
        with pytest.raises(ValueError):
            draw_sample(H, 0, 1)


class TestOrbits:
    def test_trivial_group_fixes_everything(self, rng):
        H = PermSubgroup.trivial(4)
        x = U4.random_code(rng)
        orbit = enumerate_orbit(H, x)
        assert orbit.size == 1
        assert orbit.canonical == x
        assert orbit.members == (x,)

    def test_single_edge_orbit_on_three_nodes(self):
        orbit = enumerate_orbit(PermSubgroup.full(3), U3.code_from_edges([[0, 1]]))
        assert orbit.size == 3  # the three possible edges

    def test_empty_graph_is_fixed_point(self):
        orbit = enumerate_orbit(PermSubgroup.full(4), U4.empty_code())
        assert orbit.size == 1

    def test_orbit_stabilizer_identity(self, rng):
        H = PermSubgroup.full(4)
        for _ in range(10):
            x = U4.random_code(rng)
            orbit = enumerate_orbit(H, x)
            stabilizer = sum(1 for s in H.elements() if apply_permutation(s, x) == x)
            assert orbit.size * stabilizer == H.order()

    def test_members_close_under_group(self, rng):
        H = PermSubgroup(4, ((0, 1, 2), (3,)))
        x = U4.random_code(rng)
        members = set(enumerate_orbit(H, x).members)
        for s in H.elements():
            assert apply_permutation(s, x) in members

    def test_cap_refusal_mentions_monte_carlo(self):
        H = PermSubgroup.full(8)  # order 40320
        with pytest.raises(GroupTooLargeError, match="Monte Carlo"):
            enumerate_orbit(H, GraphSpace(GraphSpaceKind.UNDIRECTED, 8).empty_code(), cap=1000)


class TestPairHistogram:
    def test_counts_sum_to_group_order(self, rng):
        H = PermSubgroup.full(4)
        x, y = U4.random_code(rng), U4.random_code(rng)
        hist = pair_histogram(H, x, y)
        assert hist.sum() == H.order()

    def test_symmetric_in_arguments(self, rng):
        H = PermSubgroup(4, ((0, 1), (2, 3)))
        for _ in range(20):
            x, y = U4.random_code(rng), U4.random_code(rng)
            assert np.array_equal(pair_histogram(H, x, y), pair_histogram(H, y, x))

    def test_matches_direct_enumeration(self, rng):
        H = PermSubgroup(4, ((0, 1, 2), (3,)))
        x, y = U4.random_code(rng), U4.random_code(rng)
        expect = np.zeros(U4.d + 1)
        for s in H.elements():
            expect[hamming(apply_permutation(s, x), y)] += 1
        assert np.array_equal(pair_histogram(H, x, y), expect)


class TestInvariantKernelExact:
    def test_trivial_group_is_base_kernel(self, rng):
        H = PermSubgroup.trivial(4)
        spec = matern_u4()
        profile = kernel_profile(spec, U4.d)
        for _ in range(10):
            x, y = U4.random_code(rng), U4.random_code(rng)
            assert invariant_kernel_exact(spec, H, x, y) == pytest.approx(
                profile[hamming(x, y)], rel=1e-14
            )

    def test_equivalent_inputs_share_diagonal_value(self, rng):
        H = PermSubgroup.full(4)
        spec = matern_u4()
        for _ in range(10):
            x = U4.random_code(rng)
            y = apply_permutation(H.random_element(rng), x)
            assert invariant_kernel_exact(spec, H, x, y) == pytest.approx(
                invariant_kernel_exact(spec, H, x, x), rel=1e-12
            )

    def test_invariant_under_group_on_either_argument(self, rng):
        H = PermSubgroup(4, ((0, 1, 2), (3,)))
        spec = matern_u4()
        for _ in range(20):
            x, y = U4.random_code(rng), U4.random_code(rng)
            base = invariant_kernel_exact(spec, H, x, y)
            s1, s2 = H.random_element(rng), H.random_element(rng)
            moved = invariant_kernel_exact(
                spec, H, apply_permutation(s1, x), apply_permutation(s2, y)
            )
            assert moved == pytest.approx(base, rel=1e-12)

    def test_gram_matches_entries(self, rng):
        H = PermSubgroup.full(3)
        spec = KernelSpec(Heat(1.0))
        xs = [U3.random_code(rng) for _ in range(6)]
        K = invariant_gram_exact(spec, H, xs)
        for i in range(6):
            for j in range(6):
                assert K[i, j] == pytest.approx(invariant_kernel_exact(spec, H, xs[i], xs[j]))


class TestEquitability:
    @pytest.mark.parametrize(
        "space,blocks",
        [
            (U3, ((0, 1, 2),)),
            (U4, ((0, 1, 2, 3),)),
            (U4, ((0, 1, 2), (3,))),
            (U4, ((0, 1), (2, 3))),
        ],
    )
    def test_orbit_partition_is_equitable(self, space, blocks):
        # every member of an orbit has the same number of one-flip neighbors
        # in every other orbit
        H = PermSubgroup(space.n, blocks)
        quotient = build_quotient(H, space)
        class_of = quotient.class_of
        d = space.d
        for v in range(1 << d):
            degs = np.zeros(quotient.num_classes, dtype=int)
            for t in range(d):
                degs[class_of[v ^ (1 << t)]] += 1
            rep = quotient.classes[class_of[v]].canonical.bits
            rep_degs = np.zeros(quotient.num_classes, dtype=int)
            for t in range(d):
                rep_degs[class_of[rep ^ (1 << t)]] += 1
            assert np.array_equal(degs, rep_degs)


class TestMonteCarlo:
    def test_full_group_sample_equals_exact(self, rng):
        H = PermSubgroup.full(4)
        spec = matern_u4()
        full = tuple(H.elements())
        for _ in range(5):
            x, y = U4.random_code(rng), U4.random_code(rng)
            assert invariant_kernel_sampled(spec, full, x, y) == pytest.approx(
                invariant_kernel_exact(spec, H, x, y), abs=1e-12
            )

    def test_diagonal_nonnegative(self, rng):
        H = PermSubgroup.full(4)
        spec = matern_u4()
        for seed in range(10):
            sample = draw_sample(H, 6, seed)
            x = U4.random_code(rng)
            assert invariant_kernel_sampled(spec, sample, x, x) >= 0.0

    def test_gram_psd_for_any_seed(self, rng):
        H = PermSubgroup.full(4)
        spec = matern_u4()
        xs = [U4.random_code(rng) for _ in range(12)]
        for seed in range(10):
            K = invariant_gram_sampled(spec, draw_sample(H, 8, seed), xs)
            assert np.allclose(K, K.T)
            assert np.linalg.eigvalsh(K).min() >= -1e-8 * np.trace(K)

    def test_error_decreases_with_sample_size(self, rng):
        H = PermSubgroup.full(4)
        spec = matern_u4()
        xs = [U4.random_code(rng) for _ in range(8)]
        exact = invariant_gram_exact(spec, H, xs)
        mean_err = []
        for size in (4, 24):
            errs = []
            for seed in range(20):
                K = invariant_gram_sampled(spec, draw_sample(H, size, seed), xs)
                errs.append(np.sqrt(np.mean((K - exact) ** 2)))
            mean_err.append(np.mean(errs))
        assert mean_err[1] < mean_err[0]

    def test_mc_kernel_deterministic_given_seed(self, rng):
        H = PermSubgroup.full(4)
        spec = matern_u4()
        x, y = U4.random_code(rng), U4.random_code(rng)
        a = invariant_kernel_mc(spec, H, x, y, sample_size=8, seed=7)
        b = invariant_kernel_mc(spec, H, x, y, sample_size=8, seed=7)
        assert a == b


class TestQuotient:
    def test_trivial_group_reproduces_hypercube(self):
        H = PermSubgroup.trivial(3)
        quotient = build_quotient(H, U3)
        assert quotient.num_classes == 1 << U3.d
        W = quotient.weights
        assert np.array_equal(np.diag(W), np.zeros(8))
        assert set(np.unique(W)) <= {0.0, 1.0}
        assert np.all(W.sum(axis=1) == U3.d)

    def test_u3_full_group_has_four_classes(self):
        quotient = build_quotient(PermSubgroup.full(3), U3)
        assert quotient.num_classes == 4  # 0, 1, 2, 3 edges
        assert sorted(c.size for c in quotient.classes) == [1, 1, 3, 3]

    def test_u4_full_group_has_eleven_classes(self):
        quotient = build_quotient(PermSubgroup.full(4), U4)
        assert quotient.num_classes == 11
        assert sum(c.size for c in quotient.classes) == 64

    def test_weights_symmetric_and_degree_identity(self):
        for blocks in (((0, 1, 2, 3),), ((0, 1, 2), (3,))):
            quotient = build_quotient(PermSubgroup(4, blocks), U4)
            W = quotient.weights
            assert np.allclose(W, W.T)
            assert np.allclose(W.sum(axis=1), quotient.sizes() * U4.d)

    def test_weights_match_brute_force_pair_count(self):
        H = PermSubgroup.full(3)
        quotient = build_quotient(H, U3)
        expect = np.zeros((4, 4))
        for v in range(8):
            for t in range(U3.d):
                expect[quotient.class_of[v], quotient.class_of[v ^ (1 << t)]] += 1
        assert np.array_equal(quotient.weights, expect)

    def test_dimension_cap(self):
        with pytest.raises(ValueError, match="enumeration limit"):
            build_quotient(PermSubgroup.trivial(6), GraphSpace(GraphSpaceKind.DIRECTED_LOOPS, 6))

    def test_class_index(self, rng):
        quotient = build_quotient(PermSubgroup.full(4), U4)
        for _ in range(10):
            x = U4.random_code(rng)
            idx = quotient.class_index(x)
            assert quotient.classes[idx].canonical == enumerate_orbit(
                PermSubgroup.full(4), x
            ).canonical


class TestQuotientKernel:
    @pytest.mark.parametrize("blocks", [((0, 1, 2, 3),), ((0, 1, 2), (3,))])
    def test_equals_exact_double_average(self, blocks):
        H = PermSubgroup(4, blocks)
        quotient = build_quotient(H, U4)
        for spec in (matern_u4(), KernelSpec(Heat(1.3), 2.0)):
            qk = quotient_kernel_matrix(spec, quotient)
            reps = [c.canonical for c in quotient.classes]
            exact = invariant_gram_exact(spec, H, reps)
            assert np.abs(qk - exact).max() <= 1e-8

    def test_trivial_group_reproduces_base_kernel(self, rng):
        quotient = build_quotient(PermSubgroup.trivial(3), U3)
        spec = KernelSpec(Heat(0.8), 1.5)
        profile = kernel_profile(spec, U3.d)
        for _ in range(20):
            x, y = U3.random_code(rng), U3.random_code(rng)
            i, j = quotient.class_index(x), quotient.class_index(y)
            assert quotient_kernel(spec, quotient, i, j) == pytest.approx(
                profile[hamming(x, y)], rel=1e-10
            )

    def test_non_symmetric_variant_rejected(self):
        quotient = build_quotient(PermSubgroup.full(3), U3)
        with pytest.raises(ValueError, match="symmetric normalized"):
            quotient_kernel_matrix(KernelSpec(Heat(1.0), laplacian=LaplacianVariant.PLAIN), quotient)

    def test_truncated_spec_equals_truncated_average(self):
        H = PermSubgroup.full(4)
        quotient = build_quotient(H, U4)
        spec = KernelSpec(Heat(1.0), truncation=3)
        qk = quotient_kernel_matrix(spec, quotient)
        reps = [c.canonical for c in quotient.classes]
        exact = invariant_gram_exact(spec, H, reps)
        assert np.abs(qk - exact).max() <= 1e-8

    def test_index_bounds(self):
        quotient = build_quotient(PermSubgroup.full(3), U3)
        with pytest.raises(ValueError):
            quotient_kernel(KernelSpec(Heat(1.0)), quotient, 0, 99)


class TestOrbitEquivalenceTest:
    def test_reflexive(self, rng):
        H = PermSubgroup.full(4)
        spec = matern_u4()
        x = U4.random_code(rng)
        assert orbit_equivalence_test(spec, H, x, x)

    def test_path_vs_star_not_equivalent(self):
        H = PermSubgroup.full(4)
        spec = matern_u4()
        path = U4.code_from_edges([[0, 1], [1, 2], [2, 3]])
        star = U4.code_from_edges([[0, 1], [0, 2], [0, 3]])
        assert not orbit_equivalence_test(spec, H, path, star)

    def test_relabeled_path_equivalent(self):
        H = PermSubgroup.full(4)
        spec = matern_u4()
        path = U4.code_from_edges([[0, 1], [1, 2], [2, 3]])
        relabeled = U4.code_from_edges([[2, 0], [0, 3], [3, 1]])
        assert orbit_equivalence_test(spec, H, path, relabeled)

    def test_truncation_rejected(self):
        spec = KernelSpec(Heat(1.0), truncation=3)
        with pytest.raises(ValueError, match="strictly positive"):
            orbit_equivalence_test(spec, PermSubgroup.full(4), U4.empty_code(), U4.empty_code())

    def test_vanishing_custom_density_rejected(self):
        spec = KernelSpec(CustomPhi(lambda lam: 1.0 if lam < 0.5 else 0.0))
        with pytest.raises(ValueError, match="strictly positive"):
            orbit_equivalence_test(spec, PermSubgroup.full(4), U4.empty_code(), U4.empty_code())


class TestProjectFunction:
    def test_result_constant_on_orbits_and_idempotent(self, rng):
        H = PermSubgroup.full(4)
        values = rng.standard_normal(1 << U4.d)
        projected = project_function(H, U4, values)
        quotient = build_quotient(H, U4)
        for cls in quotient.classes:
            member_vals = projected[
                [v for v in range(1 << U4.d) if quotient.class_of[v] == quotient.class_of[cls.canonical.bits]]
            ]
            assert np.ptp(member_vals) <= 1e-12
        again = project_function(H, U4, projected)
        assert np.allclose(again, projected, atol=1e-12)

    def test_orbit_constant_fixed_point(self, rng):
        H = PermSubgroup.full(3)
        quotient = build_quotient(H, U3)
        class_values = rng.standard_normal(quotient.num_classes)
        values = class_values[quotient.class_of]
        assert np.allclose(project_function(H, U3, values), values, atol=1e-14)

    def test_indicator_spreads_over_orbit(self):
        H = PermSubgroup.full(3)
        x = U3.code_from_edges([[0, 1]])
        values = np.zeros(8)
        values[x.bits] = 1.0
        projected = project_function(H, U3, values)
        orbit = enumerate_orbit(H, x)
        for member in orbit.members:
            assert projected[member.bits] == pytest.approx(1.0 / orbit.size)
        assert projected.sum() == pytest.approx(values.sum())

    def test_zero_orbit_sums_project_to_zero(self):
        H = PermSubgroup.full(3)
        orbit = enumerate_orbit(H, U3.code_from_edges([[0, 1]]))
        values = np.zeros(8)
        values[orbit.members[0].bits] = 1.0
        values[orbit.members[1].bits] = -1.0
        assert np.allclose(project_function(H, U3, values), 0.0, atol=1e-14)

    def test_sampled_variant_needs_seed_and_is_deterministic(self, rng):
        H = PermSubgroup.full(4)
        values = rng.standard_normal(1 << U4.d)
        with pytest.raises(ValueError, match="seed"):
            project_function(H, U4, values, sample_size=4)
        a = project_function(H, U4, values, sample_size=4, seed=3)
        b = project_function(H, U4, values, sample_size=4, seed=3)
        assert np.array_equal(a, b)

    def test_cap_refusal(self, rng):
        H = PermSubgroup.full(8)
        space = GraphSpace(GraphSpaceKind.UNDIRECTED, 8)  # d = 28 > cap as well
        with pytest.raises(ValueError):
            project_function(H, space, np.zeros(4), cap=10)


class TestProjectedKernelObject:
    def test_exact_gram(self, rng):
        H = PermSubgroup.full(4)
        spec = matern_u4()
        kernel = ProjectedKernel(spec, H, U4)
        xs = [U4.random_code(rng) for _ in range(5)]
        assert np.allclose(kernel.gram(xs), invariant_gram_exact(spec, H, xs))

    def test_monte_carlo_keeps_sample_across_with_spec(self, rng):
        H = PermSubgroup.full(4)
        kernel = ProjectedKernel.monte_carlo(matern_u4(), H, U4, sample_size=6, seed=1)
        xs = [U4.random_code(rng) for _ in range(4)]
        K1 = kernel.gram(xs)
        kernel2 = kernel.with_spec(matern_u4(variance=2.0))
        assert kernel2.sample == kernel.sample
        assert np.allclose(kernel2.gram(xs), 2.0 * K1)

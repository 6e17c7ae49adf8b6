"""Graphs up to relabeling: orbits, quotient graphs, and averaged kernels.

Permuting node labels partitions a graph space into orbits; for the full
symmetric group these are the isomorphism classes. A kernel averaged over
the group is constant on orbit pairs, and the same values fall out of a
spectral kernel on the weighted quotient graph whose vertices are the
orbits. Deciding whether two graphs share an orbit reduces to three
averaged-kernel values, which is why the exact computation cannot be
cheaper than isomorphism testing.
"""

import numpy as np

from graphgp import (
    GraphSpace,
    GraphSpaceKind,
    KernelSpec,
    Matern,
    PermSubgroup,
    build_quotient,
    invariant_gram_exact,
    orbit_equivalence_test,
    quotient_kernel_matrix,
)

space = GraphSpace(GraphSpaceKind.UNDIRECTED, 4)
H = PermSubgroup.full(4)

quotient = build_quotient(H, space)
print(f"undirected graphs on 4 nodes: {1 << space.d} graphs,")
print(f"{quotient.num_classes} isomorphism classes under all {H.order()} relabelings:\n")
print("  class  size  edges of canonical representative")
for i, cls in enumerate(quotient.classes):
    edges = ",".join(f"{a}{b}" for a, b in cls.canonical.edges()) or "(empty)"
    print(f"  {i:>5}  {cls.size:>4}  {edges}")

# row sums of the quotient weights recover |class| * d
sizes = quotient.sizes()
assert np.allclose(quotient.weights.sum(axis=1), sizes * space.d)
print("\nquotient weight rows sum to class size x d: verified")

# kernel between classes, two ways: exact double average over H x H, and a
# spectral kernel on the quotient graph itself
spec = KernelSpec(Matern(nu=8.5, kappa=1.0), variance=1.0)
reps = [c.canonical for c in quotient.classes]
exact = invariant_gram_exact(spec, H, reps)
via_quotient = quotient_kernel_matrix(spec, quotient)
print(f"exact group average vs quotient spectral kernel: max |diff| = "
      f"{np.abs(exact - via_quotient).max():.2e}")

print("\naveraged kernel against the empty graph, per class:")
for i in range(quotient.num_classes):
    print(f"  class {i:>2}: {exact[0, i]: .4f}")

# the three-evaluation isomorphism test
path = space.code_from_edges([[0, 1], [1, 2], [2, 3]])
star = space.code_from_edges([[0, 1], [0, 2], [0, 3]])
shuffled_path = space.code_from_edges([[2, 0], [0, 3], [3, 1]])
print("\nisomorphism via kernel values:")
print(f"  path ~ star          -> {orbit_equivalence_test(spec, H, path, star)}")
print(f"  path ~ shuffled path -> {orbit_equivalence_test(spec, H, path, shuffled_path)}")

# a finer relation: only the first three nodes may be permuted
H_partial = PermSubgroup(4, ((0, 1, 2), (3,)))
q2 = build_quotient(H_partial, space)
print(f"\nallowing only nodes 0-2 to permute: {q2.num_classes} classes "
      f"(|H| = {H_partial.order()})")

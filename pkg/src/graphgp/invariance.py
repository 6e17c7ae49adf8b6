"""Node-permutation subgroups, orbits, group-averaged kernels, quotient graphs.

A subgroup H of node permutations (restricted here to products of full
symmetric groups acting on disjoint node blocks) partitions a graph space
into orbits. Averaging an isotropic kernel over H gives the kernel of the
orbit-constant ("projected") process:

    k_H(x, y) = (1/|H|^2) sum over (s1, s2) in H x H of k(s1(x), s2(y))

which, because k is isotropic, collapses to a single average over H. Exact
evaluation requires enumerating H; deciding whether two graphs share an
orbit reduces to three such kernel values, so no shortcut exists in general
(for H the full symmetric group this is exactly graph-isomorphism testing).
A Monte Carlo estimator over one shared sample S of H handles larger groups
and is positive semidefinite by construction.

The same orbits, viewed as vertices of a weighted quotient graph, carry the
spectral kernel directly: the group-averaged kernel equals the quotient
graph's kernel scaled by sqrt(orbit sizes), provided the symmetric
normalized Laplacian and the full-space normalizer are used.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .kernels import (
    CustomPhi,
    KernelSpec,
    LaplacianVariant,
    kernel_profile,
    log_normalizer,
    spectral_coefficients,
)
from .spaces import (
    GraphCode,
    GraphSpace,
    NodePermutation,
    edge_permutation,
    popcount_u64,
)

#: Refuse to enumerate permutation groups larger than this.
ENUMERATION_CAP = 5_000_000

#: Refuse to enumerate graph spaces with more than 2^QUOTIENT_MAX_DIM codes.
QUOTIENT_MAX_DIM = 16

_WORD_MASK = (1 << 64) - 1


class GroupTooLargeError(ValueError):
    """Raised when an exact computation would need to enumerate too large a group."""


def _too_large(order: int, cap: int) -> GroupTooLargeError:
    return GroupTooLargeError(
        f"group order {order} exceeds the enumeration cap {cap}; exact computation "
        f"over equivalence classes scales with the group order (deciding orbit "
        f"equivalence this way is as hard as the underlying matching problem) - "
        f"use the Monte Carlo estimator instead"
    )


@dataclass(frozen=True)
class PermSubgroup:
    """Product of full symmetric groups on disjoint node blocks.

    ``blocks`` must partition {0..n-1}; the group consists of all node
    permutations that map each block onto itself.
    """

    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        canon = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0] if b else -1))
        object.__setattr__(self, "blocks", canon)
        flat = sorted(i for b in self.blocks for i in b)
        if flat != list(range(self.n)):
            raise ValueError(f"blocks {self.blocks} do not partition 0..{self.n - 1}")

    @classmethod
    def full(cls, n: int) -> "PermSubgroup":
        """The whole symmetric group on n nodes (orbit relation = isomorphism)."""
        return cls(n, (tuple(range(n)),))

    @classmethod
    def trivial(cls, n: int) -> "PermSubgroup":
        return cls(n, tuple((i,) for i in range(n)))

    @classmethod
    def from_string(cls, text: str, n: int) -> "PermSubgroup":
        """Parse a block list like ``"0,1,2|3"``."""
        blocks = tuple(
            tuple(int(v) for v in part.split(",") if v.strip() != "")
            for part in text.split("|")
            if part.strip() != ""
        )
        return cls(n, blocks)

    def order(self) -> int:
        out = 1
        for b in self.blocks:
            out *= math.factorial(len(b))
        return out

    def generators(self) -> tuple[NodePermutation, ...]:
        """Star transpositions within each block; they generate the group."""
        gens = []
        for block in self.blocks:
            for other in block[1:]:
                mapping = list(range(self.n))
                mapping[block[0]], mapping[other] = mapping[other], mapping[block[0]]
                gens.append(NodePermutation(tuple(mapping)))
        return tuple(gens)

    def elements(self) -> Iterator[NodePermutation]:
        """Every element, as independent arrangements of each block."""
        per_block = [list(itertools.permutations(b)) for b in self.blocks]
        for combo in itertools.product(*per_block):
            mapping = [0] * self.n
            for block, arranged in zip(self.blocks, combo):
                for src, dst in zip(block, arranged):
                    mapping[src] = dst
            yield NodePermutation(tuple(mapping))

    def random_element(self, rng: np.random.Generator) -> NodePermutation:
        """Uniform draw: an independent unbiased shuffle of each block."""
        mapping = list(range(self.n))
        for block in self.blocks:
            order = rng.permutation(len(block))
            for i, src in enumerate(block):
                mapping[src] = block[order[i]]
        return NodePermutation(tuple(mapping))


def draw_sample(
    H: PermSubgroup, size: int, seed: int | np.random.Generator
) -> tuple[NodePermutation, ...]:
    """An i.i.d. uniform sample of group elements (with replacement)."""
    if size < 1:
        raise ValueError(f"sample size must be >= 1, got {size}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return tuple(H.random_element(rng) for _ in range(size))


# -- permuted-code machinery ------------------------------------------------


def _bits_to_words(bits: int, n_words: int) -> tuple[int, ...]:
    return tuple((bits >> (64 * w)) & _WORD_MASK for w in range(n_words))


def _apply_slot_perm(bits: int, perm: Sequence[int]) -> int:
    out = 0
    b = bits
    while b:
        s = (b & -b).bit_length() - 1
        out |= 1 << perm[s]
        b &= b - 1
    return out


@lru_cache(maxsize=None)
def _slot_perms(H: PermSubgroup, space: GraphSpace) -> tuple[tuple[int, ...], ...]:
    if H.order() > ENUMERATION_CAP:
        raise _too_large(H.order(), ENUMERATION_CAP)
    return tuple(edge_permutation(sigma, space) for sigma in H.elements())


def _perm_image_words(perms_bits: list[int], n_words: int) -> np.ndarray:
    return np.array([_bits_to_words(b, n_words) for b in perms_bits], dtype=np.uint64).reshape(
        len(perms_bits), n_words
    )


@lru_cache(maxsize=None)
def _orbit_image_words(H: PermSubgroup, x: GraphCode) -> np.ndarray:
    """(|H|, ceil(d/64)) uint64 matrix of sigma(x) over all sigma in H."""
    space = x.space
    n_words = (space.d + 63) // 64 or 1
    images = [_apply_slot_perm(x.bits, perm) for perm in _slot_perms(H, space)]
    words = _perm_image_words(images, n_words)
    words.setflags(write=False)
    return words


def _distances_to_code(words: np.ndarray, bits: int) -> np.ndarray:
    n_words = words.shape[1]
    target = np.array(_bits_to_words(bits, n_words), dtype=np.uint64)
    acc = np.zeros(words.shape[0], dtype=np.int64)
    for w in range(n_words):
        acc += popcount_u64(words[:, w] ^ target[w])
    return acc


@lru_cache(maxsize=200_000)
def pair_histogram(H: PermSubgroup, x: GraphCode, y: GraphCode) -> np.ndarray:
    """Counts, over sigma in H, of the Hamming distance between sigma(x) and y.

    The histogram is symmetric in (x, y) and is what every exact
    group-averaged kernel value reduces to; caching it makes repeated kernel
    evaluations during hyperparameter search cheap.
    """
    if x.space != y.space:
        raise ValueError("codes live in different spaces")
    if y.bits < x.bits:
        x, y = y, x
    dists = _distances_to_code(_orbit_image_words(H, x), y.bits)
    hist = np.bincount(dists, minlength=x.space.d + 1).astype(float)
    hist.setflags(write=False)
    return hist


# -- orbits -----------------------------------------------------------------


@dataclass(frozen=True)
class OrbitClass:
    """An equivalence class of graphs under a node-permutation subgroup."""

    canonical: GraphCode
    size: int
    members: tuple[GraphCode, ...] | None = None


def _orbit_bits(H: PermSubgroup, space: GraphSpace, start_bits: int) -> set[int]:
    gen_perms = [edge_permutation(g, space) for g in H.generators()]
    seen = {start_bits}
    frontier = [start_bits]
    while frontier:
        nxt = []
        for b in frontier:
            for perm in gen_perms:
                nb = _apply_slot_perm(b, perm)
                if nb not in seen:
                    seen.add(nb)
                    nxt.append(nb)
        frontier = nxt
    return seen


def enumerate_orbit(
    H: PermSubgroup,
    x: GraphCode,
    cap: int = ENUMERATION_CAP,
    keep_members: bool = True,
) -> OrbitClass:
    """The orbit of a graph under H, with its lexicographically minimal member."""
    if H.order() > cap:
        raise _too_large(H.order(), cap)
    space = x.space
    orbit = _orbit_bits(H, space, x.bits)
    members = None
    if keep_members:
        members = tuple(GraphCode(space, b) for b in sorted(orbit))
    return OrbitClass(canonical=GraphCode(space, min(orbit)), size=len(orbit), members=members)


# -- exact and Monte Carlo group-averaged kernels ---------------------------


def invariant_kernel_exact(spec: KernelSpec, H: PermSubgroup, x: GraphCode, y: GraphCode) -> float:
    """Exact group-averaged kernel value.

    The double average over H x H equals the single average
    (1/|H|) sum over sigma of k(sigma(x), y) because k is isotropic and the
    sum runs over the full group.
    """
    hist = pair_histogram(H, x, y)
    profile = kernel_profile(spec, x.space.d)
    return float(hist @ profile) / H.order()


def invariant_gram_exact(
    spec: KernelSpec,
    H: PermSubgroup,
    xs: Sequence[GraphCode],
    ys: Sequence[GraphCode] | None = None,
) -> np.ndarray:
    if len(xs) == 0:
        return np.zeros((0, 0 if ys is None else len(ys)))
    d = xs[0].space.d
    profile = kernel_profile(spec, d)
    order = H.order()
    if ys is None:
        n = len(xs)
        out = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                v = float(pair_histogram(H, xs[i], xs[j]) @ profile) / order
                out[i, j] = v
                out[j, i] = v
        return out
    out = np.empty((len(xs), len(ys)))
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            out[i, j] = float(pair_histogram(H, x, y) @ profile) / order
    return out


def _sample_image_words(
    sample: Sequence[NodePermutation], x: GraphCode
) -> np.ndarray:
    space = x.space
    n_words = (space.d + 63) // 64 or 1
    images = [_apply_slot_perm(x.bits, edge_permutation(s, space)) for s in sample]
    return _perm_image_words(images, n_words)


def _sampled_value(
    profile: np.ndarray, wx: np.ndarray, wy: np.ndarray
) -> float:
    acc = np.zeros((wx.shape[0], wy.shape[0]), dtype=np.int64)
    for w in range(wx.shape[1]):
        acc += popcount_u64(np.bitwise_xor.outer(wx[:, w], wy[:, w]))
    return float(profile[acc].mean())


def invariant_kernel_sampled(
    spec: KernelSpec, sample: Sequence[NodePermutation], x: GraphCode, y: GraphCode
) -> float:
    """Double average over one fixed sample S applied to both arguments.

    With S = the whole group (each element once) this equals the exact
    group-averaged kernel; with an i.i.d. sample it is the positive
    semidefinite Monte Carlo estimator. The cheaper one-sided average
    (1/|S|) sum over sigma of k(sigma(x), y) is unbiased too but need not be
    symmetric, let alone positive semidefinite, for a partial sample - so
    this symmetric form is the only one shipped.
    """
    if len(sample) == 0:
        raise ValueError("sample must contain at least one permutation")
    profile = kernel_profile(spec, x.space.d)
    return _sampled_value(profile, _sample_image_words(sample, x), _sample_image_words(sample, y))


def invariant_kernel_mc(
    spec: KernelSpec,
    H: PermSubgroup,
    x: GraphCode,
    y: GraphCode,
    sample_size: int,
    seed: int,
) -> float:
    """Monte Carlo group-averaged kernel with a fresh uniform sample of H."""
    sample = draw_sample(H, sample_size, seed)
    return invariant_kernel_sampled(spec, sample, x, y)


def invariant_gram_sampled(
    spec: KernelSpec,
    sample: Sequence[NodePermutation],
    xs: Sequence[GraphCode],
    ys: Sequence[GraphCode] | None = None,
) -> np.ndarray:
    """Gram matrix of the sampled estimator; one shared S keeps it PSD."""
    if len(xs) == 0:
        return np.zeros((0, 0 if ys is None else len(ys)))
    profile = kernel_profile(spec, xs[0].space.d)
    words_x = [_sample_image_words(sample, x) for x in xs]
    if ys is None:
        n = len(xs)
        out = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                v = _sampled_value(profile, words_x[i], words_x[j])
                out[i, j] = v
                out[j, i] = v
        return out
    words_y = [_sample_image_words(sample, y) for y in ys]
    out = np.empty((len(xs), len(ys)))
    for i in range(len(xs)):
        for j in range(len(ys)):
            out[i, j] = _sampled_value(profile, words_x[i], words_y[j])
    return out


def invariant_gram_mc(
    spec: KernelSpec,
    H: PermSubgroup,
    xs: Sequence[GraphCode],
    ys: Sequence[GraphCode] | None = None,
    sample_size: int = 16,
    seed: int = 0,
) -> np.ndarray:
    sample = draw_sample(H, sample_size, seed)
    return invariant_gram_sampled(spec, sample, xs, ys)


# -- quotient graphs ---------------------------------------------------------


class QuotientGraph:
    """Weighted graph on the orbits of a graph space under a subgroup.

    ``weights[i, j]`` counts ordered adjacent code pairs (one bit flip apart)
    with the first code in class i and the second in class j; row sums equal
    class size times d.
    """

    def __init__(
        self,
        space: GraphSpace,
        subgroup: PermSubgroup,
        classes: tuple[OrbitClass, ...],
        weights: np.ndarray,
        class_of: np.ndarray,
    ):
        self.space = space
        self.subgroup = subgroup
        self.classes = classes
        weights = np.asarray(weights, dtype=float)
        weights.setflags(write=False)
        self.weights = weights
        class_of = np.asarray(class_of)
        class_of.setflags(write=False)
        self.class_of = class_of
        self._kernel_cache: dict[KernelSpec, np.ndarray] = {}

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def class_index(self, x: GraphCode) -> int:
        if x.space != self.space:
            raise ValueError("code belongs to a different space")
        return int(self.class_of[x.bits])

    def sizes(self) -> np.ndarray:
        return np.array([c.size for c in self.classes], dtype=float)


def build_quotient(H: PermSubgroup, space: GraphSpace, max_dim: int = QUOTIENT_MAX_DIM) -> QuotientGraph:
    """Enumerate all orbits and the inter-class edge counts of the hypercube."""
    d = space.d
    if d > max_dim:
        raise ValueError(
            f"space has 2^{d} codes, above the enumeration limit 2^{max_dim}; "
            f"quotient construction requires visiting every code"
        )
    if H.n != space.n:
        raise ValueError(f"subgroup on {H.n} nodes does not act on n={space.n}")
    size = 1 << d
    class_of = np.full(size, -1, dtype=np.int64)
    classes: list[OrbitClass] = []
    for v in range(size):
        if class_of[v] >= 0:
            continue
        orbit = _orbit_bits(H, space, v)
        idx = len(classes)
        for b in orbit:
            class_of[b] = idx
        classes.append(OrbitClass(canonical=GraphCode(space, min(orbit)), size=len(orbit)))
    h = len(classes)
    weights = np.zeros((h, h))
    codes = np.arange(size, dtype=np.int64)
    for t in range(d):
        np.add.at(weights, (class_of[codes], class_of[codes ^ (1 << t)]), 1.0)
    return QuotientGraph(space, H, tuple(classes), weights, class_of)


def quotient_kernel_matrix(spec: KernelSpec, quotient: QuotientGraph) -> np.ndarray:
    """Group-averaged kernel values between all class pairs, via the quotient.

    Eigendecomposes the quotient's symmetric normalized Laplacian, applies
    the spectral density of ``spec`` with the normalizer computed on the
    full space (so the values agree with the exact double average), and
    rescales by sqrt(class size) on each side: a class-constant eigenfunction
    that has unit norm over all 2^d codes takes the value
    g(class) / sqrt(|class|) on each member, so the per-class spectral sum
    relates to the kernel of the averaged process through exactly that
    factor.
    """
    if spec.laplacian is not LaplacianVariant.SYMMETRIC:
        raise ValueError(
            "quotient evaluation is only valid for the symmetric normalized Laplacian"
        )
    cached = quotient._kernel_cache.get(spec)
    if cached is not None:
        return cached
    d = quotient.space.d
    sizes = quotient.sizes()
    inv_sqrt_deg = 1.0 / np.sqrt(sizes * d)
    lap = np.eye(quotient.num_classes) - inv_sqrt_deg[:, None] * quotient.weights * inv_sqrt_deg[None, :]
    mu, vec = np.linalg.eigh(lap)

    J = d if spec.truncation is None else min(spec.truncation, d)
    level = np.rint(mu * d / 2.0).astype(int)
    on_lattice = (np.abs(mu * d / 2.0 - level) <= 1e-6) & (level >= 0) & (level <= d)
    lam = np.where(on_lattice, 2.0 * np.clip(level, 0, d) / d, np.clip(mu, 0.0, None))
    log_phi = np.asarray(spec.family.log_phi(lam), dtype=float)
    retained = np.where(on_lattice, level <= J, lam <= 2.0 * J / d + 1e-12)

    log_scale = math.log(spec.variance) + d * math.log(2.0) - log_normalizer(spec, d)
    with np.errstate(over="raise"):
        phi_eff = np.where(retained & np.isfinite(log_phi), np.exp(log_phi + log_scale), 0.0)
    k_classes = (vec * phi_eff) @ vec.T
    psi = np.sqrt(sizes)
    out = k_classes / (psi[:, None] * psi[None, :])
    out.setflags(write=False)
    quotient._kernel_cache[spec] = out
    return out


def quotient_kernel(spec: KernelSpec, quotient: QuotientGraph, i: int, j: int) -> float:
    """Group-averaged kernel between class i and class j, computed on the quotient."""
    h = quotient.num_classes
    if not (0 <= i < h and 0 <= j < h):
        raise ValueError(f"class indices ({i}, {j}) out of range for {h} classes")
    return float(quotient_kernel_matrix(spec, quotient)[i, j])


# -- orbit-equivalence decision via kernel values ----------------------------


def _require_strictly_positive(spec: KernelSpec, d: int) -> None:
    if spec.truncation is not None and spec.truncation < d:
        raise ValueError(
            "orbit-equivalence testing needs a spectral density that is strictly "
            "positive on every level; truncation discards levels above "
            f"{spec.truncation}"
        )
    if isinstance(spec.family, CustomPhi):
        coeffs = spectral_coefficients(spec, d)
        if not np.isfinite(coeffs.log_weights).all():
            raise ValueError(
                "orbit-equivalence testing needs a strictly positive spectral "
                "density; this one vanishes on some level"
            )


def orbit_equivalence_test(
    spec: KernelSpec,
    H: PermSubgroup,
    x: GraphCode,
    y: GraphCode,
    tol: float = 1e-9,
) -> bool:
    """Decide x ~ y under H from three exact group-averaged kernel values.

    For a strictly positive spectral density, k_H(x, y) equals the mean of
    k_H(x, x) and k_H(y, y) exactly when x and y share an orbit.
    """
    _require_strictly_positive(spec, x.space.d)
    kxy = invariant_kernel_exact(spec, H, x, y)
    kxx = invariant_kernel_exact(spec, H, x, x)
    kyy = invariant_kernel_exact(spec, H, y, y)
    return abs(kxy - 0.5 * (kxx + kyy)) <= tol * spec.variance


# -- averaging arbitrary functions -------------------------------------------


def _all_code_images(H_or_sample, space: GraphSpace) -> list[np.ndarray]:
    """Index arrays mapping every code to its image under each permutation."""
    d = space.d
    size = 1 << d
    codes = np.arange(size, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(d)[None, :]) & 1
    perms = (
        [edge_permutation(s, space) for s in H_or_sample]
        if not isinstance(H_or_sample, PermSubgroup)
        else [edge_permutation(s, space) for s in H_or_sample.elements()]
    )
    out = []
    for perm in perms:
        out.append(bits @ (np.int64(1) << np.asarray(perm, dtype=np.int64)))
    return out


def project_function(
    H: PermSubgroup,
    space: GraphSpace,
    values: np.ndarray,
    sample_size: int | None = None,
    seed: int | None = None,
    cap: int = ENUMERATION_CAP,
) -> np.ndarray:
    """Average a function over the group: out(x) = mean over sigma of f(sigma(x)).

    ``values`` holds f over all 2^d codes, indexed by code integer. The exact
    average is constant on orbits and idempotent; passing ``sample_size``
    averages over an i.i.d. sample of H instead (for groups above the cap).
    """
    d = space.d
    if d > QUOTIENT_MAX_DIM:
        raise ValueError(f"space has 2^{d} codes, above the enumeration limit 2^{QUOTIENT_MAX_DIM}")
    values = np.asarray(values, dtype=float)
    if values.shape[0] != (1 << d):
        raise ValueError(f"expected one value per code (2^{d}), got {values.shape[0]}")
    if sample_size is None:
        if H.order() > cap:
            raise _too_large(H.order(), cap)
        images = _all_code_images(H, space)
    else:
        if seed is None:
            raise ValueError("sample-based averaging requires a seed")
        images = _all_code_images(draw_sample(H, sample_size, seed), space)
    acc = np.zeros_like(values)
    for img in images:
        acc += values[img]
    return acc / len(images)


class ProjectedKernel:
    """Group-averaged kernel bound to a space: exact, or Monte Carlo with a fixed sample."""

    def __init__(
        self,
        spec: KernelSpec,
        subgroup: PermSubgroup,
        space: GraphSpace,
        sample: tuple[NodePermutation, ...] | None = None,
    ):
        if subgroup.n != space.n:
            raise ValueError(f"subgroup on {subgroup.n} nodes does not act on n={space.n}")
        self.spec = spec
        self.subgroup = subgroup
        self.space = space
        self.sample = sample

    @classmethod
    def monte_carlo(
        cls,
        spec: KernelSpec,
        subgroup: PermSubgroup,
        space: GraphSpace,
        sample_size: int,
        seed: int,
    ) -> "ProjectedKernel":
        return cls(spec, subgroup, space, sample=draw_sample(subgroup, sample_size, seed))

    def gram(self, xs: Sequence[GraphCode], ys: Sequence[GraphCode] | None = None) -> np.ndarray:
        if self.sample is None:
            return invariant_gram_exact(self.spec, self.subgroup, xs, ys)
        return invariant_gram_sampled(self.spec, self.sample, xs, ys)

    def with_spec(self, spec: KernelSpec) -> "ProjectedKernel":
        return ProjectedKernel(spec, self.subgroup, self.space, sample=self.sample)

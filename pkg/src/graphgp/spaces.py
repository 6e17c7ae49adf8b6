"""Finite spaces of unweighted graphs encoded as bit vectors.

A graph on ``n`` labeled nodes (directed or undirected, with or without
self-loops) is stored as a ``d``-bit code: one bit per admissible node pair
("edge slot"), slots ordered lexicographically over node pairs. Codes form
the group Z_2^d under bitwise XOR, and the number of differing bits between
two codes is the Hamming distance that every kernel in this package is a
function of.

All types here are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

#: Largest node count accepted by default (d up to 256 for directed+loops).
DEFAULT_MAX_NODES = 16


class GraphSpaceKind(Enum):
    """The four families of unweighted graph sets on n labeled nodes."""

    UNDIRECTED = "U"
    UNDIRECTED_LOOPS = "UL"
    DIRECTED = "D"
    DIRECTED_LOOPS = "DL"

    @property
    def directed(self) -> bool:
        return self in (GraphSpaceKind.DIRECTED, GraphSpaceKind.DIRECTED_LOOPS)

    @property
    def loops(self) -> bool:
        return self in (GraphSpaceKind.UNDIRECTED_LOOPS, GraphSpaceKind.DIRECTED_LOOPS)


def dimension(kind: GraphSpaceKind, n: int) -> int:
    """Number of edge slots ``d`` for graphs of the given kind on ``n`` nodes.

    n(n-1)/2 undirected, n(n+1)/2 undirected with loops, n(n-1) directed,
    n^2 directed with loops.
    """
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    if kind is GraphSpaceKind.UNDIRECTED:
        return n * (n - 1) // 2
    if kind is GraphSpaceKind.UNDIRECTED_LOOPS:
        return n * (n + 1) // 2
    if kind is GraphSpaceKind.DIRECTED:
        return n * (n - 1)
    return n * n


def _build_slots(kind: GraphSpaceKind, n: int) -> tuple[tuple[int, int], ...]:
    if kind is GraphSpaceKind.UNDIRECTED:
        return tuple((i, j) for i in range(n) for j in range(i + 1, n))
    if kind is GraphSpaceKind.UNDIRECTED_LOOPS:
        return tuple((i, j) for i in range(n) for j in range(i, n))
    if kind is GraphSpaceKind.DIRECTED:
        return tuple((i, j) for i in range(n) for j in range(n) if i != j)
    return tuple((i, j) for i in range(n) for j in range(n))


@dataclass(frozen=True)
class GraphSpace:
    """One of the four graph sets, with its edge-slot indexing.

    Two spaces compare equal iff they have the same kind and node count;
    the slot table is derived deterministically from those.
    """

    kind: GraphSpaceKind
    n: int
    max_nodes: int = field(default=DEFAULT_MAX_NODES, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"node count must be >= 1, got {self.n}")
        if self.n > self.max_nodes:
            raise ValueError(
                f"node count {self.n} exceeds the configured maximum "
                f"{self.max_nodes}; pass max_nodes explicitly to raise it"
            )

    @cached_property
    def d(self) -> int:
        """Edge-slot count (code length in bits)."""
        return dimension(self.kind, self.n)

    @cached_property
    def slots(self) -> tuple[tuple[int, int], ...]:
        """Slot index -> node pair, lexicographic over pairs."""
        return _build_slots(self.kind, self.n)

    @cached_property
    def _slot_index(self) -> dict[tuple[int, int], int]:
        return {pair: s for s, pair in enumerate(self.slots)}

    def canonical_pair(self, i: int, j: int) -> tuple[int, int]:
        """Validate a node pair and put it in slot-table form."""
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise ValueError(f"node pair ({i}, {j}) out of range for n={self.n}")
        if i == j and not self.kind.loops:
            raise ValueError(f"self-loop ({i}, {j}) not allowed in {self.kind.value}_{self.n}")
        if not self.kind.directed and j < i:
            i, j = j, i
        return (i, j)

    def slot_of(self, i: int, j: int) -> int:
        """Slot index of the (canonicalized) node pair."""
        return self._slot_index[self.canonical_pair(i, j)]

    def pair_of(self, slot: int) -> tuple[int, int]:
        if not (0 <= slot < self.d):
            raise ValueError(f"slot {slot} out of range for d={self.d}")
        return self.slots[slot]

    # -- code constructors ------------------------------------------------

    def code_from_int(self, bits: int) -> "GraphCode":
        return GraphCode(self, bits)

    def code_from_bits(self, bits: Iterable[int]) -> "GraphCode":
        value = 0
        count = 0
        for s, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"bit values must be 0 or 1, got {b!r}")
            value |= b << s
            count += 1
        if count != self.d:
            raise ValueError(f"expected {self.d} bits, got {count}")
        return GraphCode(self, value)

    def code_from_edges(self, edges: Iterable[Sequence[int]]) -> "GraphCode":
        """Build a code from node pairs; duplicate edges are rejected."""
        value = 0
        for edge in edges:
            i, j = edge
            s = self.slot_of(int(i), int(j))
            if value >> s & 1:
                raise ValueError(f"duplicate edge ({i}, {j})")
            value |= 1 << s
        return GraphCode(self, value)

    def empty_code(self) -> "GraphCode":
        return GraphCode(self, 0)

    def random_code(self, rng: np.random.Generator) -> "GraphCode":
        bits = 0
        for word_start in range(0, self.d, 32):
            width = min(32, self.d - word_start)
            bits |= int(rng.integers(0, 1 << width)) << word_start
        return GraphCode(self, bits)

    def all_codes(self) -> Iterator["GraphCode"]:
        """All 2^d codes; refuse to enumerate absurdly large spaces."""
        if self.d > 24:
            raise ValueError(f"refusing to enumerate 2^{self.d} graphs")
        for v in range(1 << self.d):
            yield GraphCode(self, v)


@dataclass(frozen=True)
class GraphCode:
    """A graph as a d-bit vector, element of Z_2^d under XOR."""

    space: GraphSpace
    bits: int

    def __post_init__(self) -> None:
        if not (0 <= self.bits < (1 << self.space.d)):
            raise ValueError(f"bits out of range for d={self.space.d}")

    def __xor__(self, other: "GraphCode") -> "GraphCode":
        _check_same_space(self, other)
        return GraphCode(self.space, self.bits ^ other.bits)

    @property
    def weight(self) -> int:
        """Number of set bits (edge count)."""
        return self.bits.bit_count()

    def bit(self, slot: int) -> int:
        if not (0 <= slot < self.space.d):
            raise ValueError(f"slot {slot} out of range for d={self.space.d}")
        return self.bits >> slot & 1

    def to_bits(self) -> tuple[int, ...]:
        return tuple(self.bits >> s & 1 for s in range(self.space.d))

    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(self.space.slots[s] for s in range(self.space.d) if self.bits >> s & 1)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        kind = self.space.kind.value
        return f"GraphCode({kind}_{self.space.n}, {self.bits:#x})"


def _check_same_space(x: GraphCode, y: GraphCode) -> None:
    if x.space != y.space:
        raise ValueError(
            f"codes live in different spaces: "
            f"{x.space.kind.value}_{x.space.n} vs {y.space.kind.value}_{y.space.n}"
        )


def hamming(x: GraphCode, y: GraphCode) -> int:
    """Hamming distance |x XOR y|: the number of differing edge slots."""
    _check_same_space(x, y)
    return (x.bits ^ y.bits).bit_count()


@dataclass(frozen=True)
class NodePermutation:
    """A permutation of the node labels {0..n-1}."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise ValueError(f"not a permutation of 0..{len(self.mapping) - 1}: {self.mapping}")

    @classmethod
    def identity(cls, n: int) -> "NodePermutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_sequence(cls, seq: Iterable[int]) -> "NodePermutation":
        return cls(tuple(int(v) for v in seq))

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, node: int) -> int:
        return self.mapping[node]

    def compose(self, other: "NodePermutation") -> "NodePermutation":
        """(self . other)(i) = self(other(i))."""
        if self.n != other.n:
            raise ValueError("cannot compose permutations of different sizes")
        return NodePermutation(tuple(self.mapping[other.mapping[i]] for i in range(self.n)))

    def inverse(self) -> "NodePermutation":
        inv = [0] * self.n
        for i, v in enumerate(self.mapping):
            inv[v] = i
        return NodePermutation(tuple(inv))


@lru_cache(maxsize=None)
def edge_permutation(sigma: NodePermutation, space: GraphSpace) -> tuple[int, ...]:
    """Slot permutation induced by a node permutation.

    Returns ``perm`` such that relabeling nodes by ``sigma`` moves the bit in
    slot ``s`` to slot ``perm[s]``.
    """
    if sigma.n != space.n:
        raise ValueError(f"permutation of {sigma.n} nodes does not act on n={space.n}")
    perm = tuple(
        space._slot_index[space.canonical_pair(sigma.mapping[i], sigma.mapping[j])]
        for (i, j) in space.slots
    )
    if sorted(perm) != list(range(space.d)):
        raise AssertionError("induced slot map is not a bijection")
    return perm


def permute_bits(x: GraphCode, slot_perm: Sequence[int]) -> GraphCode:
    """Apply an arbitrary permutation of edge slots (bit s moves to slot_perm[s])."""
    out = 0
    bits = x.bits
    for s in range(x.space.d):
        if bits >> s & 1:
            out |= 1 << slot_perm[s]
    return GraphCode(x.space, out)


def apply_permutation(sigma: NodePermutation, x: GraphCode) -> GraphCode:
    """Relabel the nodes of a graph: edge {i,j} becomes {sigma(i), sigma(j)}."""
    return permute_bits(x, edge_permutation(sigma, x.space))


# -- bulk bit utilities ---------------------------------------------------

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


def popcount_u64(a: np.ndarray) -> np.ndarray:
    """Per-element population count of a uint64 array."""
    a = a.astype(np.uint64, copy=True)
    a -= (a >> np.uint64(1)) & _M1
    a = (a & _M2) + ((a >> np.uint64(2)) & _M2)
    a = (a + (a >> np.uint64(4))) & _M4
    return ((a * _H01) >> np.uint64(56)).astype(np.int64)


def codes_to_uint64(codes: Sequence[GraphCode]) -> np.ndarray:
    """Pack codes into a uint64 array; only valid for d <= 64."""
    if codes and codes[0].space.d > 64:
        raise ValueError("codes wider than 64 bits cannot be packed into uint64")
    return np.array([c.bits for c in codes], dtype=np.uint64)


def pairwise_hamming(xs: Sequence[GraphCode], ys: Sequence[GraphCode] | None = None) -> np.ndarray:
    """Matrix of Hamming distances between two code lists (fast for d <= 64)."""
    if ys is None:
        ys = xs
    if len(xs) == 0 or len(ys) == 0:
        return np.zeros((len(xs), len(ys)), dtype=np.int64)
    space = xs[0].space
    for c in xs[1:]:
        _check_same_space(xs[0], c)
    for c in ys:
        _check_same_space(xs[0], c)
    if space.d <= 64:
        ax = codes_to_uint64(xs)
        ay = codes_to_uint64(ys)
        return popcount_u64(np.bitwise_xor.outer(ax, ay))
    out = np.empty((len(xs), len(ys)), dtype=np.int64)
    for i, x in enumerate(xs):
        xb = x.bits
        for j, y in enumerate(ys):
            out[i, j] = (xb ^ y.bits).bit_count()
    return out


def bit_matrix(xs: Sequence[GraphCode]) -> np.ndarray:
    """(len(xs), d) 0/1 float matrix of code bits."""
    if not xs:
        return np.zeros((0, 0))
    d = xs[0].space.d
    out = np.zeros((len(xs), d))
    for i, x in enumerate(xs):
        for s in range(d):
            if x.bits >> s & 1:
                out[i, s] = 1.0
    return out


# -- JSON graph format ----------------------------------------------------

_KIND_BY_CODE = {k.value: k for k in GraphSpaceKind}


def space_from_json(obj: dict, max_nodes: int = DEFAULT_MAX_NODES) -> GraphSpace:
    """Parse ``{"kind": "U"|"UL"|"D"|"DL", "n": <int>}``."""
    try:
        kind = _KIND_BY_CODE[obj["kind"]]
    except KeyError:
        raise ValueError(f"unknown graph kind {obj.get('kind')!r}; expected one of U, UL, D, DL")
    return GraphSpace(kind, int(obj["n"]), max_nodes=max_nodes)


def graph_from_json(obj: dict, max_nodes: int = DEFAULT_MAX_NODES) -> GraphCode:
    """Parse ``{"kind": ..., "n": ..., "edges": [[i, j], ...]}``.

    Undirected edge pairs may appear in either order and are canonicalized;
    duplicates (after canonicalization) and disallowed self-loops are
    rejected.
    """
    space = space_from_json(obj, max_nodes=max_nodes)
    return space.code_from_edges(obj.get("edges", []))


def graph_to_json(x: GraphCode) -> dict:
    return {
        "kind": x.space.kind.value,
        "n": x.space.n,
        "edges": [list(e) for e in x.edges()],
    }


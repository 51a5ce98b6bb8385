"""Packed binary vectors and the block/permutation machinery on top of them.

Coordinates are 1-indexed throughout: coordinate j lives in bit (j-1) % 64
of word (j-1) // 64, i.e. LSB-first inside little-endian uint64 words.
Unused bits of the last word are always zero, so word tuples compare and
hash canonically.

Scalar operations go through Python big ints (exact, no overflow anywhere);
the batch helpers at the bottom keep whole lists as (n, words) uint64
matrices for the solver's hot loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

WORD_BITS = 64
MAX_DIM = 1 << 20


def n_words(dim: int) -> int:
    """Number of 64-bit words needed for a dim-bit vector."""
    return (dim + WORD_BITS - 1) // WORD_BITS


def _dim_mask(dim: int) -> int:
    return (1 << dim) - 1


def _check_dim(dim: int) -> None:
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {dim}")


@dataclass(frozen=True)
class BitVector:
    """An element of F_2^dim, packed into 64-bit words.

    Immutable; all operations return fresh vectors.
    """

    dim: int
    words: tuple[int, ...]

    def __post_init__(self):
        _check_dim(self.dim)
        w = tuple(int(x) for x in self.words)
        if len(w) != n_words(self.dim):
            raise ValueError(f"expected {n_words(self.dim)} words, got {len(w)}")
        object.__setattr__(self, "words", w)
        pad = self.dim % WORD_BITS
        for word in w:
            if not 0 <= word < (1 << WORD_BITS):
                raise ValueError("word out of uint64 range")
        if pad and w[-1] >> pad:
            raise ValueError("padding bits beyond the dimension must be zero")

    @classmethod
    def zeros(cls, dim: int) -> "BitVector":
        return cls(dim, (0,) * n_words(dim))

    @classmethod
    def from_int(cls, dim: int, value: int) -> "BitVector":
        _check_dim(dim)
        if not 0 <= value <= _dim_mask(dim):
            raise ValueError("value does not fit in the dimension")
        words = tuple((value >> (WORD_BITS * t)) & ((1 << WORD_BITS) - 1) for t in range(n_words(dim)))
        return cls(dim, words)

    @classmethod
    def from_coords(cls, dim: int, coords: Iterable[int]) -> "BitVector":
        """Vector with ones exactly at the given 1-indexed coordinates."""
        value = 0
        for j in coords:
            if not 1 <= j <= dim:
                raise ValueError(f"coordinate {j} outside [1, {dim}]")
            value |= 1 << (j - 1)
        return cls.from_int(dim, value)

    @classmethod
    def from_bits(cls, bits: str | Sequence[int]) -> "BitVector":
        """Build from a coordinate-order bit string such as "1100"."""
        seq = [int(b) for b in bits]
        if any(b not in (0, 1) for b in seq):
            raise ValueError("bits must be 0 or 1")
        return cls.from_coords(len(seq), (j + 1 for j, b in enumerate(seq) if b))

    def to_int(self) -> int:
        value = 0
        for t, word in enumerate(self.words):
            value |= word << (WORD_BITS * t)
        return value

    def coord(self, j: int) -> int:
        """The 1-indexed coordinate j, as 0 or 1."""
        if not 1 <= j <= self.dim:
            raise ValueError(f"coordinate {j} outside [1, {self.dim}]")
        return (self.words[(j - 1) // WORD_BITS] >> ((j - 1) % WORD_BITS)) & 1

    def support(self) -> tuple[int, ...]:
        """Ascending 1-indexed coordinates that are set."""
        out, value, base = [], self.to_int(), 0
        while value:
            low = value & -value
            out.append(base + low.bit_length())
            # strip everything through the lowest set bit
            base += low.bit_length()
            value >>= low.bit_length()
        return tuple(out)

    def __xor__(self, other: "BitVector") -> "BitVector":
        return xor(self, other)

    def __str__(self) -> str:
        return "".join(str(self.coord(j)) for j in range(1, self.dim + 1))


def weight(v: BitVector) -> int:
    """Hamming weight of v."""
    return sum(w.bit_count() for w in v.words)


def xor(v: BitVector, w: BitVector) -> BitVector:
    if v.dim != w.dim:
        raise ValueError("dimension mismatch")
    return BitVector(v.dim, tuple(a ^ b for a, b in zip(v.words, w.words)))


def distance(v: BitVector, w: BitVector) -> int:
    """Hamming distance wt(v + w)."""
    if v.dim != w.dim:
        raise ValueError("dimension mismatch")
    return sum((a ^ b).bit_count() for a, b in zip(v.words, w.words))


def complement(v: BitVector) -> BitVector:
    return BitVector.from_int(v.dim, v.to_int() ^ _dim_mask(v.dim))


@dataclass(frozen=True)
class BlockSpec:
    """Partition of [1, dim] into r contiguous blocks.

    Blocks 1..r-1 have width k = dim // r; the last block absorbs the
    remainder and has width k + dim mod r.
    """

    dim: int
    r: int

    def __post_init__(self):
        _check_dim(self.dim)
        if not 1 <= self.r <= self.dim:
            raise ValueError(f"block count must be in [1, {self.dim}], got {self.r}")

    @property
    def k(self) -> int:
        return self.dim // self.r

    def width(self, i: int) -> int:
        self._check_index(i)
        return self.k + (self.dim % self.r if i == self.r else 0)

    def bounds(self, i: int) -> tuple[int, int]:
        """Half-open 0-based bit range [start, stop) of block i."""
        self._check_index(i)
        start = (i - 1) * self.k
        return start, start + self.width(i)

    def _check_index(self, i: int) -> None:
        if not 1 <= i <= self.r:
            raise ValueError(f"block index {i} outside [1, {self.r}]")


def block_project(v: BitVector, spec: BlockSpec, i: int) -> BitVector:
    """Block i of v as a block-local vector of the block's width."""
    if v.dim != spec.dim:
        raise ValueError("dimension mismatch")
    start, stop = spec.bounds(i)
    return BitVector.from_int(stop - start, (v.to_int() >> start) & _dim_mask(stop - start))


def block_weight(v: BitVector, z: BitVector, spec: BlockSpec, i: int) -> int:
    """wt(block_i(v) + z) for a block-local z of matching width."""
    blk = block_project(v, spec, i)
    if z.dim != blk.dim:
        raise ValueError(f"z must have the block width {blk.dim}, got {z.dim}")
    return distance(blk, z)


@dataclass(frozen=True)
class Permutation:
    """Bijection on coordinates; map[j-1] is the image of coordinate j."""

    dim: int
    map: tuple[int, ...]

    def __post_init__(self):
        _check_dim(self.dim)
        m = tuple(int(x) for x in self.map)
        object.__setattr__(self, "map", m)
        if sorted(m) != list(range(1, self.dim + 1)):
            raise ValueError("map is not a bijection on [1, dim]")

    @classmethod
    def identity(cls, dim: int) -> "Permutation":
        return cls(dim, tuple(range(1, dim + 1)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.dim
        for j, image in enumerate(self.map, start=1):
            inv[image - 1] = j
        return Permutation(self.dim, tuple(inv))


def apply_permutation(v: BitVector, perm: Permutation) -> BitVector:
    """Vector whose coordinate perm.map[j-1] equals coordinate j of v."""
    if v.dim != perm.dim:
        raise ValueError("dimension mismatch")
    value = 0
    for j in v.support():
        value |= 1 << (perm.map[j - 1] - 1)
    return BitVector.from_int(v.dim, value)


# --- seeded randomness -----------------------------------------------------
#
# Philox is counter-based, so independent streams are cheap and every draw
# is reproducible from an explicit integer seed.  Everything random in the
# package takes one of these generators as a parameter.


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator for the given seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent child generators derived from one seed."""
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(count)]


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed from a tuple of integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


def random_vector(rng: np.random.Generator, dim: int) -> BitVector:
    """Uniform element of F_2^dim."""
    _check_dim(dim)
    words = rng.integers(0, 1 << WORD_BITS, size=n_words(dim), dtype=np.uint64)
    return BitVector(dim, tuple(int(w) for w in mask_pad(words.reshape(1, -1), dim)[0]))


def random_weight_vector(rng: np.random.Generator, dim: int, w: int) -> BitVector:
    """Uniform vector on the weight-w sphere (truncated Fisher-Yates support)."""
    _check_dim(dim)
    if not 0 <= w <= dim:
        raise ValueError(f"weight must be in [0, {dim}], got {w}")
    support = rng.permutation(dim)[:w]
    return BitVector.from_coords(dim, (int(j) + 1 for j in support))


def random_permutation(rng: np.random.Generator, dim: int) -> Permutation:
    return Permutation(dim, tuple(int(j) + 1 for j in rng.permutation(dim)))


# --- packed matrix layer ---------------------------------------------------
#
# The generator and solver keep whole lists as (n, n_words(d)) uint64
# matrices, row index = list index, same word layout as BitVector.words.


def mask_pad(mat: np.ndarray, dim: int) -> np.ndarray:
    """Zero the padding bits of the last word column, in place."""
    pad = dim % WORD_BITS
    if pad:
        mat[..., -1] &= np.uint64((1 << pad) - 1)
    return mat


def pack_rows(vectors: Sequence[BitVector]) -> np.ndarray:
    """Stack BitVectors into an (n, words) uint64 matrix."""
    if not vectors:
        raise ValueError("empty vector list")
    dim = vectors[0].dim
    if any(v.dim != dim for v in vectors):
        raise ValueError("mixed dimensions")
    return np.array([v.words for v in vectors], dtype=np.uint64)

def unpack_row(dim: int, row: np.ndarray) -> BitVector:
    return BitVector(dim, tuple(int(w) for w in row))


def rows_to_vectors(dim: int, mat: np.ndarray) -> tuple[BitVector, ...]:
    return tuple(BitVector(dim, tuple(r)) for r in mat.tolist())


def pack_bit_matrix(bits: np.ndarray) -> np.ndarray:
    """Pack an (n, d) 0/1 matrix into (n, words) uint64, coordinate order."""
    n, d = bits.shape
    packed = np.packbits(bits.astype(np.uint8), axis=1, bitorder="little")
    full = np.zeros((n, n_words(d) * 8), dtype=np.uint8)
    full[:, : packed.shape[1]] = packed
    return full.view(np.uint64)


def unpack_bit_matrix(mat: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of pack_bit_matrix; returns an (n, dim) uint8 matrix."""
    bits = np.unpackbits(mat.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :dim]


def row_weights(mat: np.ndarray) -> np.ndarray:
    """Hamming weight of every row."""
    return np.bitwise_count(mat).sum(axis=1, dtype=np.int64)


def permute_columns(mat: np.ndarray, perm: Permutation) -> np.ndarray:
    """Apply a coordinate permutation to every row of a packed matrix."""
    dim = perm.dim
    bits = unpack_bit_matrix(mat, dim)
    out = np.empty_like(bits)
    idx = np.asarray(perm.map, dtype=np.int64) - 1
    out[:, idx] = bits
    return pack_bit_matrix(out)


def draw_block_zs(rng: np.random.Generator, count: int, width: int) -> np.ndarray:
    """count uniform block-local vectors, one per row, width bits each."""
    zw = n_words(width)
    zs = rng.integers(0, 1 << WORD_BITS, size=(count, zw), dtype=np.uint64)
    return mask_pad(zs, width)


def align_block_zs(zs: np.ndarray, spec: BlockSpec, i: int) -> tuple[np.ndarray, int, int, np.ndarray]:
    """Shift block-local z rows into block i's position inside the full layout.

    Returns (aligned, w0, w1, mask) where aligned has shape (count, w1 - w0)
    covering words [w0, w1) of the packed layout, and mask selects exactly
    the block's bits within that word span.  XOR-ing a masked row slice with
    an aligned z keeps everything outside the block at zero, so a popcount
    of the result is the block weight.
    """
    start, stop = spec.bounds(i)
    w0, w1 = start // WORD_BITS, (stop + WORD_BITS - 1) // WORD_BITS
    span = w1 - w0
    off = start - w0 * WORD_BITS

    count = zs.shape[0]
    aligned = np.zeros((count, span), dtype=np.uint64)
    aligned[:, : zs.shape[1]] = zs
    if off:
        sh = np.uint64(off)
        inv = np.uint64(WORD_BITS - off)
        carry = aligned >> inv
        aligned <<= sh
        aligned[:, 1:] |= carry[:, :-1]

    mask_bits = np.zeros(span * WORD_BITS, dtype=np.uint8)
    mask_bits[off : off + (stop - start)] = 1
    mask = np.packbits(mask_bits, bitorder="little").view(np.uint64)
    return aligned, w0, w1, mask


def block_weights_batch(sub: np.ndarray, aligned: np.ndarray) -> np.ndarray:
    """Pairwise block weights between masked row slices and aligned z rows.

    sub is (m, span) already masked to the block, aligned is (s, span);
    the result is an (m, s) int32 weight matrix.
    """
    if sub.shape[1] == 1:
        # single-word blocks dominate in practice; skip the 3-d temporary
        return np.bitwise_count(sub[:, 0, None] ^ aligned[None, :, 0]).astype(np.int32)
    x = sub[:, None, :] ^ aligned[None, :, :]
    return np.bitwise_count(x).sum(axis=2, dtype=np.int32)

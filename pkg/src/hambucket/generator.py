"""Planted closest-pair instances and their plain-text file format.

An instance file is line-oriented ASCII:

    CPINST 1 d=<d> n=<n> gamma=<count> planted=<i>,<j> model=<token> seed=<seed>
    <n hex rows of list 1>
    <blank line>
    <n hex rows of list 2>

planted is "none" when no pair is tracked.  Each row is ceil(d/4) lowercase
hex digits; digit t encodes coordinates 4t+1..4t+4, lowest coordinate in the
lowest bit, i.e. nibble t of the packed word layout.  Padding bits beyond
the dimension must be zero; readers reject files that violate this.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Optional

import numpy as np

from .analysis import DistributionModel, round_nearest
from .bitvec import (
    BitVector,
    distance,
    make_rng,
    mask_pad,
    n_words,
    pack_bit_matrix,
    pack_rows,
    rows_to_vectors,
    MAX_DIM,
    WORD_BITS,
)

_MAGIC = "CPINST"
_VERSION = "1"
_ROW_ELEM_BUDGET = 1 << 24  # floats per sampling slab


class InstanceParseError(ValueError):
    """Raised when an instance file is malformed; messages carry line numbers."""


@dataclass(frozen=True)
class Instance:
    """Two lists of n vectors in F_2^d with an optional tracked pair."""

    d: int
    n: int
    gamma_count: int
    list1: tuple[BitVector, ...]
    list2: tuple[BitVector, ...]
    planted: Optional[tuple[int, int]]
    model: DistributionModel
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 <= self.gamma_count <= self.d:
            raise ValueError(f"gamma_count outside [0, {self.d}]: {self.gamma_count}")
        if len(self.list1) != self.n or len(self.list2) != self.n:
            raise ValueError("list lengths must equal n")
        for v in (*self.list1, *self.list2):
            if v.dim != self.d:
                raise ValueError("vector dimension mismatch")
        if self.planted is not None:
            i, j = self.planted
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"planted indices ({i}, {j}) outside [0, {self.n})")
            got = distance(self.list1[i], self.list2[j])
            if got != self.gamma_count:
                raise ValueError(
                    f"planted pair is at distance {got}, expected gamma_count={self.gamma_count}"
                )


def _uniform_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    words = rng.integers(0, 1 << WORD_BITS, size=(n, n_words(d)), dtype=np.uint64)
    return mask_pad(words, d)


def _fixed_rows(rng: np.random.Generator, n: int, d: int, w: int) -> np.ndarray:
    out = np.zeros((n, d), dtype=np.uint8)
    if w > 0:
        chunk = max(1, _ROW_ELEM_BUDGET // d)
        for lo in range(0, n, chunk):
            m = min(chunk, n - lo)
            keys = rng.random((m, d))
            if w < d:
                support = np.argpartition(keys, w - 1, axis=1)[:, :w]
            else:
                support = np.broadcast_to(np.arange(d), (m, d))
            rows = np.repeat(np.arange(lo, lo + m), w)
            out[rows, support.ravel()] = 1
    return pack_bit_matrix(out)


def _bernoulli_rows(rng: np.random.Generator, n: int, d: int, mu: float) -> np.ndarray:
    out = np.zeros((n, d), dtype=np.uint8)
    chunk = max(1, _ROW_ELEM_BUDGET // d)
    for lo in range(0, n, chunk):
        m = min(chunk, n - lo)
        out[lo : lo + m] = rng.random((m, d)) < mu
    return pack_bit_matrix(out)


def _poisson_rows(rng: np.random.Generator, n: int, d: int, mean_fraction: float) -> np.ndarray:
    weights = np.minimum(rng.poisson(mean_fraction * d, size=n), d)
    out = np.zeros((n, d), dtype=np.uint8)
    order = np.argsort(rng.random((n, d)), axis=1)
    for row in range(n):
        out[row, order[row, : weights[row]]] = 1
    return pack_bit_matrix(out)


def _draw_rows(rng: np.random.Generator, n: int, d: int, model: DistributionModel) -> np.ndarray:
    if model.kind == "uniform":
        return _uniform_rows(rng, n, d)
    if model.kind == "fixed":
        return _fixed_rows(rng, n, d, round_nearest(model.param * d))
    if model.kind == "bernoulli":
        return _bernoulli_rows(rng, n, d, model.param)
    return _poisson_rows(rng, n, d, model.param)


def gen_instance(d: int, n: int, gamma_count: int, model: DistributionModel, seed: int) -> Instance:
    """Draw both lists from the model and plant a pair at distance gamma_count.

    The planted x is the model draw already sitting at a random index of
    list 1; y = x + e for a uniform weight-gamma_count error e overwrites a
    random index of list 2.  (For non-uniform models the overwritten y may
    deviate from the model's weight profile; the pair distance is exact.)
    All randomness comes from one sequential stream, so the same seed gives
    byte-identical instances.
    """
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"d outside [1, {MAX_DIM}]: {d}")
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 <= gamma_count <= d:
        raise ValueError(f"gamma_count outside [0, {d}]: {gamma_count}")
    rng = make_rng(seed)
    mat1 = _draw_rows(rng, n, d, model)
    mat2 = _draw_rows(rng, n, d, model)
    i = int(rng.integers(n))
    j = int(rng.integers(n))
    err_bits = np.zeros((1, d), dtype=np.uint8)
    err_bits[0, rng.permutation(d)[:gamma_count]] = 1
    mat2[j] = mat1[i] ^ pack_bit_matrix(err_bits)[0]
    return Instance(
        d=d,
        n=n,
        gamma_count=gamma_count,
        list1=rows_to_vectors(d, mat1),
        list2=rows_to_vectors(d, mat2),
        planted=(i, j),
        model=model,
        seed=seed,
    )


# --- serialization -----------------------------------------------------------


def _hex_rows(vectors) -> list[str]:
    mat = pack_rows(vectors)
    digits = (vectors[0].dim + 3) // 4
    u8 = mat.view(np.uint8)
    swapped = ((u8 & 0x0F) << 4) | (u8 >> 4)  # low nibble first in the hex text
    return [bytes(row).hex()[:digits] for row in swapped]


def write_instance(inst: Instance, destination: str | Path | IO[str]) -> None:
    """Serialize to the plain-text format, LF line endings, trailing newline."""
    planted = "none" if inst.planted is None else f"{inst.planted[0]},{inst.planted[1]}"
    header = (
        f"{_MAGIC} {_VERSION} d={inst.d} n={inst.n} gamma={inst.gamma_count} "
        f"planted={planted} model={inst.model.token()} seed={inst.seed}"
    )
    lines = [header, *_hex_rows(inst.list1), "", *_hex_rows(inst.list2)]
    text = "\n".join(lines) + "\n"
    if isinstance(destination, (str, Path)):
        with open(destination, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        destination.write(text)


def _parse_header(line: str) -> dict:
    tokens = line.split(" ")
    keys = ("d", "n", "gamma", "planted", "model", "seed")
    if len(tokens) != 2 + len(keys) or tokens[0] != _MAGIC:
        raise InstanceParseError(f"line 1: malformed header {line!r}")
    if tokens[1] != _VERSION:
        raise InstanceParseError(f"line 1: unsupported format version {tokens[1]!r}")
    fields = {}
    for key, token in zip(keys, tokens[2:]):
        name, sep, value = token.partition("=")
        if not sep or name != key:
            raise InstanceParseError(f"line 1: expected {key}=..., got {token!r}")
        fields[key] = value
    out = {}
    for key in ("d", "n", "gamma", "seed"):
        try:
            out[key] = int(fields[key])
        except ValueError:
            raise InstanceParseError(f"line 1: {key} is not an integer: {fields[key]!r}") from None
    if not 1 <= out["d"] <= MAX_DIM:
        raise InstanceParseError(f"line 1: d outside [1, {MAX_DIM}]")
    if out["n"] < 1:
        raise InstanceParseError("line 1: n must be positive")
    if not 0 <= out["gamma"] <= out["d"]:
        raise InstanceParseError("line 1: gamma outside [0, d]")
    if fields["planted"] == "none":
        out["planted"] = None
    else:
        left, sep, right = fields["planted"].partition(",")
        try:
            pair = (int(left), int(right))
        except ValueError:
            raise InstanceParseError(f"line 1: malformed planted field {fields['planted']!r}") from None
        if not sep or not (0 <= pair[0] < out["n"] and 0 <= pair[1] < out["n"]):
            raise InstanceParseError(f"line 1: planted indices outside [0, n)")
        out["planted"] = pair
    try:
        out["model"] = DistributionModel.from_token(fields["model"])
    except ValueError as exc:
        raise InstanceParseError(f"line 1: {exc}") from None
    return out


_HEX_DIGITS = frozenset("0123456789abcdef")


def _parse_rows(lines: list[str], first_line_no: int, n: int, d: int) -> np.ndarray:
    digits = (d + 3) // 4
    raw = np.zeros((n, n_words(d) * 8), dtype=np.uint8)
    for row, line in enumerate(lines):
        line_no = first_line_no + row
        if len(line) != digits:
            raise InstanceParseError(
                f"line {line_no}: expected {digits} hex digits, got {len(line)}"
            )
        if not set(line) <= _HEX_DIGITS:
            raise InstanceParseError(f"line {line_no}: non-hex payload {line!r}")
        b = bytes.fromhex(line if len(line) % 2 == 0 else line + "0")
        raw[row, : len(b)] = np.frombuffer(b, dtype=np.uint8)
    swapped = ((raw & 0x0F) << 4) | (raw >> 4)
    mat = swapped.view(np.uint64)
    pad = d % WORD_BITS
    if pad:
        bad = mat[:, -1] >> np.uint64(pad)
        if bad.any():
            row = int(np.nonzero(bad)[0][0])
            raise InstanceParseError(
                f"line {first_line_no + row}: nonzero padding bits beyond dimension {d}"
            )
    return mat


def read_instance(source: str | Path | IO[str]) -> Instance:
    """Parse an instance file; raises InstanceParseError with the offending line."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="ascii") as fh:
            text = fh.read()
    else:
        text = source.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise InstanceParseError("line 1: empty file")
    head = _parse_header(lines[0])
    n, d = head["n"], head["d"]
    expected = 1 + n + 1 + n
    if len(lines) < expected:
        raise InstanceParseError(
            f"line {len(lines) + 1}: truncated file, expected {expected} lines, got {len(lines)}"
        )
    if len(lines) > expected:
        raise InstanceParseError(f"line {expected + 1}: trailing data after {expected} lines")
    if lines[1 + n] != "":
        raise InstanceParseError(f"line {n + 2}: expected a blank separator line")
    mat1 = _parse_rows(lines[1 : 1 + n], 2, n, d)
    mat2 = _parse_rows(lines[2 + n : 2 + 2 * n], n + 3, n, d)
    try:
        return Instance(
            d=d,
            n=n,
            gamma_count=head["gamma"],
            list1=rows_to_vectors(d, mat1),
            list2=rows_to_vectors(d, mat2),
            planted=head["planted"],
            model=head["model"],
            seed=head["seed"],
        )
    except ValueError as exc:
        raise InstanceParseError(f"line 1: {exc}") from None

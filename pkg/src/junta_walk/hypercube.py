"""Bit-packed points of {-1,+1}^n, index sets, truth tables, and junta hypotheses.

Encoding convention used throughout the package: bit i-1 of an unsigned word is
set iff coordinate x_i = -1.  The all-(+1) point is the word 0, the basis point
e_i (all +1 except coordinate i) is the single set bit 1 << (i-1), coordinatewise
product x (*) y is XOR of the words, and the parity chi_S(x) = prod_{i in S} x_i
is the popcount parity of (S_mask AND x_bits).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

MAX_PACKED_N = 63
MAX_TABLE_N = 24

_SIGN = (1, -1)  # parity 0 -> +1, parity 1 -> -1


def popcount_u64(a: np.ndarray) -> np.ndarray:
    """Per-element popcount of a uint64 array."""
    return np.bitwise_count(a)


def parity_sign_u64(bits: np.ndarray, mask: int) -> np.ndarray:
    """chi_S over an array of packed points: +1/-1 int8 array."""
    par = np.bitwise_count(bits & np.uint64(mask)) & np.uint8(1)
    return (1 - 2 * par.astype(np.int8)).astype(np.int8)


def _check_dim(n: int) -> None:
    if not 1 <= n <= MAX_PACKED_N:
        raise ValueError(f"dimension n={n} outside [1, {MAX_PACKED_N}]")


@dataclass(frozen=True)
class Point:
    """A vertex of {-1,+1}^n, packed into an unsigned word."""

    n: int
    bits: int = 0

    def __post_init__(self) -> None:
        _check_dim(self.n)
        if self.bits >> self.n:
            raise ValueError(f"bits 0x{self.bits:x} has set bits above position {self.n}")

    @classmethod
    def from_signs(cls, signs: Sequence[int]) -> "Point":
        bits = 0
        for i, s in enumerate(signs):
            if s == -1:
                bits |= 1 << i
            elif s != 1:
                raise ValueError(f"coordinate value {s} not in {{-1,+1}}")
        return cls(len(signs), bits)

    @classmethod
    def basis(cls, n: int, i: int) -> "Point":
        """e_i: all +1 except coordinate i."""
        _check_coord(i, n)
        return cls(n, 1 << (i - 1))

    def signs(self) -> tuple[int, ...]:
        return tuple(_SIGN[(self.bits >> i) & 1] for i in range(self.n))

    def coord(self, i: int) -> int:
        _check_coord(i, self.n)
        return _SIGN[(self.bits >> (i - 1)) & 1]

    def mul(self, other: "Point") -> "Point":
        """Coordinatewise product x (*) y; XOR of packed words."""
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} != {other.n}")
        return Point(self.n, self.bits ^ other.bits)

    def to_text(self) -> str:
        """'+'/'-' characters in coordinate order 1..n."""
        return "".join("-" if (self.bits >> i) & 1 else "+" for i in range(self.n))

    @classmethod
    def from_text(cls, text: str) -> "Point":
        bits = 0
        for i, ch in enumerate(text):
            if ch in "-−":
                bits |= 1 << i
            elif ch != "+":
                raise ValueError(f"bad point character {ch!r}")
        return cls(len(text), bits)


def _check_coord(i: int, n: int) -> None:
    if not 1 <= i <= n:
        raise ValueError(f"coordinate {i} outside [1, {n}]")


def flip(x: Point, i: int) -> Point:
    """The neighbour of x across coordinate i."""
    _check_coord(i, x.n)
    return Point(x.n, x.bits ^ (1 << (i - 1)))


@dataclass(frozen=True)
class IndexSet:
    """A subset S of [n], packed as a bit mask (bit i-1 set iff i in S)."""

    n: int
    mask: int = 0

    def __post_init__(self) -> None:
        _check_dim(self.n)
        if self.mask >> self.n:
            raise ValueError(f"mask 0x{self.mask:x} has set bits above position {self.n}")

    @classmethod
    def of(cls, n: int, coords: Iterable[int]) -> "IndexSet":
        mask = 0
        for i in coords:
            _check_coord(i, n)
            mask |= 1 << (i - 1)
        return cls(n, mask)

    @classmethod
    def full(cls, n: int) -> "IndexSet":
        return cls(n, (1 << n) - 1)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __contains__(self, i: int) -> bool:
        return 1 <= i <= self.n and bool((self.mask >> (i - 1)) & 1)

    def __iter__(self) -> Iterator[int]:
        m = self.mask
        while m:
            low = m & -m
            yield low.bit_length()
            m ^= low

    def coords(self) -> tuple[int, ...]:
        return tuple(self)

    def union(self, other: "IndexSet") -> "IndexSet":
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} != {other.n}")
        return IndexSet(self.n, self.mask | other.mask)

    def complement(self) -> "IndexSet":
        return IndexSet(self.n, ((1 << self.n) - 1) ^ self.mask)


def chi(S: IndexSet, x: Point) -> int:
    """Parity chi_S(x) = prod_{i in S} x_i, computed as a popcount parity."""
    if S.n != x.n:
        raise ValueError(f"dimension mismatch: {S.n} != {x.n}")
    return _SIGN[(S.mask & x.bits).bit_count() & 1]


def restriction_indices(J: IndexSet, bits: np.ndarray | int) -> np.ndarray:
    """Compress packed points onto J: bit j of the result is the j-th smallest
    coordinate of J, giving an index into a 2^|J| table."""
    bits = np.asarray(bits, dtype=np.uint64)
    idx = np.zeros(bits.shape, dtype=np.int64)
    for j, c in enumerate(J):
        idx |= ((bits >> np.uint64(c - 1)) & np.uint64(1)).astype(np.int64) << j
    return idx


def _as_sign_array(values: Sequence[int] | np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int8)
    if not np.all(np.abs(arr) == 1):
        raise ValueError("truth table values must all be +1 or -1")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TruthTable:
    """Explicit f: {-1,+1}^n -> {-1,+1}; values indexed by the packed-bits encoding."""

    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_TABLE_N:
            raise ValueError(f"truth table dimension n={self.n} outside [1, {MAX_TABLE_N}]")
        object.__setattr__(self, "values", _as_sign_array(self.values))
        if len(self.values) != 1 << self.n:
            raise ValueError(f"expected {1 << self.n} values, got {len(self.values)}")

    def __call__(self, x: Point | int) -> int:
        bits = x.bits if isinstance(x, Point) else x
        return int(self.values[bits])

    def label_bits(self, bits: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an array of packed points."""
        return self.values[bits.astype(np.int64)]

    def negate(self) -> "TruthTable":
        return TruthTable(self.n, -self.values)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "values": [int(v) for v in self.values]})

    @classmethod
    def from_json(cls, text: str) -> "TruthTable":
        obj = json.loads(text)
        return cls(int(obj["n"]), obj["values"])


@dataclass(frozen=True)
class JuntaHypothesis:
    """A function depending only on the coordinates in J.

    ``table`` holds 2^|J| signs indexed by the restriction x|_J: reading the
    coordinates of J in increasing order, the j-th coordinate contributes bit j
    of the index (set iff that coordinate is -1, matching the Point encoding).
    """

    J: IndexSet
    table: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", _as_sign_array(self.table))
        if len(self.table) != 1 << len(self.J):
            raise ValueError(f"expected {1 << len(self.J)} table entries, got {len(self.table)}")

    @property
    def n(self) -> int:
        return self.J.n

    @property
    def k(self) -> int:
        return len(self.J)

    def restriction_index(self, bits: int) -> int:
        idx = 0
        for j, c in enumerate(self.J):
            idx |= ((bits >> (c - 1)) & 1) << j
        return idx

    def restriction_index_bits(self, bits: np.ndarray) -> np.ndarray:
        """Vectorized restriction index over packed points."""
        return restriction_indices(self.J, bits)

    def __call__(self, x: Point | int) -> int:
        bits = x.bits if isinstance(x, Point) else x
        return int(self.table[self.restriction_index(bits)])

    def label_bits(self, bits: np.ndarray) -> np.ndarray:
        return self.table[self.restriction_index_bits(bits)]

    def to_truth_table(self) -> TruthTable:
        if self.n > MAX_TABLE_N:
            raise ValueError(f"n={self.n} too large to materialize")
        all_bits = np.arange(1 << self.n, dtype=np.uint64)
        return TruthTable(self.n, self.table[self.restriction_index_bits(all_bits)])

    def to_json(self) -> str:
        return json.dumps({"J": list(self.J), "table": [int(v) for v in self.table]})

    @classmethod
    def from_json(cls, text: str, n: int) -> "JuntaHypothesis":
        obj = json.loads(text)
        return cls(IndexSet.of(n, obj["J"]), obj["table"])


BooleanFunction = Union[TruthTable, JuntaHypothesis]


def eval_junta(h: JuntaHypothesis, x: Point) -> int:
    """h(x); depends only on the coordinates in h.J."""
    if h.n != x.n:
        raise ValueError(f"dimension mismatch: {h.n} != {x.n}")
    return h(x)


def _materialize(g: BooleanFunction, n: int) -> np.ndarray:
    if isinstance(g, TruthTable):
        if g.n != n:
            raise ValueError(f"dimension mismatch: {g.n} != {n}")
        return g.values
    if g.n != n:
        raise ValueError(f"dimension mismatch: {g.n} != {n}")
    all_bits = np.arange(1 << n, dtype=np.uint64)
    return g.label_bits(all_bits)


def distance_exact(f: TruthTable, g: BooleanFunction) -> Fraction:
    """Exact disagreement fraction Pr[f(x) != g(x)] over the whole cube."""
    gv = _materialize(g, f.n)
    disagree = int(np.count_nonzero(f.values != gv))
    return Fraction(disagree, 1 << f.n)


def sample_distance(h: BooleanFunction, sample) -> Fraction:
    """Fraction of sample examples whose label disagrees with h.

    ``sample`` is anything with ``points`` (packed uint64 array) and ``labels``
    (+1/-1 array) attributes, or a (points, labels) pair.
    """
    if isinstance(sample, tuple):
        points, labels = sample
    else:
        points, labels = sample.points, sample.labels
    points = np.asarray(points, dtype=np.uint64)
    labels = np.asarray(labels)
    m = len(points)
    if m == 0:
        raise ValueError("empty sample")
    disagree = int(np.count_nonzero(h.label_bits(points) != labels))
    return Fraction(disagree, m)

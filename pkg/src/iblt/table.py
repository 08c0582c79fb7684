"""The invertible Bloom lookup table: cells, insert/delete, and peeling recovery."""

from __future__ import annotations

import heapq
import random
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional

from .degree_dist import DegreeDistribution, validate
from .errors import (
    CorruptCell,
    DomainError,
    FormatError,
    KeyLengthMismatch,
    NegativeCount,
    ValueLengthMismatch,
)
from .hashing import key_bytes, key_layout, key_of_value

FORMAT_MAGIC = b"IBLT"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHQHIQI")
_TERM = struct.Struct("<Id")
_COUNT = struct.Struct("<q")
_COUNT_MIN, _COUNT_MAX = -(1 << 63), (1 << 63) - 1


@dataclass(frozen=True)
class KeyValuePair:
    key: int
    value: bytes

    @classmethod
    def from_value(cls, value: bytes, nu: int = 64) -> "KeyValuePair":
        return cls(key_of_value(value, nu), bytes(value))


class Cell(NamedTuple):
    count: int
    data_key: int
    data_value: bytes


@dataclass
class RecoveryOutcome:
    recovered: list[KeyValuePair]
    complete: bool
    residual_cells_nonzero: int
    peel_order: list[int] = field(default_factory=list)
    edge_visits: int = 0


class Iblt:
    """Table of m cells, each holding a signed count and XOR accumulators.

    Accumulators are kept as Python ints (little-endian interpretation of the
    value bytes). With ``kappa == 0`` the table stores keys only and the
    key/value consistency check on extraction is skipped.
    """

    def __init__(
        self,
        m: int,
        dist: DegreeDistribution,
        hash_seed: int = 0,
        nu: int = 64,
        kappa: int = 128,
    ):
        if m < 1:
            raise DomainError(f"need at least one cell, got m={m}")
        if not 1 <= nu <= 512:
            raise DomainError(f"key length {nu} outside [1, 512]")
        if kappa < 0:
            raise DomainError(f"value length {kappa} < 0")
        self.m = m
        self.dist = dist
        self.hash_seed = hash_seed & ((1 << 64) - 1)
        self.nu = nu
        self.kappa = kappa
        self.counts = [0] * m
        self.key_sums = [0] * m
        self.value_sums = [0] * m
        self._layouts: dict[int, list[int]] = {}

    @property
    def value_nbytes(self) -> int:
        return (self.kappa + 7) // 8

    def params(self) -> tuple:
        return (self.m, self.dist, self.hash_seed, self.nu, self.kappa)

    def cell(self, i: int) -> Cell:
        return Cell(self.counts[i], self.key_sums[i], self.value_sums[i].to_bytes(self.value_nbytes, "little"))

    def cells(self) -> list[Cell]:
        return [self.cell(i) for i in range(self.m)]

    def layout(self, key: int) -> list[int]:
        cells = self._layouts.get(key)
        if cells is None:
            cells = key_layout(key, self.dist, self.m, self.hash_seed)
            self._layouts[key] = cells
        return cells

    def copy(self) -> "Iblt":
        other = Iblt.__new__(Iblt)
        other.__dict__.update(self.__dict__)
        other.counts = list(self.counts)
        other.key_sums = list(self.key_sums)
        other.value_sums = list(self.value_sums)
        return other

    def is_empty(self) -> bool:
        return not any(self.counts) and not any(self.key_sums) and not any(self.value_sums)

    def _value_int(self, z: KeyValuePair) -> int:
        if len(z.value) != self.value_nbytes:
            raise ValueLengthMismatch(f"value has {len(z.value)} bytes, table expects {self.value_nbytes}")
        v = int.from_bytes(z.value, "little")
        if v >> self.kappa:
            raise ValueLengthMismatch(f"value wider than {self.kappa} bits")
        return v

    def _apply(self, z: KeyValuePair, sign: int) -> None:
        if not 0 <= z.key < (1 << self.nu):
            raise KeyLengthMismatch(f"key does not fit in {self.nu} bits")
        v = self._value_int(z)
        key = z.key
        counts, ks, vs = self.counts, self.key_sums, self.value_sums
        for c in self.layout(key):
            counts[c] += sign
            ks[c] ^= key
            vs[c] ^= v

    def insert(self, z: KeyValuePair) -> None:
        self._apply(z, 1)

    def delete(self, z: KeyValuePair) -> None:
        self._apply(z, -1)

    def insert_all(self, pairs: Iterable[KeyValuePair]) -> None:
        for z in pairs:
            self._apply(z, 1)

    def _extract(self, i: int) -> KeyValuePair:
        """Read the pair held by a pure cell, verifying it belongs there."""
        key = self.key_sums[i]
        value = self.value_sums[i].to_bytes(self.value_nbytes, "little")
        if self.kappa and key_of_value(value, self.nu) != key:
            raise CorruptCell(f"cell {i}: key is not the hash of the value")
        if i not in self.layout(key):
            raise CorruptCell(f"cell {i}: key {key:#x} does not hash to this cell")
        return KeyValuePair(key, value)

    def recover(self, destructive: bool = True, rng: Optional[random.Random] = None) -> RecoveryOutcome:
        """Peel count-1 cells until none remain.

        The lowest-index count-1 cell is taken first unless ``rng`` is given, in
        which case each step picks a random count-1 cell. With
        ``destructive=False`` a working copy is peeled and self is untouched.
        """
        table = self if destructive else self.copy()
        counts = table.counts
        if any(c < 0 for c in counts):
            raise NegativeCount("recover expects an insert-only table; use reconcile.recover_diff")
        ks, vs = table.key_sums, table.value_sums
        recovered: list[KeyValuePair] = []
        seen: set[int] = set()
        order: list[int] = []
        visits = 0
        pending = [i for i, c in enumerate(counts) if c == 1]
        if rng is None:
            heapq.heapify(pending)

        while pending:
            if rng is None:
                i = heapq.heappop(pending)
            else:
                j = rng.randrange(len(pending))
                pending[j], pending[-1] = pending[-1], pending[j]
                i = pending.pop()
            if counts[i] != 1:
                continue
            z = table._extract(i)
            if z.key in seen:
                raise CorruptCell(f"cell {i}: key {z.key:#x} recovered twice")
            seen.add(z.key)
            recovered.append(z)
            order.append(i)
            v = vs[i]
            key = z.key
            for c in table.layout(key):
                visits += 1
                counts[c] -= 1
                ks[c] ^= key
                vs[c] ^= v
                if counts[c] == 1:
                    if rng is None:
                        heapq.heappush(pending, c)
                    else:
                        pending.append(c)

        residual = sum(1 for c in counts if c)
        return RecoveryOutcome(recovered, residual == 0, residual, order, visits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Iblt):
            return NotImplemented
        return (
            self.params() == other.params()
            and self.counts == other.counts
            and self.key_sums == other.key_sums
            and self.value_sums == other.value_sums
        )

    def __repr__(self) -> str:
        return f"Iblt(m={self.m}, dist={self.dist}, hash_seed={self.hash_seed}, nu={self.nu}, kappa={self.kappa})"

    # serialization

    def to_bytes(self) -> bytes:
        parts = [
            _HEADER.pack(
                FORMAT_MAGIC, FORMAT_VERSION, self.m, self.nu, self.kappa, self.hash_seed, len(self.dist.degrees)
            )
        ]
        parts.extend(_TERM.pack(d, p) for d, p in self.dist.terms())
        kb, vb = key_bytes(self.nu), self.value_nbytes
        for c, k, v in zip(self.counts, self.key_sums, self.value_sums):
            if not _COUNT_MIN <= c <= _COUNT_MAX:
                raise FormatError(f"count {c} does not fit in 64 bits")
            parts.append(_COUNT.pack(c))
            parts.append(k.to_bytes(kb, "little"))
            parts.append(v.to_bytes(vb, "little"))
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Iblt":
        if len(blob) < _HEADER.size:
            raise FormatError("truncated header")
        magic, version, m, nu, kappa, seed, nterms = _HEADER.unpack_from(blob, 0)
        if magic != FORMAT_MAGIC:
            raise FormatError(f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported format version {version}")
        off = _HEADER.size
        if len(blob) < off + nterms * _TERM.size:
            raise FormatError("truncated distribution terms")
        terms = []
        for _ in range(nterms):
            terms.append(_TERM.unpack_from(blob, off))
            off += _TERM.size
        dist = validate(terms)
        table = cls(m, dist, seed, nu, kappa)
        kb, vb = key_bytes(nu), table.value_nbytes
        if len(blob) != off + m * (8 + kb + vb):
            raise FormatError(f"expected {m} cell records, payload size mismatch")
        for i in range(m):
            (table.counts[i],) = _COUNT.unpack_from(blob, off)
            off += 8
            table.key_sums[i] = int.from_bytes(blob[off : off + kb], "little")
            off += kb
            table.value_sums[i] = int.from_bytes(blob[off : off + vb], "little")
            off += vb
        return table

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "Iblt":
        return cls.from_bytes(Path(path).read_bytes())


def initialize(m: int, dist: DegreeDistribution, hash_seed: int = 0, nu: int = 64, kappa: int = 128) -> Iblt:
    return Iblt(m, dist, hash_seed, nu, kappa)


def export_graph(table: Iblt, pairs: Iterable[KeyValuePair]) -> list[tuple[int, int]]:
    """Bipartite edge list (pair index, cell index) of the given pairs."""
    return [(j, c) for j, z in enumerate(pairs) for c in table.layout(z.key)]

"""Set reconciliation: subtract two tables and peel the symmetric difference.

A cell of the difference table is treated as pure when ``|count| == 1`` and its
key accumulator equals the hash of its value accumulator. A mixed cell passes
that check with probability about 2**-nu.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParameterMismatch
from .hashing import key_of_value
from .table import Iblt, KeyValuePair


@dataclass
class DiffOutcome:
    only_in_a: list[KeyValuePair] = field(default_factory=list)
    only_in_b: list[KeyValuePair] = field(default_factory=list)
    complete: bool = True


def subtract(a: Iblt, b: Iblt) -> Iblt:
    if a.params() != b.params():
        raise ParameterMismatch(f"cannot subtract {b!r} from {a!r}")
    out = a.copy()
    out.counts = [x - y for x, y in zip(a.counts, b.counts)]
    out.key_sums = [x ^ y for x, y in zip(a.key_sums, b.key_sums)]
    out.value_sums = [x ^ y for x, y in zip(a.value_sums, b.value_sums)]
    return out


def _pure(d: Iblt, i: int) -> bool:
    if d.counts[i] not in (1, -1):
        return False
    if d.kappa == 0:
        return True
    value = d.value_sums[i].to_bytes(d.value_nbytes, "little")
    return key_of_value(value, d.nu) == d.key_sums[i] and i in d.layout(d.key_sums[i])


def recover_diff(d: Iblt) -> DiffOutcome:
    """Peel a difference table in place. +1 cells belong to A, -1 cells to B."""
    out = DiffOutcome()
    counts, ks, vs = d.counts, d.key_sums, d.value_sums
    pending = [i for i in range(d.m) if counts[i] in (1, -1)]
    while pending:
        i = pending.pop()
        if not _pure(d, i):
            continue
        sign = counts[i]
        key, v = ks[i], vs[i]
        z = KeyValuePair(key, v.to_bytes(d.value_nbytes, "little"))
        (out.only_in_a if sign == 1 else out.only_in_b).append(z)
        for c in d.layout(key):
            counts[c] -= sign
            ks[c] ^= key
            vs[c] ^= v
            if counts[c] in (1, -1):
                pending.append(c)
    out.complete = not any(counts) and not any(ks) and not any(vs)
    return out

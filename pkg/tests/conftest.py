import random

import pytest

from iblt.degree_dist import validate
from iblt.table import Iblt, KeyValuePair

# Figure-derived adjacency of the m=5, n=4 peeling example (0-based cells c1..c5 -> 0..4).
FIG2_CELLS = {
    "z1": {0, 3},
    "z2": {0, 2},
    "z3": {1, 4},
    "z4": {1, 3, 4},
}
FIG2_DIST = [(2, 0.75), (3, 0.25)]
FIG2_SEED = 2


def random_pairs(rng: random.Random, n: int, width: int = 16, nu: int = 64) -> list[KeyValuePair]:
    return [KeyValuePair.from_value(rng.randbytes(width), nu) for _ in range(n)]


def two_core_pairs(edges, n_pairs):
    """Brute-force peeling on the bare bipartite graph; returns the pairs left in the 2-core."""
    alive = set(range(n_pairs))
    neighbours = {}
    for j, c in edges:
        neighbours.setdefault(c, set()).add(j)
    changed = True
    while changed:
        changed = False
        for c, pairs in neighbours.items():
            live = pairs & alive
            if len(live) == 1:
                alive -= live
                changed = True
    return alive


def search_values(table: Iblt, targets: dict, tag: bytes = b"fig2") -> dict:
    """For each target cell set, find a 16-byte value whose key lands exactly there."""
    found = {}
    for name, cells in targets.items():
        for attempt in range(100_000):
            value = (tag + name.encode() + attempt.to_bytes(4, "little")).ljust(16, b"\0")
            z = KeyValuePair.from_value(value)
            if set(table.layout(z.key)) == cells:
                found[name] = z
                break
        else:
            raise RuntimeError(f"no value found for {name}")
    return found


@pytest.fixture
def fig2():
    table = Iblt(5, validate(FIG2_DIST), FIG2_SEED)
    pairs = search_values(table, FIG2_CELLS)
    return table, pairs

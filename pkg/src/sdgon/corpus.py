"""Small graph families and random witnesses for exhaustive testing."""

from __future__ import annotations

import itertools
import random
from typing import Iterator, List, Optional, Tuple

from .chip_firing import Divisor, FiringScript, fire_set, is_valid_set, level_sets
from .multigraph import Multigraph, SubdivisionMap, build_g1, subdivide
from .witness import Witness, canonical_witness

EdgeList = Tuple[Tuple[int, int], ...]


def _canonical(n: int, edges: EdgeList) -> EdgeList:
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges))
        if best is None or key < best:
            best = key
    return best


def _connected(n: int, edges: EdgeList) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for a, b in edges:
            for s, t in ((a, b), (b, a)):
                if s == x and t not in seen:
                    seen.add(t)
                    stack.append(t)
    return len(seen) == n


def from_edge_list(n: int, edges: EdgeList) -> Multigraph:
    names = [f"v{i}" for i in range(n)]
    return Multigraph.build(names, [(f"e{j}", names[a], names[b]) for j, (a, b) in enumerate(edges)])


def multigraph_classes(n: int, m: int) -> List[Multigraph]:
    """One connected loopless multigraph per isomorphism class with ``n`` vertices and ``m`` edges."""
    if n == 1:
        return [from_edge_list(1, ())] if m == 0 else []
    pairs = list(itertools.combinations(range(n), 2))
    found = set()
    for edges in itertools.combinations_with_replacement(pairs, m):
        if not _connected(n, edges):
            continue
        found.add(_canonical(n, edges))
    return [from_edge_list(n, e) for e in sorted(found)]


def small_multigraphs(n_max: int, m_max: int) -> Iterator[Multigraph]:
    for n in range(1, n_max + 1):
        for m in range(n - 1, m_max + 1):
            yield from multigraph_classes(n, m)


def trees(n: int) -> List[Multigraph]:
    return multigraph_classes(n, n - 1)


def cycle(n: int) -> Multigraph:
    return from_edge_list(n, tuple((i, (i + 1) % n) if i + 1 < n else (0, n - 1) for i in range(n)))


def complete(n: int) -> Multigraph:
    return from_edge_list(n, tuple(itertools.combinations(range(n), 2)))


def banana(m: int) -> Multigraph:
    return from_edge_list(2, ((0, 1),) * m)


# -- random witnesses --------------------------------------------------------------

def random_legal_script(h: Multigraph, d: Divisor, rng: random.Random, steps: int) -> FiringScript:
    """Fire random valid sets, then rewrite the net effect as level sets.

    The result is a legal monotone script from ``d``.
    """
    f = {v: 0 for v in h.vertices}
    cur = d
    verts = list(h.vertices)
    for _ in range(steps):
        size = rng.randint(1, len(verts) - 1) if len(verts) > 1 else 0
        if not size:
            break
        a = frozenset(rng.sample(verts, size))
        if not is_valid_set(h, cur, a):
            continue
        cur = fire_set(h, cur, a)
        for v in a:
            f[v] += 1
    return level_sets(h, f)


def random_divisor(vertices, k: int, rng: random.Random) -> Divisor:
    counts = {}
    for _ in range(k):
        v = rng.choice(vertices)
        counts[v] = counts.get(v, 0) + 1
    return Divisor(counts)


def random_witness(rng: random.Random, *, n_max: int = 5, k_max: int = 3, l_max: int = 3,
                   m_extra: int = 2, steps: int = 12, graph: Optional[Multigraph] = None
                   ) -> Tuple[SubdivisionMap, Divisor, FiringScript]:
    """A random G1-based subdivision, a divisor on G1 vertices and a legal script on it."""
    if graph is None:
        n = rng.randint(2, n_max)
        m = rng.randint(n - 1, n - 1 + m_extra)
        while True:
            edges = tuple(tuple(sorted(rng.sample(range(n), 2))) for _ in range(m))
            if _connected(n, edges):
                break
        graph = from_edge_list(n, edges)
    g1 = build_g1(graph).derived
    hmap = subdivide(g1, {e.id: rng.randint(1, l_max) for e in g1.edges})
    d = random_divisor(list(g1.vertices), rng.randint(1, k_max), rng)
    return hmap, d, random_legal_script(hmap.derived, d, rng, steps)


def random_reaching_witness(rng: random.Random, **kw) -> Optional[Witness]:
    """A canonical witness for a random divisor, or None if it misses some G1 vertex."""
    hmap, d, _ = random_witness(rng, **kw)
    try:
        return canonical_witness(hmap, d)
    except ValueError:
        return None

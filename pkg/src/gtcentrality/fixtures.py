"""Built-in networks for demos, tests and scale checks.

``synthetic_cell`` is a 47-node stand-in for a real covert network: the
same relationship vocabulary, five members with raised weights and a
ten-union partition with sizes 3, 12, 7, 4, 4, 4, 7, 2, 2, 2. Its edges are
generated, not real.
"""

from __future__ import annotations

import random

import numpy as np

from .exact import Partition
from .network import DEFAULT_RELATIONS, WeightedNetwork, parse_network

TRI_NODES = "label,weight\na,1\nb,2\nc,1\n"
TRI_EDGES = "source,target,weight\na,b,2\nb,c,3\n"
TRI_PARTITION = "a = 1\nb = 1\nc = 2\n"


def tri() -> WeightedNetwork:
    """Path a-b-c with node weights (1, 2, 1) and edge weights ab=2, bc=3."""
    return parse_network(TRI_NODES, TRI_EDGES)


def tri_partition() -> Partition:
    return Partition.from_index([1, 1, 2])


def random_network(
    n: int,
    seed: int,
    edge_prob: float = 0.4,
    max_weight: float = 5.0,
    integer_weights: bool = False,
) -> WeightedNetwork:
    """Erdos-Renyi graph with uniform node and edge weights in ``[0, max_weight]``."""
    rng = np.random.default_rng(seed)
    if integer_weights:
        w = rng.integers(0, int(max_weight) + 1, size=n).astype(float)
    else:
        w = rng.uniform(0, max_weight, size=n)
    edges = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                k = float(rng.integers(1, int(max_weight) + 1)) if integer_weights else rng.uniform(0, max_weight)
                edges[(i, j)] = float(k)
    return WeightedNetwork(tuple(f"v{i}" for i in range(n)), tuple(float(x) for x in w), edges)


def random_partition(n: int, m: int, seed: int) -> Partition:
    """Random partition into exactly ``m`` non-empty unions."""
    rng = np.random.default_rng(seed)
    index = list(range(1, m + 1)) + [int(k) for k in rng.integers(1, m + 1, size=n - m)]
    rng.shuffle(index)
    return Partition.from_index(index)


UNION_SIZES = (3, 12, 7, 4, 4, 4, 7, 2, 2, 2)
# (union index, weight) of the members with raised influence
_RAISED = {0: 4.0, 1: 4.0, 2: 5.0}  # first union: the three leaders
_RAISED_ELSEWHERE = {(6, 0): 2.0, (5, 0): 3.0}


def synthetic_cell(seed: int = 2015) -> tuple[str, str, str]:
    """Node CSV, edge CSV (relationship-typed) and partition text."""
    rnd = random.Random(seed)
    labels, weights, union_index = [], [], []
    for u, size in enumerate(UNION_SIZES):
        for t in range(size):
            i = len(labels)
            labels.append(f"M{i + 1:02d}")
            if u == 0:
                weights.append(_RAISED[t])
            else:
                weights.append(_RAISED_ELSEWHERE.get((u, t), 1.0))
            union_index.append(u + 1)
    n = len(labels)
    strong = ["Associate and traveled with", "Traveled and lived with"]
    weak = [r for r in DEFAULT_RELATIONS if r not in strong]

    pairs: dict[tuple[int, int], str] = {}

    def link(i, j, rel):
        if i != j:
            pairs.setdefault((min(i, j), max(i, j)), rel)

    # leaders connect to each other and recruit into every union
    link(0, 1, "Associate of")
    link(1, 2, "Commander of")
    starts = np.cumsum((0,) + UNION_SIZES[:-1])
    for u, size in enumerate(UNION_SIZES):
        block = list(range(starts[u], starts[u] + size))
        for a, b in zip(block, block[1:]):
            link(a, b, rnd.choice(weak))
        if u:
            link(rnd.choice((0, 1, 2)), block[0], rnd.choice(["Recruiter of", "Commander of"]))
    for _ in range(20):
        a, b = rnd.sample(range(n), 2)
        link(a, b, rnd.choice(weak))
    for _ in range(4):
        a, b = rnd.sample(range(3, n), 2)
        pairs[(min(a, b), max(a, b))] = rnd.choice(strong)

    nodes = "label,weight\n" + "".join(f"{lab},{w:g}\n" for lab, w in zip(labels, weights))
    edges = "Entity.A,Entity.B,Relationship\n" + "".join(
        f"{labels[i]},{labels[j]},{rel}\n" for (i, j), rel in sorted(pairs.items())
    )
    partition = "".join(f"{lab} = {k}\n" for lab, k in zip(labels, union_index))
    return nodes, edges, partition


def synthetic_cell_network(seed: int = 2015) -> tuple[WeightedNetwork, Partition]:
    from .exact import parse_partition

    nodes, edges, partition = synthetic_cell(seed)
    net = parse_network(nodes, edges, DEFAULT_RELATIONS)
    return net, parse_partition(partition, net)

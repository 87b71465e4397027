"""Weighted networks with node influence weights and edge relation weights.

Coalitions are plain ``int`` bitmasks: bit ``i`` set means node ``i`` is a
member. Every routine here is pure; a :class:`WeightedNetwork` is never
mutated after construction.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import CapacityError, ValidationError

MAX_NODES = 64

# Relationship vocabulary of the reference covert network and final edge weights
# (listed relation weight + 1).
DEFAULT_RELATIONS: dict[str, float] = {
    "Associate of": 3.0,
    "Brother of": 2.0,
    "Commander of": 3.0,
    "Family relationship": 2.0,
    "Funded": 2.0,
    "Lived with": 3.0,
    "Nephew of": 2.0,
    "Recruiter of": 2.0,
    "Supporter of": 2.0,
    "Traveled to Syria with": 3.0,
    "Traveled with": 3.0,
    "Associate and traveled with": 5.0,
    "Traveled and lived with": 5.0,
}


def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def members(mask: int) -> list[int]:
    """Indices of the set bits of ``mask`` in ascending order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def subset_masks(elements: Iterable[int]) -> np.ndarray:
    """Every union of a sub-collection of ``elements`` (disjoint bit masks).

    Returns ``2**len(elements)`` masks as ``uint64``; the empty union comes first.
    """
    out = np.zeros(1, dtype=np.uint64)
    for e in elements:
        out = np.concatenate([out, out | np.uint64(e)])
    return out


@dataclass(frozen=True)
class WeightedNetwork:
    """Undirected graph with node weights ``w_i`` and edge weights ``k_ij``.

    ``edges`` maps ``(i, j)`` with ``i < j`` to the edge weight.
    """

    labels: tuple[str, ...]
    weights: tuple[float, ...]
    edges: Mapping[tuple[int, int], float]
    # derived lookup structures
    adjacency: tuple[int, ...] = field(init=False, repr=False, compare=False)
    index: Mapping[str, int] = field(init=False, repr=False, compare=False)
    _edges_by_weight: tuple[tuple[int, float], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        n = len(self.labels)
        if len(self.weights) != n:
            raise ValidationError("labels and weights differ in length")
        if n > MAX_NODES:
            raise CapacityError(f"network has {n} nodes; at most {MAX_NODES} are supported")
        if len(set(self.labels)) != n:
            raise ValidationError("node labels must be unique")
        for label, w in zip(self.labels, self.weights):
            if not w >= 0:
                raise ValidationError(f"node {label!r} has negative or invalid weight {w}")
        adj = [0] * n
        edges = {}
        for (i, j), k in self.edges.items():
            if i == j:
                raise ValidationError(f"self-loop on node {self.labels[i]!r}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"edge ({i}, {j}) references an unknown node")
            if not k >= 0:
                raise ValidationError(f"edge ({i}, {j}) has negative or invalid weight {k}")
            key = (min(i, j), max(i, j))
            edges[key] = max(edges.get(key, k), k)
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        ordered = sorted(edges.items(), key=lambda kv: (-kv[1], kv[0]))
        object.__setattr__(self, "edges", dict(sorted(edges.items())))
        object.__setattr__(self, "adjacency", tuple(adj))
        object.__setattr__(self, "index", {lab: i for i, lab in enumerate(self.labels)})
        object.__setattr__(
            self,
            "_edges_by_weight",
            tuple(((1 << i) | (1 << j), k) for (i, j), k in ordered),
        )

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def mask(self, labels: Iterable[str]) -> int:
        """Coalition mask for a collection of node labels."""
        try:
            return mask_of(self.index[lab] for lab in labels)
        except KeyError as exc:
            raise ValidationError(f"unknown node label {exc.args[0]!r}") from None

    def weight_sum(self, mask: int) -> float:
        w = self.weights
        return sum(w[i] for i in members(mask))

    def max_edge_weight(self, mask: int) -> float | None:
        """Largest ``k_lh`` over edges inside ``mask``, or ``None`` if there are none."""
        for em, k in self._edges_by_weight:
            if mask & em == em:
                return k
        return None

    def with_weights(self, weights: Iterable[float]) -> WeightedNetwork:
        return WeightedNetwork(self.labels, tuple(weights), dict(self.edges))

    def relabel(self, order: list[int]) -> WeightedNetwork:
        """Network whose node ``t`` is this network's node ``order[t]``."""
        pos = {old: new for new, old in enumerate(order)}
        return WeightedNetwork(
            tuple(self.labels[o] for o in order),
            tuple(self.weights[o] for o in order),
            {(pos[i], pos[j]): k for (i, j), k in self.edges.items()},
        )


def _check_subset(net: WeightedNetwork, mask: int) -> None:
    if mask < 0 or mask >> net.n:
        raise ValidationError(f"coalition {mask:#x} is not a subset of the {net.n} nodes")


def component_of(net: WeightedNetwork, mask: int, seed: int) -> int:
    """Connected component of ``G_mask`` containing node ``seed``."""
    adj = net.adjacency
    comp = frontier = 1 << seed
    while frontier:
        reach = 0
        while frontier:
            low = frontier & -frontier
            reach |= adj[low.bit_length() - 1]
            frontier ^= low
        frontier = reach & mask & ~comp
        comp |= frontier
    return comp


def components(net: WeightedNetwork, mask: int) -> list[int]:
    """Maximal connected coalitions of ``G_mask``, ordered by smallest member."""
    _check_subset(net, mask)
    out = []
    rest = mask
    while rest:
        comp = component_of(net, rest, (rest & -rest).bit_length() - 1)
        out.append(comp)
        rest &= ~comp
    return out


def is_connected(net: WeightedNetwork, mask: int) -> bool:
    """True iff ``G_mask`` is connected. The empty coalition counts as connected."""
    _check_subset(net, mask)
    if mask == 0:
        return True
    return component_of(net, mask, (mask & -mask).bit_length() - 1) == mask


# ---------------------------------------------------------------------------
# ingestion


def parse_relations(text: str) -> dict[str, float]:
    """Parse ``relationship-name = weight`` lines; ``#`` starts a comment."""
    relations = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, value = line.rpartition("=")
        if not sep or not name.strip():
            raise ValidationError(f"relation map line {lineno}: expected 'name = weight'")
        try:
            weight = float(value)
        except ValueError:
            raise ValidationError(f"relation map line {lineno}: bad weight {value.strip()!r}") from None
        if not weight > 0:
            raise ValidationError(f"relation map line {lineno}: weight must be positive")
        relations[name.strip()] = weight
    return relations


def _rows(text: str, what: str) -> tuple[list[str], list[list[str]]]:
    reader = csv.reader(io.StringIO(text.lstrip("﻿")))
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        raise ValidationError(f"{what} file is empty")
    header = [c.strip() for c in rows[0]]
    return header, [[c.strip() for c in r] for r in rows[1:]]


def _weight(value: str, where: str) -> float:
    try:
        w = float(value)
    except ValueError:
        raise ValidationError(f"{where}: bad weight {value!r}") from None
    if not w >= 0:
        raise ValidationError(f"{where}: negative weight {value!r}")
    return w


def parse_network(
    nodes_source: str | None,
    edges_source: str,
    relations: Mapping[str, float] | None = None,
) -> WeightedNetwork:
    """Build a network from CSV text.

    ``nodes_source`` has header ``label,weight`` (weight optional, default 1).
    ``edges_source`` has header ``source,target,relationship`` (the legacy
    ``Entity.A,Entity.B,Relationship`` schema is accepted too) or
    ``source,target,weight``. Edge endpoints missing from the node file are
    registered with weight 1 in order of first appearance. Repeated rows for
    one pair keep the largest weight.
    """
    labels: list[str] = []
    weights: list[float] = []
    index: dict[str, int] = {}

    def register(label: str, weight: float = 1.0) -> int:
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
            weights.append(weight)
        return index[label]

    if nodes_source is not None and nodes_source.strip():
        header, rows = _rows(nodes_source, "node")
        cols = [h.lower() for h in header]
        if "label" not in cols:
            raise ValidationError("node file needs a 'label' column")
        li = cols.index("label")
        wi = cols.index("weight") if "weight" in cols else None
        for lineno, row in enumerate(rows, 2):
            label = row[li]
            if label in index:
                raise ValidationError(f"node file line {lineno}: duplicate label {label!r}")
            w = 1.0
            if wi is not None and wi < len(row) and row[wi] != "":
                w = _weight(row[wi], f"node file line {lineno}")
            register(label, w)

    header, rows = _rows(edges_source, "edge")
    cols = [h.lower() for h in header]
    if cols[:2] in (["source", "target"], ["entity.a", "entity.b"]) and len(cols) >= 3:
        kind = cols[2]
    else:
        raise ValidationError(
            "edge file header must be 'source,target,relationship' or 'source,target,weight'"
        )
    if kind not in ("relationship", "weight"):
        raise ValidationError(f"edge file: unsupported third column {header[2]!r}")
    if kind == "relationship" and relations is None:
        raise ValidationError("edge file uses relationships but no relation map was given")

    edges: dict[tuple[int, int], float] = {}
    for lineno, row in enumerate(rows, 2):
        if len(row) < 3:
            raise ValidationError(f"edge file line {lineno}: expected 3 fields")
        a, b, third = row[0], row[1], row[2]
        if a == b:
            raise ValidationError(f"edge file line {lineno}: self-loop on {a!r}")
        if kind == "relationship":
            if third not in relations:
                raise ValidationError(
                    f"edge file line {lineno}: unknown relationship {third!r}"
                )
            k = float(relations[third])
        else:
            k = _weight(third, f"edge file line {lineno}")
        i, j = register(a), register(b)
        key = (min(i, j), max(i, j))
        edges[key] = max(edges.get(key, k), k)

    return WeightedNetwork(tuple(labels), tuple(weights), edges)


def load_network(
    nodes_path: str | Path | None,
    edges_path: str | Path,
    relations_path: str | Path | None = None,
) -> WeightedNetwork:
    """File-based wrapper around :func:`parse_network`.

    Without a relation map file, relationship-typed edges fall back to
    :data:`DEFAULT_RELATIONS`.
    """
    nodes_text = Path(nodes_path).read_text(encoding="utf-8") if nodes_path else None
    edges_text = Path(edges_path).read_text(encoding="utf-8")
    if relations_path:
        relations = parse_relations(Path(relations_path).read_text(encoding="utf-8"))
    else:
        relations = DEFAULT_RELATIONS
    return parse_network(nodes_text, edges_text, relations)


def serialize_network(net: WeightedNetwork) -> tuple[str, str]:
    """Node and edge CSV text (direct edge weights) that parse back to ``net``."""
    nodes = io.StringIO()
    w = csv.writer(nodes, lineterminator="\n")
    w.writerow(["label", "weight"])
    for label, weight in zip(net.labels, net.weights):
        w.writerow([label, repr(float(weight))])
    edges = io.StringIO()
    w = csv.writer(edges, lineterminator="\n")
    w.writerow(["source", "target", "weight"])
    for (i, j), k in net.edges.items():
        w.writerow([net.labels[i], net.labels[j], repr(float(k))])
    return nodes.getvalue(), edges.getvalue()

"""Exact Shapley, Banzhaf, Owen and Banzhaf-Owen values by enumeration.

These are the reference oracles for the sampling estimators; they are only
feasible on small instances and refuse larger ones with
:class:`~gtcentrality.errors.CapacityError`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, ValidationError
from .games import Game, permutation_marginals
from .network import WeightedNetwork, members, subset_masks

SUBSET_MAX_N = 25
OWEN_MAX_N = 20
OWEN_MAX_PERMUTATIONS = 10**7
_CHUNK = 1 << 16


@dataclass(frozen=True)
class Partition:
    """A priori unions: a partition of the players into non-empty blocks."""

    unions: tuple[int, ...]  # one mask per union
    n: int

    def __post_init__(self):
        seen = 0
        for u in self.unions:
            if u == 0:
                raise ValidationError("partition has an empty union")
            if u & seen:
                raise ValidationError("partition unions overlap")
            seen |= u
        if seen != (1 << self.n) - 1:
            raise ValidationError("partition does not cover every node")

    @property
    def m(self) -> int:
        return len(self.unions)

    @property
    def union_of(self) -> tuple[int, ...]:
        owner = [0] * self.n
        for k, u in enumerate(self.unions):
            for i in members(u):
                owner[i] = k
        return tuple(owner)

    def union_members(self, k: int) -> list[int]:
        return members(self.unions[k])

    @classmethod
    def from_index(cls, index: Sequence[int]) -> Partition:
        """From a 1-based union index per node (``indexP`` style)."""
        m = max(index, default=0)
        if min(index, default=1) < 1:
            raise ValidationError("union indices are 1-based")
        unions = [0] * m
        for i, k in enumerate(index):
            unions[k - 1] |= 1 << i
        return cls(tuple(unions), len(index))

    @classmethod
    def singletons(cls, n: int) -> Partition:
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def grand(cls, n: int) -> Partition:
        return cls(((1 << n) - 1,), n)

    def relabel(self, order: list[int]) -> Partition:
        owner = self.union_of
        return Partition.from_index([owner[o] + 1 for o in order])


def parse_partition(text: str, net: WeightedNetwork) -> Partition:
    """Parse ``label = union-index`` lines (1-based indices, one line per node)."""
    index: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, sep, value = line.rpartition("=")
        label = label.strip()
        if not sep or not label:
            raise ValidationError(f"partition line {lineno}: expected 'label = union-index'")
        if label not in net.index:
            raise ValidationError(f"partition line {lineno}: unknown node {label!r}")
        try:
            k = int(value)
        except ValueError:
            raise ValidationError(f"partition line {lineno}: bad union index {value.strip()!r}") from None
        i = net.index[label]
        if i in index:
            raise ValidationError(f"partition line {lineno}: node {label!r} listed twice")
        index[i] = k
    missing = [net.labels[i] for i in range(net.n) if i not in index]
    if missing:
        raise ValidationError(f"partition misses nodes: {', '.join(missing)}")
    ks = sorted(set(index.values()))
    if ks != list(range(1, len(ks) + 1)):
        raise ValidationError("union indices must be exactly 1..m with no gaps")
    return Partition.from_index([index[i] for i in range(net.n)])


def load_partition(path: str | Path, net: WeightedNetwork) -> Partition:
    return parse_partition(Path(path).read_text(encoding="utf-8"), net)


def format_partition(partition: Partition, net: WeightedNetwork) -> str:
    owner = partition.union_of
    return "".join(f"{lab} = {owner[i] + 1}\n" for i, lab in enumerate(net.labels))


def _check_partition(game: Game, partition: Partition) -> None:
    if partition.n != game.n:
        raise ValidationError(
            f"partition covers {partition.n} players but the game has {game.n}"
        )


def _require(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise CapacityError(f"{what} is limited to n <= {cap}; got n = {n}")


def exact_shapley(game: Game) -> np.ndarray:
    """Shapley value via the subset form with weights ``|S|!(n-|S|-1)!/n!``."""
    n = game.n
    _require(n, SUBSET_MAX_N, "exact Shapley value")
    if n == 0:
        return np.zeros(0)
    table = game.table
    fact = math.factorial
    coef = np.array([fact(s) * fact(n - s - 1) / fact(n) for s in range(n)])
    out = np.empty(n)
    for i in range(n):
        others = subset_masks(1 << j for j in range(n) if j != i).astype(np.int64)
        sizes = _popcounts(others)
        marg = table[others | (1 << i)] - table[others]
        out[i] = np.sum(coef[sizes] * marg)
    return out


def exact_banzhaf(game: Game) -> np.ndarray:
    """Banzhaf value: mean marginal contribution over all ``S`` without ``i``."""
    n = game.n
    _require(n, SUBSET_MAX_N, "exact Banzhaf value")
    table = game.table
    out = np.empty(n)
    for i in range(n):
        others = subset_masks(1 << j for j in range(n) if j != i).astype(np.int64)
        out[i] = np.sum(table[others | (1 << i)] - table[others]) / len(others)
    return out


def exact_banzhaf_owen(game: Game, partition: Partition) -> np.ndarray:
    """Banzhaf-Owen value: average over whole foreign unions plus own-union subsets."""
    _check_partition(game, partition)
    n = game.n
    _require(n, SUBSET_MAX_N, "exact Banzhaf-Owen value")
    table = game.table
    owner = partition.union_of
    out = np.empty(n)
    for i in range(n):
        x = _bzo_marginals(table, partition, owner, i)
        out[i] = np.sum(x) / x.size
    return out


def _bzo_marginals(table: np.ndarray, partition: Partition, owner, i: int) -> np.ndarray:
    """Matrix ``x[R, S]`` of marginals of ``i`` over compatible coalitions."""
    k = owner[i]
    outer = subset_masks(u for t, u in enumerate(partition.unions) if t != k)
    inner = subset_masks(1 << j for j in partition.union_members(k) if j != i)
    coal = (outer[:, None] | inner[None, :]).astype(np.int64)
    return table[coal | (1 << i)] - table[coal]


def compatible_permutations(partition: Partition) -> Iterator[tuple[int, ...]]:
    """Every order of the players that keeps each union contiguous."""
    blocks = [partition.union_members(k) for k in range(partition.m)]
    for union_order in itertools.permutations(range(partition.m)):
        inner = [itertools.permutations(blocks[k]) for k in union_order]
        for parts in itertools.product(*inner):
            yield tuple(itertools.chain.from_iterable(parts))


def count_compatible_permutations(partition: Partition) -> int:
    count = math.factorial(partition.m)
    for k in range(partition.m):
        count *= math.factorial(len(partition.union_members(k)))
    return count


def exact_owen(game: Game, partition: Partition) -> np.ndarray:
    """Owen value by averaging marginals over all compatible permutations."""
    _check_partition(game, partition)
    n = game.n
    _require(n, OWEN_MAX_N, "exact Owen value")
    total = count_compatible_permutations(partition)
    if total > OWEN_MAX_PERMUTATIONS:
        raise CapacityError(
            f"exact Owen value needs {total} compatible permutations; "
            f"the cap is {OWEN_MAX_PERMUTATIONS}"
        )
    if n == 0:
        return np.zeros(0)
    partial = [[] for _ in range(n)]
    perms = compatible_permutations(partition)
    while True:
        chunk = list(itertools.islice(perms, _CHUNK))
        if not chunk:
            break
        marg = permutation_marginals(game, np.array(chunk, dtype=np.int64))
        # contiguous rows per player so the reduction is pairwise
        sums = np.ascontiguousarray(marg.T).sum(axis=1)
        for i in range(n):
            partial[i].append(sums[i])
    return np.array([math.fsum(p) for p in partial]) / total


def shapley_by_permutations(game: Game) -> np.ndarray:
    """Shapley value by literal enumeration of all ``n!`` orders (small ``n``)."""
    return exact_owen(game, Partition.singletons(game.n))


def _popcounts(masks: np.ndarray) -> np.ndarray:
    counts = np.zeros(masks.shape, dtype=np.int64)
    m = masks.copy()
    while m.any():
        counts += m & 1
        m >>= 1
    return counts

"""Weighted connectivity TU-games on a :class:`WeightedNetwork`.

A connected coalition is worth ``f(S) = (sum of member weights) * (largest
edge weight inside S)``, or its single member's weight. A disconnected
coalition is worth the best of its components (``mwconn``) or their sum
(``awconn``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CapacityError, ValidationError
from .network import WeightedNetwork, component_of, is_connected

# Full value tables are built for games up to this size when batch
# evaluation is requested; larger games evaluate coalitions one by one.
TABLE_MAX_N = 20
# Hard ceiling for explicit table builds (exact oracles).
TABLE_HARD_MAX_N = 25


class GameKind(enum.Enum):
    MWCONN = "mwconn"
    AWCONN = "awconn"


def effectiveness(net: WeightedNetwork, mask: int) -> float:
    """Effectiveness ``f`` of a non-empty connected coalition."""
    if mask == 0:
        raise ValidationError("effectiveness is undefined for the empty coalition")
    if not is_connected(net, mask):
        raise ValidationError("effectiveness needs a connected coalition; decompose first")
    return _f(net, mask)


def _f(net: WeightedNetwork, mask: int) -> float:
    if mask & (mask - 1) == 0:
        return float(net.weights[mask.bit_length() - 1])
    return net.weight_sum(mask) * net.max_edge_weight(mask)


def contribution_range_bound(net: WeightedNetwork) -> float:
    """Upper bound ``r`` on every marginal contribution in either game.

    ``(sum of all node weights) * (largest edge weight)``; for an edgeless
    network the largest node weight.
    """
    if net.n == 0:
        return 0.0
    kmax = net.max_edge_weight(net.full_mask)
    if kmax is None:
        return float(max(net.weights))
    return float(sum(net.weights)) * kmax


@dataclass(frozen=True)
class Game:
    """A network together with the rule for valuing disconnected coalitions."""

    net: WeightedNetwork
    kind: GameKind = GameKind.MWCONN

    def __post_init__(self):
        if not isinstance(self.kind, GameKind):
            object.__setattr__(self, "kind", GameKind(self.kind))

    @property
    def n(self) -> int:
        return self.net.n

    def value(self, mask: int) -> float:
        net = self.net
        if mask < 0 or mask >> net.n:
            raise ValidationError(f"coalition {mask:#x} is not a subset of the {net.n} nodes")
        additive = self.kind is GameKind.AWCONN
        total = 0.0
        rest = mask
        while rest:
            comp = component_of(net, rest, (rest & -rest).bit_length() - 1)
            rest &= ~comp
            fv = _f(net, comp)
            if additive:
                total += fv
            elif fv > total:
                total = fv
        return total

    def marginal(self, i: int, mask: int) -> float:
        """``v(S + i) - v(S)`` for a coalition ``S`` not containing ``i``."""
        bit = 1 << i
        if mask & bit:
            raise ValidationError(f"player {i} already belongs to the coalition")
        return self.value(mask | bit) - self.value(mask)

    @cached_property
    def table(self) -> np.ndarray:
        """Values of all ``2**n`` coalitions indexed by mask."""
        return value_table(self)

    def values(self, masks: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`value` over an integer array of masks."""
        masks = np.asarray(masks)
        if self.n <= TABLE_MAX_N:
            return self.table[masks.astype(np.int64)]
        out = np.empty(masks.shape, dtype=np.float64)
        flat = out.reshape(-1)
        value = self.value
        for t, m in enumerate(masks.reshape(-1).tolist()):
            flat[t] = value(m)
        return out


def value_table(game: Game) -> np.ndarray:
    """Characteristic function of ``game`` over every coalition, as an array.

    Components are found by flooding from each mask's lowest member over all
    masks at once; the worth is then accumulated component by component.
    """
    net = game.net
    n = net.n
    if n > TABLE_HARD_MAX_N:
        raise CapacityError(f"value table needs n <= {TABLE_HARD_MAX_N}, got n = {n}")
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)

    wsum = np.zeros(size)
    nbr = np.zeros(size, dtype=np.int64)
    for j in range(n):
        has = ((masks >> j) & 1).astype(bool)
        if net.weights[j]:
            wsum[has] += net.weights[j]
        nbr[has] |= net.adjacency[j]

    maxk = np.zeros(size)
    for (a, b), k in net.edges.items():
        both = ((masks >> a) & (masks >> b) & 1).astype(bool)
        np.maximum(maxk, np.where(both, k, 0.0), out=maxk)

    single = (masks & (masks - 1)) == 0
    f = np.where(single, wsum, wsum * maxk)

    # component of the lowest member of each mask
    comp = masks & -masks
    while True:
        grown = (comp | nbr[comp]) & masks
        if np.array_equal(grown, comp):
            break
        comp = grown
    head = f[comp]
    rest = masks ^ comp

    table = np.zeros(size)
    combine = np.add if game.kind is GameKind.AWCONN else np.maximum
    for _ in range(n):
        new = combine(head, table[rest])
        if np.array_equal(new, table):
            break
        table = new
    return table


def permutation_marginals(game: Game, perms: np.ndarray) -> np.ndarray:
    """Marginal contribution of every player along every row of ``perms``.

    The result is laid out as ``rows x players``; each row sums to ``v(N)``
    up to rounding.
    """
    rows, n = perms.shape
    bits = np.left_shift(np.uint64(1), perms.astype(np.uint64))
    after = np.bitwise_or.accumulate(bits, axis=1)
    v_after = game.values(after)
    v_before = np.concatenate([np.zeros((rows, 1)), v_after[:, :-1]], axis=1)
    by_player = np.empty((rows, n))
    np.put_along_axis(by_player, perms, v_after - v_before, axis=1)
    return by_player

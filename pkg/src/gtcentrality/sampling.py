"""Monte Carlo estimators of the four coalitional values, plus error control.

Random coalitions are drawn by flipping a fair coin for every eligible
element, i.e. uniformly over subsets, always with replacement. Every
player (or permutation block) gets its own random substream derived from
the configured seed, so results do not depend on how work is spread over
threads.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import CapacityError, ValidationError
from .exact import Partition
from .games import Game, permutation_marginals
from .network import subset_masks

# draws evaluated per vectorized batch
BLOCK = 1 << 14
# permutations per independent substream in the permutation estimators
PERMUTATION_BLOCK = 1 << 12

_PLAYER_STREAM = 0
_BLOCK_STREAM = 1
_REPLICATE_STREAM = 2

VARIANCE_MAX_POPULATION = 10**7


class Method(enum.Enum):
    BANZHAF = "banzhaf"
    BANZHAF_OWEN = "banzhaf-owen"
    SHAPLEY = "shapley"
    OWEN = "owen"

    @property
    def needs_partition(self) -> bool:
        return self in (Method.BANZHAF_OWEN, Method.OWEN)


@dataclass(frozen=True)
class EstimatorConfig:
    """Sampling parameters.

    ``ell`` is the per-player sample size of the Banzhaf estimator and the
    number of permutations of the Shapley/Owen estimators; ``ell_r`` and
    ``ell_s`` are the outer and inner sizes of the two-stage Banzhaf-Owen
    estimator. With ``cap`` set, coalition sample sizes are truncated at the
    population size (``2**(n-1)``, ``2**(m-1)``, ``2**(p_i-1)``) as in the
    classic procedure; the permutation estimators are never capped.
    """

    method: Method = Method.BANZHAF
    ell: int = 1000
    ell_r: int = 100
    ell_s: int = 10
    seed: int = 1
    cap: bool = True

    def __post_init__(self):
        if not isinstance(self.method, Method):
            object.__setattr__(self, "method", Method(self.method))
        if self.method in (Method.BANZHAF, Method.SHAPLEY, Method.OWEN) and self.ell <= 1:
            raise ValidationError(f"ell must exceed 1, got {self.ell}")
        if self.method is Method.BANZHAF_OWEN and (self.ell_r < 1 or self.ell_s < 1):
            raise ValidationError("ell_r and ell_s must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


@dataclass
class AllocationEstimate:
    values: np.ndarray
    std_error: np.ndarray  # NaN where fewer than two sampling units were drawn
    config: EstimatorConfig
    effective_ell: np.ndarray  # per player: ell, or ell_r for the two-stage method
    effective_ell_s: np.ndarray | None = None
    wall_time: float = 0.0
    cpu_time: float = 0.0


@dataclass(frozen=True)
class ErrorBudget:
    epsilon: float
    alpha: float
    r: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValidationError("epsilon must be positive")
        if not 0 < self.alpha < 1:
            raise ValidationError("alpha must lie in (0, 1)")
        if not self.r >= 0:
            raise ValidationError("r must be non-negative")


def _hoeffding_factor(alpha: float) -> float:
    return min(1.0 / (4.0 * alpha), math.log(2.0 / alpha) / 2.0)


def banzhaf_sample_size(budget: ErrorBudget) -> int:
    """Smallest per-player ``ell`` guaranteeing ``P(|error| >= eps) <= alpha``."""
    need = _hoeffding_factor(budget.alpha) * budget.r**2 / budget.epsilon**2
    return max(1, math.ceil(need))


def banzhaf_error_bound(ell: int, alpha: float, r: float) -> float:
    """Error ``eps`` attained with probability ``1 - alpha`` after ``ell`` draws."""
    if ell < 1:
        raise ValidationError("ell must be positive")
    if not 0 < alpha < 1:
        raise ValidationError("alpha must lie in (0, 1)")
    if not r >= 0:
        raise ValidationError("r must be non-negative")
    return r * math.sqrt(_hoeffding_factor(alpha) / ell)


# ---------------------------------------------------------------------------
# randomness


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def derive_seed(master_seed: int, replicate: int) -> int:
    """Seed of replicate ``replicate`` under ``master_seed``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(_REPLICATE_STREAM, replicate))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _coin_flips(rng: np.random.Generator, nbits: int, shape) -> np.ndarray:
    """Integers whose low ``nbits`` bits are independent fair coins."""
    if nbits == 0:
        return np.zeros(shape, dtype=np.uint64)
    return rng.integers(0, (1 << nbits) - 1, size=shape, dtype=np.uint64, endpoint=True)


def _expand(flips: np.ndarray, element_masks: Sequence[int]) -> np.ndarray:
    """Map bit ``t`` of each draw to the node mask ``element_masks[t]``."""
    out = np.zeros(flips.shape, dtype=np.uint64)
    for t, em in enumerate(element_masks):
        out |= ((flips >> np.uint64(t)) & np.uint64(1)) * np.uint64(em)
    return out


class _Moments:
    """Running mean and sum of squared deviations (Chan's pairwise update)."""

    def __init__(self, width: int = 1):
        self.count = 0
        self.mean = np.zeros(width)
        self.m2 = np.zeros(width)

    def add(self, x: np.ndarray) -> None:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        nb = x.shape[0]
        if nb == 0:
            return
        mb = x.mean(axis=0)
        m2b = ((x - mb) ** 2).sum(axis=0)
        total = self.count + nb
        delta = mb - self.mean
        self.mean = self.mean + delta * (nb / total)
        self.m2 = self.m2 + m2b + delta**2 * (self.count * nb / total)
        self.count = total

    def std_error(self) -> np.ndarray:
        if self.count < 2:
            return np.full(self.mean.shape, np.nan)
        return np.sqrt(self.m2 / (self.count - 1) / self.count)


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _timed(run: Callable[[], AllocationEstimate]) -> AllocationEstimate:
    w0, c0 = time.perf_counter(), time.process_time()
    est = run()
    est.wall_time = time.perf_counter() - w0
    est.cpu_time = time.process_time() - c0
    return est


def _check(config: EstimatorConfig, method: Method, game: Game, partition: Partition | None):
    if config.method is not method:
        raise ValidationError(f"config is for {config.method.value}, not {method.value}")
    if game.n == 0:
        raise ValidationError("game has no players")
    if method.needs_partition:
        if partition is None:
            raise ValidationError(f"{method.value} needs a partition")
        if partition.n != game.n:
            raise ValidationError("partition and game sizes differ")


# ---------------------------------------------------------------------------
# Banzhaf


def _banzhaf_player(game: Game, i: int, ell: int, seed: int) -> tuple[float, float]:
    rng = _stream(seed, _PLAYER_STREAM, i)
    bit = np.uint64(1 << i)
    keep = np.uint64(((1 << game.n) - 1) & ~(1 << i))
    moments = _Moments()
    left = ell
    while left:
        size = min(left, BLOCK)
        left -= size
        coal = _coin_flips(rng, game.n, size) & keep
        moments.add(game.values(coal | bit) - game.values(coal))
    return float(moments.mean[0]), float(moments.std_error()[0])


def estimate_banzhaf(game: Game, config: EstimatorConfig, threads: int = 1) -> AllocationEstimate:
    """Mean marginal contribution of each player over ``ell`` random coalitions."""
    _check(config, Method.BANZHAF, game, None)

    def run():
        n = game.n
        ell = min(config.ell, 2 ** (n - 1)) if config.cap else config.ell
        res = _map(lambda i: _banzhaf_player(game, i, ell, config.seed), range(n), threads)
        return AllocationEstimate(
            values=np.array([r[0] for r in res]),
            std_error=np.array([r[1] for r in res]),
            config=config,
            effective_ell=np.full(n, ell, dtype=np.int64),
        )

    return _timed(run)


# ---------------------------------------------------------------------------
# Banzhaf-Owen


def _bzo_sizes(config: EstimatorConfig, partition: Partition, i: int) -> tuple[int, int]:
    p = len(partition.union_members(partition.union_of[i]))
    if not config.cap:
        return config.ell_r, config.ell_s
    return min(config.ell_r, 2 ** (partition.m - 1)), min(config.ell_s, 2 ** (p - 1))


def _bzo_player(
    game: Game, partition: Partition, i: int, ell_r: int, ell_s: int, seed: int
) -> tuple[float, float]:
    rng = _stream(seed, _PLAYER_STREAM, i)
    k = partition.union_of[i]
    own = partition.union_members(k)
    union_masks = [0 if t == k else u for t, u in enumerate(partition.unions)]
    member_masks = [0 if j == i else 1 << j for j in own]
    bit = np.uint64(1 << i)
    rows_per_block = max(1, BLOCK // ell_s)
    moments = _Moments()
    left = ell_r
    while left:
        rows = min(left, rows_per_block)
        left -= rows
        outer = _expand(_coin_flips(rng, partition.m, rows), union_masks)
        inner = _expand(_coin_flips(rng, len(own), (rows, ell_s)), member_masks)
        coal = outer[:, None] | inner
        x = game.values(coal | bit) - game.values(coal)
        moments.add(x.mean(axis=1))
    return float(moments.mean[0]), float(moments.std_error()[0])


def estimate_banzhaf_owen(
    game: Game, partition: Partition, config: EstimatorConfig, threads: int = 1
) -> AllocationEstimate:
    """Two-stage estimator: ``ell_r`` coalitions of foreign unions, each paired
    with ``ell_s`` subsets of the player's own union."""
    _check(config, Method.BANZHAF_OWEN, game, partition)

    def run():
        n = game.n
        sizes = [_bzo_sizes(config, partition, i) for i in range(n)]
        res = _map(
            lambda i: _bzo_player(game, partition, i, *sizes[i], config.seed), range(n), threads
        )
        return AllocationEstimate(
            values=np.array([r[0] for r in res]),
            std_error=np.array([r[1] for r in res]),
            config=config,
            effective_ell=np.array([s[0] for s in sizes], dtype=np.int64),
            effective_ell_s=np.array([s[1] for s in sizes], dtype=np.int64),
        )

    return _timed(run)


# ---------------------------------------------------------------------------
# Shapley / Owen by permutation sampling


def _random_permutations(rng: np.random.Generator, rows: int, n: int) -> np.ndarray:
    return np.argsort(rng.random((rows, n)), axis=1, kind="stable")


def _random_compatible_permutations(
    rng: np.random.Generator, rows: int, partition: Partition
) -> np.ndarray:
    """Uniform union order, then an independent uniform order inside each union."""
    owner = np.array(partition.union_of)
    union_rank = np.argsort(np.argsort(rng.random((rows, partition.m)), axis=1), axis=1)
    keys = union_rank[:, owner] + rng.random((rows, partition.n))
    return np.argsort(keys, axis=1, kind="stable")


def _permutation_block(game: Game, sampler, rows: int, seed: int, b: int) -> _Moments:
    rng = _stream(seed, _BLOCK_STREAM, b)
    perms = sampler(rng, rows)
    moments = _Moments(game.n)
    moments.add(permutation_marginals(game, perms))
    return moments


def _permutation_estimate(game, config, sampler, threads) -> AllocationEstimate:
    n = game.n
    blocks = []
    left, b = config.ell, 0
    while left:
        rows = min(left, PERMUTATION_BLOCK)
        blocks.append((b, rows))
        left -= rows
        b += 1
    parts = _map(
        lambda br: _permutation_block(game, sampler, br[1], config.seed, br[0]), blocks, threads
    )
    total = _Moments(n)
    for part in parts:
        # merge block moments in block order
        if total.count == 0:
            total = part
            continue
        nb, cnt = part.count, total.count + part.count
        delta = part.mean - total.mean
        total.mean = total.mean + delta * (nb / cnt)
        total.m2 = total.m2 + part.m2 + delta**2 * (total.count * nb / cnt)
        total.count = cnt
    return AllocationEstimate(
        values=total.mean.copy(),
        std_error=total.std_error(),
        config=config,
        effective_ell=np.full(n, config.ell, dtype=np.int64),
    )


def estimate_shapley(game: Game, config: EstimatorConfig, threads: int = 1) -> AllocationEstimate:
    """Average marginal vector over ``ell`` uniformly random orders of the players."""
    _check(config, Method.SHAPLEY, game, None)
    sampler = lambda rng, rows: _random_permutations(rng, rows, game.n)  # noqa: E731
    return _timed(lambda: _permutation_estimate(game, config, sampler, threads))


def estimate_owen(
    game: Game, partition: Partition, config: EstimatorConfig, threads: int = 1
) -> AllocationEstimate:
    """Average marginal vector over ``ell`` uniform partition-compatible orders."""
    _check(config, Method.OWEN, game, partition)
    sampler = lambda rng, rows: _random_compatible_permutations(rng, rows, partition)  # noqa: E731
    return _timed(lambda: _permutation_estimate(game, config, sampler, threads))


def estimate(
    game: Game,
    config: EstimatorConfig,
    partition: Partition | None = None,
    threads: int = 1,
) -> AllocationEstimate:
    """Dispatch on ``config.method``."""
    if config.method is Method.BANZHAF:
        return estimate_banzhaf(game, config, threads)
    if config.method is Method.SHAPLEY:
        return estimate_shapley(game, config, threads)
    if config.method is Method.BANZHAF_OWEN:
        return estimate_banzhaf_owen(game, partition, config, threads)
    return estimate_owen(game, partition, config, threads)


@dataclass
class Replication:
    estimates: list[AllocationEstimate]
    mean: np.ndarray

    def matrix(self) -> np.ndarray:
        """Replicates as rows, players as columns."""
        return np.array([e.values for e in self.estimates])


def replicate(
    game: Game,
    config: EstimatorConfig,
    reps: int,
    partition: Partition | None = None,
    threads: int = 1,
) -> Replication:
    """Run the configured estimator ``reps`` times with seeds derived from
    ``config.seed``; the average of the replicates is returned alongside."""
    if reps < 1:
        raise ValidationError("reps must be at least 1")
    configs = [replace(config, seed=derive_seed(config.seed, r)) for r in range(reps)]
    estimates = _map(lambda c: estimate(game, c, partition), configs, threads)
    mat = np.array([e.values for e in estimates])
    return Replication(estimates, mat.mean(axis=0))


# ---------------------------------------------------------------------------
# variance of the two-stage estimator


class VarianceConvention(enum.Enum):
    POPULATION = "population"
    MINUS_ONE = "minus-one"


@dataclass(frozen=True)
class VariancePrediction:
    theta_a_sq: float
    theta_b_sq: float
    predicted_variance: float
    ell_r: int
    ell_s: int
    convention: VarianceConvention


def bzo_variance_prediction(
    game: Game,
    partition: Partition,
    i: int,
    ell_r: int,
    ell_s: int,
    convention: VarianceConvention = VarianceConvention.POPULATION,
    cap: bool = True,
) -> VariancePrediction:
    """Variance of the two-stage Banzhaf-Owen estimate of player ``i``.

    Between-union and within-union components are obtained by full
    enumeration of the compatible coalitions. ``ell_r``/``ell_s`` are capped
    exactly as the estimator caps them when ``cap`` is set.
    """
    convention = VarianceConvention(convention)
    k = partition.union_of[i]
    p = len(partition.union_members(k))
    n_outer, n_inner = 2 ** (partition.m - 1), 2 ** (p - 1)
    if n_outer * n_inner > VARIANCE_MAX_POPULATION:
        raise CapacityError(
            f"variance prediction enumerates {n_outer * n_inner} coalitions; "
            f"the cap is {VARIANCE_MAX_POPULATION}"
        )
    if cap:
        ell_r, ell_s = min(ell_r, n_outer), min(ell_s, n_inner)
    if convention is VarianceConvention.MINUS_ONE:
        if n_outer == 1 or n_inner == 1:
            raise ValidationError(
                "the minus-one denominators vanish for a single union or a singleton "
                "union; use the population convention"
            )
        div_a, div_b = n_outer - 1, n_inner - 1
    else:
        div_a, div_b = n_outer, n_inner

    outer = subset_masks(u for t, u in enumerate(partition.unions) if t != k)
    inner = subset_masks(1 << j for j in partition.union_members(k) if j != i)
    coal = outer[:, None] | inner[None, :]
    x = game.values(coal | np.uint64(1 << i)) - game.values(coal)
    by_r = x.mean(axis=1)
    overall = by_r.mean()
    theta_a = float(((by_r - overall) ** 2).sum() / div_a)
    theta_b = float((((x - by_r[:, None]) ** 2).sum(axis=1) / div_b).mean())
    return VariancePrediction(
        theta_a_sq=theta_a,
        theta_b_sq=theta_b,
        predicted_variance=(theta_a + theta_b / ell_s) / ell_r,
        ell_r=ell_r,
        ell_s=ell_s,
        convention=convention,
    )

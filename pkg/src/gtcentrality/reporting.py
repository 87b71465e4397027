"""Rankings, replication summaries, Lorenz curves and ranking comparisons."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError

DECIMALS = 6
SUMMARY_COLUMNS = ("Min.", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max.", "CV")


@dataclass(frozen=True)
class RankingRow:
    position: int
    label: str
    allocation: float


@dataclass(frozen=True)
class RankingTable:
    rows: tuple[RankingRow, ...]

    @property
    def labels(self) -> list[str]:
        return [r.label for r in self.rows]

    def positions(self) -> dict[str, int]:
        return {r.label: r.position for r in self.rows}

    def top(self, k: int) -> list[str]:
        return self.labels[:k]


def rank(alloc: Sequence[float], labels: Sequence[str]) -> RankingTable:
    """Order players by non-increasing allocation; ties by ascending label."""
    if len(alloc) != len(labels):
        raise ValidationError(f"{len(alloc)} allocations for {len(labels)} labels")
    order = sorted(range(len(labels)), key=lambda i: (-float(alloc[i]), labels[i]))
    return RankingTable(
        tuple(RankingRow(p, labels[i], float(alloc[i])) for p, i in enumerate(order, 1))
    )


@dataclass(frozen=True)
class ReplicationSummary:
    labels: tuple[str, ...]
    minimum: np.ndarray
    q1: np.ndarray
    median: np.ndarray
    mean: np.ndarray
    q3: np.ndarray
    maximum: np.ndarray
    cv: np.ndarray  # sample sd (ddof=1) / mean; NaN when the mean is 0

    def columns(self) -> list[np.ndarray]:
        return [self.minimum, self.q1, self.median, self.mean, self.q3, self.maximum, self.cv]


def summarize(replicates: Sequence[Sequence[float]], labels: Sequence[str] | None = None) -> ReplicationSummary:
    """Per-player order statistics, mean and coefficient of variation.

    Quartiles interpolate linearly between order statistics.
    """
    mat = np.asarray(replicates, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] < 2:
        raise ValidationError("summarize needs at least two replicate vectors")
    n = mat.shape[1]
    if labels is None:
        labels = [str(i) for i in range(n)]
    if len(labels) != n:
        raise ValidationError("labels do not match the replicate width")
    q = np.percentile(mat, [0, 25, 50, 75, 100], axis=0)
    mean = mat.mean(axis=0)
    sd = mat.std(axis=0, ddof=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cv = np.where(mean != 0, sd / np.where(mean != 0, mean, 1.0), np.nan)
    return ReplicationSummary(tuple(labels), q[0], q[1], q[2], mean, q[3], q[4], cv)


@dataclass(frozen=True)
class LorenzCurve:
    population_share: np.ndarray
    allocation_share: np.ndarray


def lorenz(alloc: Sequence[float]) -> LorenzCurve:
    """Lorenz curve of a non-negative allocation vector."""
    x = np.sort(np.asarray(alloc, dtype=np.float64))
    if x.size == 0:
        raise ValidationError("empty allocation")
    if x[0] < 0:
        raise ValidationError("Lorenz curve needs non-negative allocations")
    cum = np.concatenate([[0.0], np.cumsum(x)])
    if cum[-1] == 0:
        raise ValidationError("Lorenz curve of an all-zero allocation is undefined")
    share = cum / cum[-1]
    share[-1] = 1.0
    return LorenzCurve(np.arange(x.size + 1) / x.size, share)


@dataclass(frozen=True)
class RankingComparison:
    k: int
    overlap: int
    deltas: dict[str, int]  # position in b minus position in a
    entering: list[str]  # in b's top-k only
    leaving: list[str]  # in a's top-k only


def compare_rankings(a: RankingTable, b: RankingTable, k: int) -> RankingComparison:
    if sorted(a.labels) != sorted(b.labels):
        raise ValidationError("rankings cover different label sets")
    if k < 1:
        raise ValidationError("k must be positive")
    pa, pb = a.positions(), b.positions()
    top_a, top_b = a.top(k), b.top(k)
    return RankingComparison(
        k=k,
        overlap=len(set(top_a) & set(top_b)),
        deltas={lab: pb[lab] - pa[lab] for lab in a.labels},
        entering=[lab for lab in top_b if lab not in top_a],
        leaving=[lab for lab in top_a if lab not in top_b],
    )


# ---------------------------------------------------------------------------
# delimited text output


def _fmt(x: float) -> str:
    return f"{x:.{DECIMALS}f}"


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def format_ranking(table: RankingTable) -> str:
    return _csv(["Pos.", "Label", "Allocation"], [[r.position, r.label, _fmt(r.allocation)] for r in table.rows])


def format_summary(summary: ReplicationSummary, order: Sequence[str] | None = None) -> str:
    """Summary table; rows follow ``order`` (e.g. a ranking) when given."""
    index = {lab: i for i, lab in enumerate(summary.labels)}
    labels = list(order) if order is not None else list(summary.labels)
    cols = summary.columns()
    rows = [
        [pos, lab] + [_fmt(c[index[lab]]) for c in cols]
        for pos, lab in enumerate(labels, 1)
    ]
    return _csv(["Pos.", "Label", *SUMMARY_COLUMNS], rows)


def format_lorenz(curve: LorenzCurve) -> str:
    return _csv(
        ["population_share", "allocation_share"],
        [[_fmt(u), _fmt(v)] for u, v in zip(curve.population_share, curve.allocation_share)],
    )


def format_comparison(cmp: RankingComparison, a: RankingTable) -> str:
    pa = a.positions()
    lines = [
        f"# top-{cmp.k} overlap: {cmp.overlap}",
        f"# entering top-{cmp.k}: {'; '.join(cmp.entering)}",
        f"# leaving top-{cmp.k}: {'; '.join(cmp.leaving)}",
    ]
    body = _csv(
        ["Label", "Pos. A", "Pos. B", "Delta"],
        [[lab, pa[lab], pa[lab] + d, d] for lab, d in sorted(cmp.deltas.items(), key=lambda kv: pa[kv[0]])],
    )
    return "\n".join(lines) + "\n" + body

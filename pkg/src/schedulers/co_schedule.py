"""
多模型协同调度：把 mesh 按列切成互不相交的连续块，每个模型独占一块
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Iterator

from ..errors import SearchError
from ..hardware import Coord
from ..mcm_package import PackageSpec
from ..workloads.base import ModelGraph
from .pipeline_search import check_objective, search
from .schedule import CostReport, CostTable, Schedule

logger = logging.getLogger(__name__)


@dataclass
class ModelPlacement:
    model: str
    columns: tuple[int, ...]
    chiplets: tuple[Coord, ...]
    schedule: Schedule
    report: CostReport

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "columns": list(self.columns),
            "chiplets": [c.as_list() for c in self.chiplets],
            "schedule": self.schedule.to_dict(),
            "report": self.report.to_dict(),
        }


def balanced_column_splits(cols: int, parts: int) -> Iterator[tuple[int, ...]]:
    """各块列数相差不超过 1 的全部有序切分"""
    base, extra = divmod(cols, parts)
    sizes = [base + 1] * extra + [base] * (parts - extra)
    yield from sorted(set(itertools.permutations(sizes)))


def co_schedule(
    models: list[ModelGraph],
    p: PackageSpec,
    objective: str = "throughput",
    max_stages: int = 2,
) -> list[ModelPlacement]:
    """在所有均衡列切分中取最差模型目标值最大者（max-min 公平），平局取靠前的切分"""
    check_objective(objective)
    if not models:
        return []
    if len(models) > p.size:
        raise SearchError(f"{len(models)} models but only {p.size} chiplets")
    if len(models) > p.cols:
        raise SearchError(f"column-block split needs one column per model ({len(models)} models, {p.cols} columns)")

    tables = [CostTable(g, p) for g in models]
    best_key = None
    best: list[ModelPlacement] = []
    for sizes in balanced_column_splits(p.cols, len(models)):
        placements = []
        col = 0
        for g, table, width in zip(models, tables, sizes):
            columns = tuple(range(col, col + width))
            col += width
            chips = tuple(Coord(r, c) for r in range(p.rows) for c in columns)
            schedule, report = search(g, p, objective, max_stages, chiplets=chips, table=table)
            placements.append(ModelPlacement(g.name, columns, chips, schedule, report))
        worst = min(pl.report.objective(objective) for pl in placements)
        key = (-worst, sizes)
        logger.info("co-schedule split %s: min %s = %.6g", sizes, objective, worst)
        if best_key is None or key < best_key:
            best_key, best = key, placements
    return best

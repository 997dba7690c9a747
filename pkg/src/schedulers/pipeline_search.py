"""
第二阶段：层间流水调度空间搜索
候选 = 连续区间划分 × 互不相同的 chiplet 序列，经启发式剪枝后逐个评估，取目标最优者
"""
import itertools
import logging
import math
from typing import Iterable, Iterator, Optional

from ..errors import ConfigError, SearchError
from ..hardware import Coord
from ..mcm_package import PackageSpec, hop_count, memory_access_hops
from ..workloads.base import ModelGraph
from .assignment import stage1_assign
from .schedule import CostReport, CostTable, Schedule, evaluate_schedule, pipeline

logger = logging.getLogger(__name__)

OBJECTIVES = ("throughput", "efficiency")
# 相邻流水阶段所在 chiplet 的最大跳数
ADJACENT_HOP_LIMIT = 2
# brute_force_oracle 的规模上限
ORACLE_MAX_LAYERS = 12
ORACLE_MAX_CHIPLETS = 4

Partition = tuple[tuple[int, int], ...]


def check_objective(objective: str) -> str:
    if objective not in OBJECTIVES:
        raise ConfigError(f"Unknown objective: {objective!r} (expected one of {', '.join(OBJECTIVES)})")
    return objective


def partition_from_cuts(n_layers: int, cuts: Iterable[int]) -> Partition:
    bounds = [0, *cuts, n_layers]
    return tuple((a, b) for a, b in zip(bounds, bounds[1:]))


def enumerate_cuts(n_layers: int, max_stages: int) -> list[Partition]:
    """把 [0, n) 切成 1..max_stages 个连续非空区间的全部方式"""
    if n_layers < 1 or max_stages < 1:
        raise ValueError("n_layers and max_stages must be >= 1")
    partitions = []
    for stages in range(1, min(max_stages, n_layers) + 1):
        for cuts in itertools.combinations(range(1, n_layers), stages - 1):
            partitions.append(partition_from_cuts(n_layers, cuts))
    return partitions


def balanced_cut(
    g: ModelGraph,
    p: PackageSpec,
    k: int,
    chiplets: Optional[list[Coord]] = None,
    table: Optional[CostTable] = None,
) -> Partition:
    """
    恰好 k 段的划分中，最小化最慢阶段延迟；
    平局时取各阶段 EDP 极差最小者，再平局取最靠前的切点
    chiplets 为空时按第一阶段分配的单层延迟计，否则每段按对应 chiplet 计
    """
    n = len(g.layers)
    if k < 1 or k > n:
        raise SearchError(f"cannot cut {n} layers into {k} stages")
    if chiplets is not None and len(chiplets) != k:
        raise ValueError(f"expected {k} stage chiplets, got {len(chiplets)}")
    table = table if table is not None else CostTable(g, p)

    if chiplets is None:
        assigned = stage1_assign(g, p, table)
        lat = [a.cost.latency_s for a in assigned]
        energy = [a.cost.e_total_j for a in assigned]
        per_stage = [(lat, energy)] * k
    else:
        per_stage = []
        for c in chiplets:
            costs = [table.cost(i, c) for i in range(n)]
            per_stage.append(([x.latency_s for x in costs], [x.e_total_j for x in costs]))

    best_key = None
    best = None
    for cuts in itertools.combinations(range(1, n), k - 1):
        part = partition_from_cuts(n, cuts)
        stage_lat = [math.fsum(lat[s:e]) for (s, e), (lat, _) in zip(part, per_stage)]
        stage_en = [math.fsum(en[s:e]) for (s, e), (_, en) in zip(part, per_stage)]
        stage_edp = [a * b for a, b in zip(stage_lat, stage_en)]
        key = (max(stage_lat), max(stage_edp) - min(stage_edp), cuts)
        if best_key is None or key < best_key:
            best_key, best = key, part
    return best


def _first_stage_hops(p: PackageSpec, allowed: list[Coord]) -> int:
    return min(memory_access_hops(c, p) for c in allowed)


def candidate_space(
    g: ModelGraph,
    p: PackageSpec,
    max_stages: int,
    allowed: Optional[Iterable[Coord]] = None,
    hop_limit: Optional[int] = ADJACENT_HOP_LIMIT,
) -> Iterator[tuple[Partition, tuple[Coord, ...]]]:
    """
    枚举 (划分, chiplet 序列)：
    (a) 首阶段 chiplet 紧邻内存通道（在允许的 chiplet 中访存跳数最小）
    (b) 相邻阶段 chiplet 跳数 <= hop_limit，hop_limit 为 None 时不剪枝
    (c) 每阶段数据流由 chiplet 决定
    """
    coords = sorted(allowed) if allowed is not None else list(p.coords())
    if not coords:
        return
    entry_hops = _first_stage_hops(p, coords)
    for part in enumerate_cuts(len(g.layers), min(max_stages, len(coords))):
        for chips in itertools.permutations(coords, len(part)):
            if memory_access_hops(chips[0], p) != entry_hops:
                continue
            if hop_limit is not None and any(
                hop_count(a, b, p) > hop_limit for a, b in zip(chips, chips[1:])
            ):
                continue
            yield part, chips


def _tie_key(schedule: Schedule, part: Partition, chips: tuple[Coord, ...]):
    return (schedule.label, tuple((c.row, c.col) for c in chips), part)


def _best(
    g: ModelGraph,
    p: PackageSpec,
    objective: str,
    candidates: Iterable[tuple[Partition, tuple[Coord, ...]]],
    table: CostTable,
) -> tuple[Schedule, CostReport, int]:
    best_key = None
    best = None
    count = 0
    for part, chips in candidates:
        schedule = pipeline(part, chips, p)
        report = evaluate_schedule(schedule, g, p, table)
        count += 1
        # 目标值越大越好，平局按 label、chiplet 字典序、划分排序
        key = (-report.objective(objective), _tie_key(schedule, part, chips))
        if best_key is None or key < best_key:
            best_key, best = key, (schedule, report)
    if best is None:
        raise SearchError(f"no schedule candidates for {g.name}")
    return best[0], best[1], count


def search(
    g: ModelGraph,
    p: PackageSpec,
    objective: str = "throughput",
    max_stages: int = 2,
    chiplets: Optional[Iterable[Coord]] = None,
    table: Optional[CostTable] = None,
) -> tuple[Schedule, CostReport]:
    """启发式剪枝后的调度搜索"""
    check_objective(objective)
    if max_stages < 1:
        raise ConfigError(f"max_stages must be >= 1, got {max_stages}")
    if not g.layers:
        raise SearchError(f"{g.name} has no layers to schedule")
    table = table if table is not None else CostTable(g, p)
    schedule, report, count = _best(
        g, p, objective, candidate_space(g, p, max_stages, chiplets), table
    )
    logger.info("search %s (%s, <=%d stages): %d candidates, best %s -> %s=%.6g",
                g.name, objective, max_stages, count, schedule.label, objective,
                report.objective(objective))
    return schedule, report


def brute_force_oracle(
    g: ModelGraph,
    p: PackageSpec,
    objective: str = "throughput",
    max_stages: int = 2,
) -> tuple[Schedule, CostReport]:
    """不做相邻跳数剪枝的穷举，只保留首阶段贴近内存通道的约束；用作测试基准"""
    check_objective(objective)
    if len(g.layers) > ORACLE_MAX_LAYERS or p.size > ORACLE_MAX_CHIPLETS:
        raise SearchError(
            f"brute force limited to {ORACLE_MAX_LAYERS} layers and {ORACLE_MAX_CHIPLETS} chiplets "
            f"(got {len(g.layers)} layers, {p.size} chiplets)"
        )
    if not g.layers:
        raise SearchError(f"{g.name} has no layers to schedule")
    schedule, report, _ = _best(
        g, p, objective, candidate_space(g, p, max_stages, hop_limit=None), CostTable(g, p)
    )
    return schedule, report

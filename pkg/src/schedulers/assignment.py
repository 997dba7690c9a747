"""
第一阶段：按每层偏好的数据流分配 chiplet
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional

from ..analyzers.chiplet_cost import LayerCost, favored_dataflow
from ..hardware import Coord, Dataflow
from ..mcm_package import PackageSpec, memory_access_hops
from ..workloads.base import ModelGraph
from .schedule import CostTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayerAssignment:
    layer_id: int
    chiplet: Coord
    dataflow: Dataflow
    cost: LayerCost
    favored: Dataflow
    fallback: bool = False  # 封装中没有偏好的数据流，退而求其次


def placement_order(p: PackageSpec, chiplets: Optional[Iterable[Coord]] = None) -> list[Coord]:
    """确定性的 chiplet 优先级：先离内存通道近，再按行优先"""
    coords = list(chiplets) if chiplets is not None else list(p.coords())
    return sorted(coords, key=lambda c: (memory_access_hops(c, p), c.row, c.col))


def preferred_chiplet(p: PackageSpec, df: Dataflow, chiplets: Optional[Iterable[Coord]] = None,
                      exclude: Iterable[Coord] = ()) -> Optional[Coord]:
    excluded = set(exclude)
    for c in placement_order(p, chiplets):
        if c not in excluded and p.dataflow_at(c) is df:
            return c
    return None


def stage1_assign(g: ModelGraph, p: PackageSpec, table: Optional[CostTable] = None) -> list[LayerAssignment]:
    table = table if table is not None else CostTable(g, p)
    chip = p.chiplet_at(placement_order(p)[0])
    assignments = []
    for idx, layer in enumerate(g.layers):
        favored, _ = favored_dataflow(layer, chip, p.dram, p.nop)
        target = preferred_chiplet(p, favored)
        fallback = target is None
        if fallback:
            # 在现有数据流中挑 EDP 最低的 chiplet
            options = [preferred_chiplet(p, df) for df in sorted(p.dataflows(), key=lambda d: d.value)]
            target = min(options, key=lambda c: table.cost(idx, c).edp)
            logger.info("layer %d (%s): favored %s not in package, falling back to %s",
                        layer.id, layer.name, favored.value, p.dataflow_at(target).value)
        assignments.append(LayerAssignment(
            layer_id=layer.id,
            chiplet=target,
            dataflow=p.dataflow_at(target),
            cost=table.cost(idx, target),
            favored=favored,
            fallback=fallback,
        ))
    return assignments

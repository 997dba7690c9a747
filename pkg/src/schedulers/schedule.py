"""
调度树与调度评估
叶子把连续的层区间绑定到 (chiplet, dataflow)，组合节点为顺序执行或层间流水
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Iterator, Optional, Union

from ..analyzers.chiplet_cost import LayerCost, layer_cost
from ..errors import ScheduleValidationError
from ..hardware import Coord, Dataflow
from ..mcm_package import PackageSpec, hop_count, memory_access_hops, nop_transfer
from ..workloads.base import ModelGraph, activation_bytes_at_cut

logger = logging.getLogger(__name__)


class CompositeOp(Enum):
    Sequential = "seq"
    Pipelined = "pipe"


@dataclass(frozen=True)
class StageLeaf:
    """层区间 [start, end) 在一个 chiplet 上顺序执行"""
    start: int
    end: int
    chiplet: Coord
    dataflow: Dataflow


@dataclass(frozen=True)
class Composite:
    op: CompositeOp
    children: tuple["ScheduleNode", ...]


ScheduleNode = Union[StageLeaf, Composite]


@dataclass(frozen=True)
class Schedule:
    tree: ScheduleNode
    label: str

    def leaves(self) -> list[StageLeaf]:
        return list(iter_leaves(self.tree))

    def to_dict(self) -> dict[str, Any]:
        return {"label": self.label, "tree": node_to_dict(self.tree)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Schedule":
        return cls(tree=node_from_dict(data["tree"]), label=str(data["label"]))


def iter_leaves(node: ScheduleNode) -> Iterator[StageLeaf]:
    """从左到右遍历叶子"""
    if isinstance(node, StageLeaf):
        yield node
        return
    for child in node.children:
        yield from iter_leaves(child)


def node_to_dict(node: ScheduleNode) -> dict[str, Any]:
    if isinstance(node, StageLeaf):
        return {
            "type": "leaf",
            "layers": [node.start, node.end],
            "chiplet": node.chiplet.as_list(),
            "dataflow": node.dataflow.value,
        }
    return {"type": node.op.value, "children": [node_to_dict(c) for c in node.children]}


def node_from_dict(data: dict[str, Any]) -> ScheduleNode:
    kind = data.get("type")
    if kind == "leaf":
        start, end = data["layers"]
        row, col = data["chiplet"]
        return StageLeaf(int(start), int(end), Coord(int(row), int(col)), Dataflow.parse(data["dataflow"]))
    if kind in ("seq", "pipe"):
        op = CompositeOp.Sequential if kind == "seq" else CompositeOp.Pipelined
        return Composite(op, tuple(node_from_dict(c) for c in data["children"]))
    raise ScheduleValidationError("node-type", f"unknown schedule node type {kind!r}")


def leaf(start: int, end: int, chiplet: Coord, p: PackageSpec) -> StageLeaf:
    """按封装的 dataflow_map 生成叶子"""
    return StageLeaf(start, end, chiplet, p.dataflow_at(chiplet))


def pipeline(partition: tuple[tuple[int, int], ...], chiplets: tuple[Coord, ...], p: PackageSpec) -> Schedule:
    """把区间划分与 chiplet 序列组装成调度；单阶段为叶子，多阶段为流水"""
    leaves = tuple(leaf(s, e, c, p) for (s, e), c in zip(partition, chiplets))
    label = "-".join(lf.dataflow.value for lf in leaves)
    if len(leaves) == 1:
        return Schedule(leaves[0], label)
    return Schedule(Composite(CompositeOp.Pipelined, leaves), label)


def _node_chiplets(node: ScheduleNode) -> set[Coord]:
    return {lf.chiplet for lf in iter_leaves(node)}


def validate_schedule(s: Schedule, g: ModelGraph, p: PackageSpec) -> None:
    """检查调度树约束，失败时抛出 ScheduleValidationError 并给出规则名"""
    if not s.label:
        raise ScheduleValidationError("label", "schedule label must be nonempty")

    expected = 0
    for lf in iter_leaves(s.tree):
        if lf.start != expected or lf.end <= lf.start:
            raise ScheduleValidationError(
                "partition",
                f"leaf [{lf.start}, {lf.end}) does not continue the chain at layer {expected}",
            )
        expected = lf.end
        if not p.contains(lf.chiplet):
            raise ScheduleValidationError("chiplet-bounds", f"chiplet {lf.chiplet} outside the package")
        if lf.dataflow is not p.dataflow_at(lf.chiplet):
            raise ScheduleValidationError(
                "dataflow",
                f"leaf [{lf.start}, {lf.end}) uses {lf.dataflow.value} but chiplet {lf.chiplet} "
                f"runs {p.dataflow_at(lf.chiplet).value}",
            )
    if expected != len(g.layers):
        raise ScheduleValidationError(
            "partition", f"leaves cover [0, {expected}) but the graph has {len(g.layers)} layers"
        )

    def walk(node: ScheduleNode) -> None:
        if isinstance(node, StageLeaf):
            return
        if not node.children:
            raise ScheduleValidationError("composite-children", f"{node.op.value} node has no children")
        if node.op is CompositeOp.Pipelined:
            used: set[Coord] = set()
            for child in node.children:
                chips = _node_chiplets(child)
                if used & chips:
                    clash = ", ".join(str(c) for c in sorted(used & chips))
                    raise ScheduleValidationError(
                        "pipeline-disjoint", f"pipelined stages share chiplet(s) {clash}"
                    )
                used |= chips
        for child in node.children:
            walk(child)

    walk(s.tree)


class CostTable:
    """(layer, chiplet) -> LayerCost 缓存；搜索时大量候选共享同一组单层代价"""

    def __init__(self, g: ModelGraph, p: PackageSpec):
        self.graph = g
        self.package = p
        self._cache: dict[tuple[int, Coord], LayerCost] = {}

    def cost(self, layer_idx: int, chiplet: Coord) -> LayerCost:
        key = (layer_idx, chiplet)
        if key not in self._cache:
            p = self.package
            self._cache[key] = layer_cost(
                self.graph.layers[layer_idx],
                p.chiplet_at(chiplet),
                p.dataflow_at(chiplet),
                p.dram,
                memory_access_hops(chiplet, p),
                p.nop,
            )
        return self._cache[key]

    def stage(self, start: int, end: int, chiplet: Coord) -> "StageReport":
        costs = [self.cost(i, chiplet) for i in range(start, end)]
        return StageReport(
            layers=(start, end),
            chiplet=chiplet,
            dataflow=self.package.dataflow_at(chiplet),
            latency_s=math.fsum(c.latency_s for c in costs),
            energy_j=math.fsum(c.e_total_j for c in costs),
            compute_s=math.fsum(c.compute_s for c in costs),
            dram_bytes=sum(c.dram_bytes for c in costs),
            nop_bytes=sum(c.nop_bytes for c in costs),
            layer_costs=costs,
        )


@dataclass
class StageReport:
    layers: tuple[int, int]
    chiplet: Coord
    dataflow: Dataflow
    latency_s: float
    energy_j: float
    compute_s: float
    dram_bytes: int
    nop_bytes: int
    layer_costs: list[LayerCost] = field(default_factory=list)

    @property
    def edp(self) -> float:
        return self.energy_j * self.latency_s

    def to_dict(self) -> dict[str, Any]:
        return {
            "layers": list(self.layers),
            "chiplet": self.chiplet.as_list(),
            "dataflow": self.dataflow.value,
            "latency_s": self.latency_s,
            "energy_j": self.energy_j,
            "compute_s": self.compute_s,
            "dram_bytes": self.dram_bytes,
            "nop_bytes": self.nop_bytes,
            "layer_costs": [c.to_dict() for c in self.layer_costs],
        }


@dataclass
class TransferReport:
    """流水阶段之间经 NoP 传输的激活"""
    cut: int
    src: Coord
    dst: Coord
    bytes: int
    hops: int
    latency_s: float
    energy_j: float

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["src"] = self.src.as_list()
        d["dst"] = self.dst.as_list()
        return d


@dataclass
class CostReport:
    e2e_latency_s: float
    interval_s: float
    throughput_out_s: float
    energy_j: float
    edp: float
    efficiency: float
    batch: int = 1
    stages: list[StageReport] = field(default_factory=list)
    transfers: list[TransferReport] = field(default_factory=list)

    def objective(self, name: str) -> float:
        if name == "throughput":
            return self.throughput_out_s
        if name == "efficiency":
            return self.efficiency
        raise ValueError(f"Unknown objective: {name!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "e2e_latency_s": self.e2e_latency_s,
            "interval_s": self.interval_s,
            "throughput_out_s": self.throughput_out_s,
            "energy_j": self.energy_j,
            "edp": self.edp,
            "efficiency": self.efficiency,
            "batch": self.batch,
            "stages": [st.to_dict() for st in self.stages],
            "transfers": [t.to_dict() for t in self.transfers],
        }


@dataclass
class _NodeResult:
    e2e_s: float
    interval_s: float
    first: Coord
    last: Coord
    start: int


def evaluate_schedule(
    s: Schedule,
    g: ModelGraph,
    p: PackageSpec,
    table: Optional[CostTable] = None,
) -> CostReport:
    """
    叶子：阶段延迟 = 各层 roofline 延迟之和，能耗相加
    流水：interval = max(各阶段时间, 入站传输延迟)，e2e = 阶段延迟之和 + 传输延迟之和
    顺序：interval = e2e = 子节点 e2e 之和
    """
    validate_schedule(s, g, p)
    table = table if table is not None and table.graph is g and table.package is p else CostTable(g, p)
    stages: list[StageReport] = []
    transfers: list[TransferReport] = []

    def visit(node: ScheduleNode) -> _NodeResult:
        if isinstance(node, StageLeaf):
            st = table.stage(node.start, node.end, node.chiplet)
            stages.append(st)
            return _NodeResult(st.latency_s, st.latency_s, node.chiplet, node.chiplet, node.start)

        results = [visit(child) for child in node.children]
        if node.op is CompositeOp.Sequential:
            e2e = math.fsum(r.e2e_s for r in results)
            return _NodeResult(e2e, e2e, results[0].first, results[-1].last, results[0].start)

        interval = results[0].interval_s
        transfer_lat = []
        for prev, nxt in zip(results, results[1:]):
            nbytes = activation_bytes_at_cut(g, nxt.start)
            hops = hop_count(prev.last, nxt.first, p)
            lat, energy = nop_transfer(nbytes, hops, p.nop)
            transfers.append(TransferReport(nxt.start, prev.last, nxt.first, nbytes, hops, lat, energy))
            transfer_lat.append(lat)
            interval = max(interval, nxt.interval_s, lat)
        e2e = math.fsum([r.e2e_s for r in results] + transfer_lat)
        return _NodeResult(e2e, interval, results[0].first, results[-1].last, results[0].start)

    root = visit(s.tree)
    energy = math.fsum([st.energy_j for st in stages] + [t.energy_j for t in transfers])
    edp = energy * root.e2e_s
    report = CostReport(
        e2e_latency_s=root.e2e_s,
        interval_s=root.interval_s,
        throughput_out_s=g.batch / root.interval_s,
        energy_j=energy,
        edp=edp,
        efficiency=1.0 / edp,
        batch=g.batch,
        stages=stages,
        transfers=transfers,
    )
    logger.debug("%s on %s: interval=%.6g s, e2e=%.6g s, energy=%.6g J",
                 s.label, g.name, report.interval_s, report.e2e_latency_s, report.energy_j)
    return report

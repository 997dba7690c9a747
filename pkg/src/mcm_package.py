"""
MCM 封装模型 - mesh 拓扑、XY 路由、左右两侧内存通道
NoP / DRAM 传输的延迟与能耗按字节计
"""
from dataclasses import dataclass, field, replace
from typing import Iterator

from .hardware import ChipletSpec, Coord, Dataflow, DramParams, NoPParams


def _default_dataflow_map() -> tuple[tuple[Dataflow, ...], ...]:
    # 第 0 列 os，第 1 列 ws
    return (
        (Dataflow.OutputStationary, Dataflow.WeightStationary),
        (Dataflow.OutputStationary, Dataflow.WeightStationary),
    )


@dataclass(frozen=True)
class PackageSpec:
    """chiplet mesh 封装描述，加载后不可变"""
    rows: int = 2
    cols: int = 2
    chiplet: ChipletSpec = field(default_factory=ChipletSpec)
    dataflow_map: tuple[tuple[Dataflow, ...], ...] = field(default_factory=_default_dataflow_map)
    nop: NoPParams = field(default_factory=NoPParams)
    dram: DramParams = field(default_factory=DramParams)
    # 可选：按坐标覆盖 chiplet 参数，未覆盖的坐标使用 chiplet
    overrides: tuple[tuple[Coord, ChipletSpec], ...] = ()

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"mesh must be at least 1x1, got {self.rows}x{self.cols}")
        if len(self.dataflow_map) != self.rows or any(len(r) != self.cols for r in self.dataflow_map):
            raise ValueError(
                f"dataflow_map must cover every coordinate of a {self.rows}x{self.cols} mesh"
            )
        for coord, _ in self.overrides:
            self.check(coord)

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def coords(self) -> Iterator[Coord]:
        """行优先遍历所有坐标"""
        for r in range(self.rows):
            for c in range(self.cols):
                yield Coord(r, c)

    def contains(self, c: Coord) -> bool:
        return 0 <= c.row < self.rows and 0 <= c.col < self.cols

    def check(self, c: Coord) -> None:
        if not self.contains(c):
            raise IndexError(f"coordinate {c} outside {self.rows}x{self.cols} mesh")

    def chiplet_at(self, c: Coord) -> ChipletSpec:
        self.check(c)
        for coord, spec in self.overrides:
            if coord == c:
                return spec
        return self.chiplet

    def dataflow_at(self, c: Coord) -> Dataflow:
        self.check(c)
        return self.dataflow_map[c.row][c.col]

    def dataflows(self) -> set[Dataflow]:
        return {df for row in self.dataflow_map for df in row}


def homogeneous_package(dataflow: Dataflow, rows: int = 2, cols: int = 2, **kwargs) -> PackageSpec:
    """所有 chiplet 使用同一数据流的封装"""
    dmap = tuple(tuple(dataflow for _ in range(cols)) for _ in range(rows))
    return PackageSpec(rows=rows, cols=cols, dataflow_map=dmap, **kwargs)


def monolithic_package(p: PackageSpec) -> PackageSpec:
    """与 p 总 PE 数、总缓存相同的单芯片 os 加速器（--baseline monolithic-4x）"""
    n = p.size
    big = replace(
        p.chiplet,
        pe_count=p.chiplet.pe_count * n,
        buffer_bytes=p.chiplet.buffer_bytes * n,
    )
    return PackageSpec(
        rows=1,
        cols=1,
        chiplet=big,
        dataflow_map=((Dataflow.OutputStationary,),),
        nop=p.nop,
        dram=p.dram,
    )


def hop_count(a: Coord, b: Coord, p: PackageSpec) -> int:
    """XY 路由下的跳数（曼哈顿距离）；坐标越界抛 IndexError"""
    p.check(a)
    p.check(b)
    return abs(a.row - b.row) + abs(a.col - b.col)


def memory_access_hops(c: Coord, p: PackageSpec) -> int:
    """到最近一侧（最左/最右列）内存通道的跳数，边列 chiplet 为 0"""
    p.check(c)
    return min(c.col, p.cols - 1 - c.col)


def nop_transfer(nbytes: float, hops: int, nop: NoPParams) -> tuple[float, float]:
    """片间传输 (latency_s, energy_j)；能耗按比特计一次，与跳数无关"""
    if nbytes < 0 or hops < 0:
        raise ValueError("bytes and hops must be >= 0")
    latency = hops * nop.hop_lat_s + nbytes / nop.bw_bytes_s
    energy = nbytes * 8 * nop.e_bit_j
    return latency, energy


def dram_path(nbytes: float, access_hops: int, dram: DramParams, nop: NoPParams) -> tuple[float, float]:
    """经 access_hops 跳 NoP 访问一侧 DRAM 的 (latency_s, energy_j)"""
    if nbytes < 0 or access_hops < 0:
        raise ValueError("bytes and access_hops must be >= 0")
    latency = dram.lat_s + nbytes / dram.bw_bytes_s + access_hops * nop.hop_lat_s
    energy = nbytes * 8 * dram.e_bit_j
    if access_hops > 0:
        energy += nbytes * 8 * nop.e_bit_j
    return latency, energy


def dram_transfer(nbytes: float, access_hops: int, p: PackageSpec) -> tuple[float, float]:
    return dram_path(nbytes, access_hops, p.dram, p.nop)

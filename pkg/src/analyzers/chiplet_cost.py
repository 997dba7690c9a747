"""
单 chiplet 解析代价模型
对 os / ws 两种数据流给出 GEMM 的周期数、DRAM 流量与能耗（闭式公式，可精确测试）
"""
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

from ..hardware import ChipletSpec, Dataflow, DramParams, NoPParams
from ..mcm_package import dram_path
from ..workloads.base import GemmShape, Layer


class DramTraffic(NamedTuple):
    a_bytes: int
    w_bytes: int
    o_bytes: int
    total: int


@dataclass(frozen=True)
class LayerCost:
    """单层在某个 chiplet / 数据流上的代价分解"""
    cycles: int
    compute_s: float
    dram_bytes: int
    nop_bytes: int
    latency_s: float
    e_mac_j: float
    e_buf_j: float
    e_dram_j: float
    e_nop_j: float
    e_total_j: float

    @property
    def edp(self) -> float:
        return self.e_total_j * self.latency_s

    def to_dict(self) -> dict:
        return asdict(self)


def array_tiles(s: GemmShape, pe_count: int, df: Dataflow) -> tuple[int, int]:
    """
    PE 阵列按近似正方形切分
    os 返回 (Tm, Tn)，ws 返回 (Tk, Tn)
    """
    tn = max(1, min(s.n, math.isqrt(pe_count)))
    return max(1, pe_count // tn), tn


def gemm_cycles(s: GemmShape, pe_count: int, df: Dataflow) -> int:
    if df is Dataflow.OutputStationary:
        # 每个 PE 驻留一个输出，k 步累加
        return math.ceil(s.m * s.n / pe_count) * s.k
    # 每个 PE 驻留一个权重，逐行流过 m 个输入
    return math.ceil(s.k * s.n / pe_count) * s.m


def buffer_reread_factors(s: GemmShape, buffer_bytes: int) -> tuple[int, int]:
    """全局缓存放不下整个 GEMM 时 A / W 的重复读取次数 (rA, rW)"""
    eb = s.elem_bytes
    footprint = (s.m * s.k + s.k * s.n + s.m * s.n) * eb
    if footprint <= buffer_bytes:
        return 1, 1
    block = max(1, math.isqrt(buffer_bytes // (2 * s.k * eb)))
    return math.ceil(s.n / block), math.ceil(s.m / block)


def partial_sum_rounds(s: GemmShape, pe_count: int) -> int:
    """ws 下输出部分和经过 DRAM 的轮数 rO = ceil(k / Tk)"""
    tk, _ = array_tiles(s, pe_count, Dataflow.WeightStationary)
    return math.ceil(s.k / tk)


def gemm_dram_traffic(s: GemmShape, pe_count: int, buffer_bytes: int, df: Dataflow) -> DramTraffic:
    eb = s.elem_bytes
    r_a, r_w = buffer_reread_factors(s, buffer_bytes)
    a_bytes = s.m * s.k * r_a * eb
    w_bytes = s.k * s.n * r_w * eb
    if df is Dataflow.OutputStationary:
        o_bytes = s.m * s.n * eb
    else:
        r_o = partial_sum_rounds(s, pe_count)
        # r_o 次写回 + (r_o - 1) 次读回
        o_bytes = (s.m * s.n * r_o + s.m * s.n * (r_o - 1)) * eb
    return DramTraffic(a_bytes, w_bytes, o_bytes, a_bytes + w_bytes + o_bytes)


def roofline_latency(
    compute_s: float,
    dram_bytes: int,
    access_hops: int,
    dram: DramParams,
    nop: NoPParams,
) -> float:
    """max(计算时间, 访存时间)；没有片外流量时即为计算时间"""
    if dram_bytes == 0:
        return compute_s
    dram_s, _ = dram_path(dram_bytes, access_hops, dram, nop)
    return max(compute_s, dram_s)


def layer_cost(
    layer: Layer,
    chip: ChipletSpec,
    df: Dataflow,
    dram: DramParams,
    access_hops: int,
    nop: NoPParams,
) -> LayerCost:
    """roofline 延迟 = max(计算, 访存)，假设双缓冲完全重叠"""
    s = layer.shape
    cycles = gemm_cycles(s, chip.pe_count, df)
    compute_s = cycles / chip.freq_hz
    traffic = gemm_dram_traffic(s, chip.pe_count, chip.buffer_bytes, df)
    dram_bytes = traffic.total
    # 非边列 chiplet 的 DRAM 数据需经 NoP，能耗按字节只计一次
    nop_bytes = dram_bytes * min(access_hops, 1)
    latency_s = roofline_latency(compute_s, dram_bytes, access_hops, dram, nop)

    e_mac_j = s.macs * chip.e_mac
    e_buf_j = (dram_bytes + nop_bytes) * chip.e_buf_byte
    e_dram_j = dram_bytes * 8 * dram.e_bit_j
    e_nop_j = nop_bytes * 8 * nop.e_bit_j
    return LayerCost(
        cycles=cycles,
        compute_s=compute_s,
        dram_bytes=dram_bytes,
        nop_bytes=nop_bytes,
        latency_s=latency_s,
        e_mac_j=e_mac_j,
        e_buf_j=e_buf_j,
        e_dram_j=e_dram_j,
        e_nop_j=e_nop_j,
        e_total_j=e_mac_j + e_buf_j + e_dram_j + e_nop_j,
    )


def favored_dataflow(
    layer: Layer,
    chip: ChipletSpec,
    dram: DramParams,
    nop: NoPParams,
    access_hops: int = 0,
) -> tuple[Dataflow, LayerCost]:
    """两种数据流中 EDP 更低者，相等时取 os"""
    os_cost = layer_cost(layer, chip, Dataflow.OutputStationary, dram, access_hops, nop)
    ws_cost = layer_cost(layer, chip, Dataflow.WeightStationary, dram, access_hops, nop)
    if ws_cost.edp < os_cost.edp:
        return Dataflow.WeightStationary, ws_cost
    return Dataflow.OutputStationary, os_cost

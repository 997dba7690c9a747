"""
硬件描述 - chiplet 与封装共用的基础类型
所有数值均为 SI 单位（s, J, B/s, Hz, B），文件中的 ns/pJ/GB/s 在 config_loader 中换算
"""
from dataclasses import dataclass
from enum import Enum


class Dataflow(Enum):
    """chiplet 的数据流（异构维度）"""
    OutputStationary = "os"
    WeightStationary = "ws"

    @classmethod
    def parse(cls, text: str) -> "Dataflow":
        for df in cls:
            if df.value == text:
                return df
        raise ValueError(f"Unknown dataflow: {text!r} (expected 'os' or 'ws')")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ChipletSpec:
    """单个 chiplet 的计算与片上缓存参数"""
    pe_count: int = 256
    freq_hz: float = 500e6
    buffer_bytes: int = 10 * 2**20  # 10 MB 全局缓存
    e_mac: float = 1.0e-12
    e_buf_byte: float = 1.2e-12

    def __post_init__(self):
        if self.pe_count < 1:
            raise ValueError(f"pe_count must be >= 1, got {self.pe_count}")
        if self.freq_hz <= 0:
            raise ValueError(f"freq_hz must be > 0, got {self.freq_hz}")
        if self.buffer_bytes <= 0:
            raise ValueError(f"buffer_bytes must be > 0, got {self.buffer_bytes}")
        if self.e_mac < 0 or self.e_buf_byte < 0:
            raise ValueError("chiplet energies must be >= 0")


@dataclass(frozen=True)
class NoPParams:
    """片间互连（network-on-package）参数"""
    hop_lat_s: float = 35e-9
    e_bit_j: float = 2.04e-12
    bw_bytes_s: float = 100e9

    def __post_init__(self):
        for name in ("hop_lat_s", "e_bit_j", "bw_bytes_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"nop.{name} must be > 0")


@dataclass(frozen=True)
class DramParams:
    """片外 DRAM 参数（每侧通道）"""
    lat_s: float = 200e-9
    e_bit_j: float = 14.8e-12
    bw_bytes_s: float = 64e9

    def __post_init__(self):
        for name in ("lat_s", "e_bit_j", "bw_bytes_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"dram.{name} must be > 0")


@dataclass(frozen=True, order=True)
class Coord:
    """mesh 中的 chiplet 坐标"""
    row: int
    col: int

    def as_list(self) -> list[int]:
        return [self.row, self.col]

    def __str__(self) -> str:
        return f"({self.row},{self.col})"

"""
工作负载基础类型 - 以 GEMM 形式表示的层链
所有层都降为 (m, k, n) 的 GEMM，一个代价模型同时服务 Transformer 与 CNN
"""
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..errors import ConfigError, GraphValidationError, ShapeError

LAYER_KINDS = ("gemm", "conv-lowered", "attention-matmul")


@dataclass(frozen=True)
class GemmShape:
    """降维后的 GEMM：输出 m×n，归约深度 k"""
    m: int
    k: int
    n: int
    elem_bytes: int = 1

    @property
    def macs(self) -> int:
        return self.m * self.k * self.n

    def problems(self) -> list[str]:
        return [
            f"{name}={getattr(self, name)} must be >= 1"
            for name in ("m", "k", "n", "elem_bytes")
            if getattr(self, name) < 1
        ]


@dataclass(frozen=True)
class ConvShape:
    h_in: int
    w_in: int
    c_in: int
    c_out: int
    r: int
    s: int
    stride: int = 1
    pad: int = 0


@dataclass(frozen=True)
class Layer:
    id: int
    name: str
    shape: GemmShape
    kind: str = "gemm"


@dataclass(frozen=True)
class ModelGraph:
    """线性层链：layer i 的输出是 layer i+1 的输入"""
    name: str
    layers: tuple[Layer, ...]
    batch: int = 1

    def __len__(self) -> int:
        return len(self.layers)

    @property
    def total_macs(self) -> int:
        return sum(layer.shape.macs for layer in self.layers)

    @property
    def elem_bytes(self) -> int:
        return self.layers[0].shape.elem_bytes if self.layers else 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "batch": self.batch,
            "elem_bytes": self.elem_bytes,
            "layers": [
                {
                    "id": layer.id,
                    "name": layer.name,
                    "kind": layer.kind,
                    "m": layer.shape.m,
                    "k": layer.shape.k,
                    "n": layer.shape.n,
                }
                for layer in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ModelGraph":
        eb = int(data.get("elem_bytes", 1))
        layers = tuple(
            Layer(
                id=int(entry["id"]),
                name=str(entry["name"]),
                kind=str(entry.get("kind", "gemm")),
                shape=GemmShape(int(entry["m"]), int(entry["k"]), int(entry["n"]), eb),
            )
            for entry in data["layers"]
        )
        graph = cls(name=str(data["name"]), layers=layers, batch=int(data.get("batch", 1)))
        validate_graph(graph)
        return graph


def chain(name: str, specs: list[tuple[str, str, GemmShape]], batch: int = 1) -> ModelGraph:
    """按顺序编号生成 ModelGraph"""
    layers = tuple(
        Layer(id=i, name=lname, kind=kind, shape=shape)
        for i, (lname, kind, shape) in enumerate(specs)
    )
    return ModelGraph(name=name, layers=layers, batch=batch)


def conv_output_size(conv: ConvShape, exact: bool = False) -> tuple[int, int]:
    """卷积输出空间尺寸，默认向下取整（与主流框架一致）"""
    for name in ("h_in", "w_in", "c_in", "c_out", "r", "s", "stride"):
        if getattr(conv, name) < 1:
            raise ShapeError(name, f"must be >= 1, got {getattr(conv, name)}")
    if conv.pad < 0:
        raise ShapeError("pad", f"must be >= 0, got {conv.pad}")

    sizes = []
    for field_name, extent, kernel in (("h_in", conv.h_in, conv.r), ("w_in", conv.w_in, conv.s)):
        span = extent + 2 * conv.pad - kernel
        if span < 0:
            raise ShapeError(field_name, f"kernel {kernel} larger than padded input {extent + 2 * conv.pad}")
        if exact and span % conv.stride:
            raise ShapeError(
                field_name,
                f"output size ({extent} + 2*{conv.pad} - {kernel})/{conv.stride} + 1 is not an integer",
            )
        sizes.append(span // conv.stride + 1)
    return sizes[0], sizes[1]


def lower_conv_to_gemm(conv: ConvShape, batch: int = 1, elem_bytes: int = 1, exact: bool = False) -> GemmShape:
    """implicit-GEMM 降维：m = batch·h_out·w_out, k = r·s·c_in, n = c_out"""
    if batch < 1:
        raise ShapeError("batch", f"must be >= 1, got {batch}")
    h_out, w_out = conv_output_size(conv, exact=exact)
    return GemmShape(
        m=batch * h_out * w_out,
        k=conv.r * conv.s * conv.c_in,
        n=conv.c_out,
        elem_bytes=elem_bytes,
    )


def activation_bytes_at_cut(g: ModelGraph, cut: int) -> int:
    """在 layer `cut` 之前切分时，跨阶段传输的激活字节数（layer cut-1 的输出）"""
    if not 1 <= cut <= len(g.layers) - 1:
        raise IndexError(f"cut {cut} outside [1, {len(g.layers) - 1}] for {g.name}")
    shape = g.layers[cut - 1].shape
    return shape.m * shape.n * shape.elem_bytes


def validate_graph(g: ModelGraph) -> None:
    """检查链顺序、id 连续、形状为正；相邻层维度不做匹配检查"""
    problems = []
    if g.batch < 1:
        problems.append(f"batch={g.batch} must be >= 1")
    seen: dict[int, int] = {}
    for pos, layer in enumerate(g.layers):
        if layer.id in seen:
            problems.append(f"layer {layer.id}: duplicated id (positions {seen[layer.id]} and {pos})")
        else:
            seen[layer.id] = pos
        if layer.id != pos:
            problems.append(f"layer {layer.id}: id out of chain order (expected {pos})")
        if not layer.name:
            problems.append(f"layer {layer.id}: empty name")
        if layer.kind not in LAYER_KINDS:
            problems.append(f"layer {layer.id}: unknown kind {layer.kind!r}")
        for p in layer.shape.problems():
            problems.append(f"layer {layer.id}: {p}")
    if problems:
        raise GraphValidationError(problems)


def load_workload(path: Path) -> ModelGraph:
    """读取工作负载 JSON 文件"""
    with open(path, "r", encoding="utf-8") as f:
        return ModelGraph.from_dict(json.load(f))


def save_workload(g: ModelGraph, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(g.to_dict(), indent=2) + "\n", encoding="utf-8")


def as_int(v: Any, field: str) -> int:
    """配置中的整数字段；bool 与带小数的 float 不接受"""
    if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
        raise ConfigError(f"{field}: expected an integer, got {v!r}")
    try:
        return int(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{field}: expected an integer, got {v!r}") from None


class BaseWorkload(ABC):
    """内置工作负载生成器基类"""

    id: str = ""
    name: str = ""
    description: str = ""
    defaults: dict[str, int] = {}

    def resolve_params(self, params: dict[str, Any] = None) -> dict[str, int]:
        """合并默认参数，未知参数直接报错"""
        params = dict(params or {})
        unknown = sorted(set(params) - set(self.defaults))
        if unknown:
            raise ConfigError(f"{self.id}: unknown parameter(s) {unknown}")
        resolved = dict(self.defaults)
        for k, v in params.items():
            resolved[k] = as_int(v, f"{self.id}.{k}")
        return resolved

    @abstractmethod
    def build(self, **params) -> ModelGraph:
        """生成模型层链"""
        pass

"""工作负载2：ResNet-50（v1.5，stride 在 3x3 卷积上）"""
from ..errors import ConfigError
from .base import BaseWorkload, ConvShape, GemmShape, ModelGraph, chain, conv_output_size, lower_conv_to_gemm

# (bottleneck 宽度, block 数, 第一个 block 的 stride)
STAGES = [
    (64, 3, 1),
    (128, 4, 2),
    (256, 6, 2),
    (512, 3, 2),
]
EXPANSION = 4
NUM_CLASSES = 1000


def build_resnet50(batch: int = 1, elem_bytes: int = 1, include_shortcuts: bool = True) -> ModelGraph:
    """
    stem + 16 个 bottleneck（各 3 个卷积）+ FC
    include_shortcuts=True 时每个 stage 第一个 block 的投影捷径卷积作为独立层接在 conv3 之后（共 54 层），
    否则为 50 层；残差加法、BN、ReLU、池化不计代价
    """
    if batch < 1:
        raise ConfigError(f"resnet50: batch={batch} must be >= 1")
    if elem_bytes < 1:
        raise ConfigError(f"resnet50: elem_bytes={elem_bytes} must be >= 1")

    specs: list[tuple[str, str, GemmShape]] = []

    def conv(name: str, c: ConvShape) -> int:
        specs.append((name, "conv-lowered", lower_conv_to_gemm(c, batch, elem_bytes)))
        return conv_output_size(c)[0]

    stem = ConvShape(h_in=224, w_in=224, c_in=3, c_out=64, r=7, s=7, stride=2, pad=3)
    hw = conv("conv1", stem)
    # 3x3/2 max pool
    hw = (hw + 2 * 1 - 3) // 2 + 1

    c_in = 64
    for stage_idx, (width, blocks, first_stride) in enumerate(STAGES, start=1):
        c_out = width * EXPANSION
        for b in range(blocks):
            stride = first_stride if b == 0 else 1
            prefix = f"layer{stage_idx}.{b}"
            conv(f"{prefix}.conv1", ConvShape(hw, hw, c_in, width, 1, 1))
            out_hw = conv(f"{prefix}.conv2", ConvShape(hw, hw, width, width, 3, 3, stride=stride, pad=1))
            conv(f"{prefix}.conv3", ConvShape(out_hw, out_hw, width, c_out, 1, 1))
            if b == 0 and include_shortcuts:
                conv(f"{prefix}.downsample", ConvShape(hw, hw, c_in, c_out, 1, 1, stride=stride))
            hw = out_hw
            c_in = c_out

    specs.append(("fc", "gemm", GemmShape(batch, c_in, NUM_CLASSES, elem_bytes)))
    return chain("resnet50", specs, batch=batch)


class ResNet50Workload(BaseWorkload):
    """ResNet-50 图像分类，batch 折叠进 m"""

    id = "resnet50"
    name = "ResNet-50"
    description = "stem + 16 bottleneck + 投影捷径 + FC，隐式 GEMM 降维"
    defaults = {"batch": 1, "elem_bytes": 1, "include_shortcuts": 1}

    def build(self, **params) -> ModelGraph:
        resolved = self.resolve_params(params)
        return build_resnet50(
            batch=resolved["batch"],
            elem_bytes=resolved["elem_bytes"],
            include_shortcuts=bool(resolved["include_shortcuts"]),
        )

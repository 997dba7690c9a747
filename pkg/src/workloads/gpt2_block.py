"""工作负载1：GPT-2 单个 Transformer block"""
from ..errors import ConfigError
from .base import BaseWorkload, GemmShape, ModelGraph, chain


def build_gpt2_block(
    d_model: int = 768,
    n_heads: int = 12,
    seq: int = 1024,
    ffn_mult: int = 4,
    elem_bytes: int = 1,
    batch: int = 1,
) -> ModelGraph:
    """
    一个 GPT-2 block 的 6 个 GEMM 子层
    所有 head 的注意力 GEMM 合并为一层（n 乘以 n_heads），softmax/layernorm 不计代价
    """
    params = {"d_model": d_model, "n_heads": n_heads, "seq": seq, "ffn_mult": ffn_mult,
              "elem_bytes": elem_bytes, "batch": batch}
    for name, value in params.items():
        if value < 1:
            raise ConfigError(f"gpt2-block: {name}={value} must be >= 1")
    if d_model % n_heads:
        raise ConfigError(f"gpt2-block: d_model={d_model} not divisible by n_heads={n_heads}")

    m = batch * seq
    d_head = d_model // n_heads
    ffn = ffn_mult * d_model
    eb = elem_bytes
    specs = [
        ("qkv_proj", "gemm", GemmShape(m, d_model, 3 * d_model, eb)),
        ("attn_scores", "attention-matmul", GemmShape(m, d_head, seq * n_heads, eb)),
        ("attn_context", "attention-matmul", GemmShape(m, seq, d_model, eb)),
        ("out_proj", "gemm", GemmShape(m, d_model, d_model, eb)),
        ("ffn_up", "gemm", GemmShape(m, d_model, ffn, eb)),
        ("ffn_down", "gemm", GemmShape(m, ffn, d_model, eb)),
    ]
    return chain(f"gpt2-block-d{d_model}-s{seq}", specs, batch=batch)


class Gpt2BlockWorkload(BaseWorkload):
    """默认取 GPT-2 small 尺寸；模型规模与序列长度属于假设，报告中会标注"""

    id = "gpt2-block"
    name = "GPT-2 block"
    description = "QKV / 注意力打分 / 注意力·V / 输出投影 / FFN 上投影 / FFN 下投影"
    defaults = {"d_model": 768, "n_heads": 12, "seq": 1024, "ffn_mult": 4, "elem_bytes": 1, "batch": 1}

    def build(self, **params) -> ModelGraph:
        return build_gpt2_block(**self.resolve_params(params))

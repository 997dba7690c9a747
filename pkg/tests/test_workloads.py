import random

import pytest

from src.errors import ConfigError, GraphValidationError, ShapeError
from src.workloads.base import (
    ConvShape,
    GemmShape,
    Layer,
    ModelGraph,
    activation_bytes_at_cut,
    conv_output_size,
    load_workload,
    lower_conv_to_gemm,
    save_workload,
    validate_graph,
)
from src.workloads.catalog import WORKLOADS, build_workload, get_workload
from src.workloads.gpt2_block import build_gpt2_block
from src.workloads.resnet50 import build_resnet50


@pytest.mark.parametrize(
    "conv, expected",
    [
        (ConvShape(224, 224, 3, 64, 7, 7, stride=2, pad=3), GemmShape(12544, 147, 64)),
        (ConvShape(56, 56, 64, 64, 3, 3, stride=1, pad=1), GemmShape(3136, 576, 64)),
        (ConvShape(56, 56, 256, 128, 1, 1), GemmShape(3136, 256, 128)),
    ],
)
def test_lower_conv_examples(conv, expected):
    assert lower_conv_to_gemm(conv) == expected


def test_lower_conv_batch_folds_into_m():
    conv = ConvShape(56, 56, 64, 64, 3, 3, stride=1, pad=1)
    assert lower_conv_to_gemm(conv, batch=4).m == 4 * 3136


def test_lower_conv_preserves_macs():
    rng = random.Random(0)
    for _ in range(200):
        r = rng.randint(1, 5)
        conv = ConvShape(
            h_in=rng.randint(r, 40), w_in=rng.randint(r, 40),
            c_in=rng.randint(1, 64), c_out=rng.randint(1, 64),
            r=r, s=r, stride=rng.randint(1, 3), pad=rng.randint(0, 2),
        )
        batch = rng.randint(1, 4)
        h_out, w_out = conv_output_size(conv)
        direct = batch * h_out * w_out * conv.c_out * conv.c_in * conv.r * conv.s
        assert lower_conv_to_gemm(conv, batch=batch).macs == direct


def test_conv_output_floor_and_exact():
    stem = ConvShape(224, 224, 3, 64, 7, 7, stride=2, pad=3)
    # (224 + 6 - 7) / 2 + 1 = 112.5
    assert conv_output_size(stem) == (112, 112)
    with pytest.raises(ShapeError) as exc:
        conv_output_size(stem, exact=True)
    assert exc.value.field == "h_in"


def test_conv_kernel_larger_than_input():
    with pytest.raises(ShapeError) as exc:
        lower_conv_to_gemm(ConvShape(4, 8, 3, 8, 7, 3))
    assert exc.value.field == "h_in"
    with pytest.raises(ShapeError) as exc:
        lower_conv_to_gemm(ConvShape(8, 2, 3, 8, 3, 5))
    assert exc.value.field == "w_in"


def test_conv_bad_stride_names_field():
    with pytest.raises(ShapeError) as exc:
        lower_conv_to_gemm(ConvShape(8, 8, 3, 8, 3, 3, stride=0))
    assert exc.value.field == "stride"


def test_gpt2_block_shapes():
    g = build_gpt2_block()
    assert [layer.name for layer in g.layers] == [
        "qkv_proj", "attn_scores", "attn_context", "out_proj", "ffn_up", "ffn_down",
    ]
    shapes = [(layer.shape.m, layer.shape.k, layer.shape.n) for layer in g.layers]
    assert shapes == [
        (1024, 768, 2304),
        (1024, 64, 12288),
        (1024, 1024, 768),
        (1024, 768, 768),
        (1024, 768, 3072),
        (1024, 3072, 768),
    ]
    assert g.layers[1].kind == "attention-matmul"


def test_gpt2_block_total_macs():
    d, seq = 768, 1024
    g = build_gpt2_block()
    assert g.total_macs == seq * 12 * d * d + 2 * seq * seq * d
    assert g.total_macs == 8_858_370_048


def test_gpt2_block_unit_dims():
    g = build_gpt2_block(d_model=1, n_heads=1, seq=1, ffn_mult=1)
    assert len(g.layers) == 6
    assert all(layer.shape.macs >= 1 for layer in g.layers)
    validate_graph(g)


def test_gpt2_block_rejects_indivisible_heads():
    with pytest.raises(ConfigError):
        build_gpt2_block(d_model=100, n_heads=12)
    with pytest.raises(ConfigError):
        build_gpt2_block(seq=0)


def test_gpt2_block_doubling_seq():
    a = build_gpt2_block(seq=256)
    b = build_gpt2_block(seq=512)
    for la, lb in zip(a.layers, b.layers):
        ratio = lb.shape.macs / la.shape.macs
        if la.kind == "attention-matmul":
            assert ratio == 4
        else:
            assert ratio == 2


def test_resnet50_layers():
    g = build_resnet50()
    assert len(g.layers) == 54
    first, last = g.layers[0].shape, g.layers[-1].shape
    assert (first.m, first.k, first.n) == (12544, 147, 64)
    assert (last.m, last.k, last.n) == (1, 2048, 1000)
    assert [layer.id for layer in g.layers] == list(range(54))
    assert sum(layer.name.endswith("downsample") for layer in g.layers) == 4


def _published_resnet50_macs(shortcuts: bool) -> int:
    macs = 112 * 112 * 7 * 7 * 3 * 64
    c_in = 64
    for width, blocks, out_hw in ((64, 3, 56), (128, 4, 28), (256, 6, 14), (512, 3, 7)):
        in_hw = 56 if width == 64 else out_hw * 2
        for b in range(blocks):
            hw = in_hw if b == 0 else out_hw
            macs += hw * hw * c_in * width
            macs += out_hw * out_hw * 9 * width * width
            macs += out_hw * out_hw * width * 4 * width
            if b == 0 and shortcuts:
                macs += out_hw * out_hw * c_in * 4 * width
            c_in = 4 * width
    return macs + 2048 * 1000


def test_resnet50_total_macs():
    g = build_resnet50()
    assert g.total_macs == _published_resnet50_macs(True) == 4_089_184_256
    assert abs(g.total_macs - 4.09e9) / 4.09e9 < 0.03
    plain = build_resnet50(include_shortcuts=False)
    assert len(plain.layers) == 50
    assert plain.total_macs == _published_resnet50_macs(False) == 3_729_522_688


def test_resnet50_batch():
    g1, g2 = build_resnet50(), build_resnet50(batch=2)
    assert g2.batch == 2
    for a, b in zip(g1.layers, g2.layers):
        assert b.shape.m == 2 * a.shape.m
        assert (b.shape.k, b.shape.n) == (a.shape.k, a.shape.n)


def test_activation_bytes_at_cut():
    g = build_gpt2_block()
    assert activation_bytes_at_cut(g, 5) == 1024 * 3072
    assert activation_bytes_at_cut(g, 1) == 1024 * 2304
    tiny = ModelGraph("tiny", (
        Layer(0, "a", GemmShape(1, 1, 1, 2)),
        Layer(1, "b", GemmShape(1, 1, 1, 2)),
    ))
    assert activation_bytes_at_cut(tiny, 1) == 2
    for cut in (0, 2):
        with pytest.raises(IndexError):
            activation_bytes_at_cut(tiny, cut)


def test_validate_graph_reports_layer_ids():
    bad = ModelGraph("bad", (
        Layer(0, "a", GemmShape(4, 4, 4)),
        Layer(1, "b", GemmShape(0, 4, 4)),
        Layer(1, "c", GemmShape(4, 4, 4)),
    ))
    with pytest.raises(GraphValidationError) as exc:
        validate_graph(bad)
    text = str(exc.value)
    assert "layer 1: m=0" in text
    assert "duplicated id" in text


def test_validate_graph_rejects_unknown_kind():
    bad = ModelGraph("bad", (Layer(0, "a", GemmShape(4, 4, 4), kind="pooling"),))
    with pytest.raises(GraphValidationError, match="pooling"):
        validate_graph(bad)


def test_builtin_graphs_validate():
    validate_graph(build_gpt2_block())
    validate_graph(build_resnet50())


def test_workload_file_round_trip(tmp_path):
    g = build_resnet50(batch=2, elem_bytes=2)
    path = tmp_path / "resnet50.json"
    save_workload(g, path)
    assert load_workload(path) == g
    assert ModelGraph.from_dict(g.to_dict()) == g
    entry = g.to_dict()["layers"][0]
    assert set(entry) == {"id", "name", "kind", "m", "k", "n"}


def test_from_dict_validates():
    data = build_gpt2_block(seq=8, d_model=16, n_heads=4).to_dict()
    data["layers"][2]["k"] = 0
    with pytest.raises(GraphValidationError, match="layer 2"):
        ModelGraph.from_dict(data)


def test_catalog():
    assert set(WORKLOADS) == {"gpt2-block", "resnet50"}
    assert len(build_workload("gpt2-block", {"seq": 16, "d_model": 32, "n_heads": 4}).layers) == 6
    with pytest.raises(ConfigError, match="vgg"):
        get_workload("vgg")
    with pytest.raises(ConfigError, match="unknown parameter"):
        build_workload("resnet50", {"depth": 101})


@pytest.mark.parametrize(
    "conv, expected",
    [
        (ConvShape(7, 7, 64, 64, 1, 1), GemmShape(49, 64, 64)),
        (ConvShape(1, 1, 1, 1, 1, 1), GemmShape(1, 1, 1)),
    ],
)
def test_lower_conv_trivial_cases(conv, expected):
    assert lower_conv_to_gemm(conv) == expected


def test_gpt2_unit_qkv_and_head_check():
    g = build_gpt2_block(d_model=1, n_heads=1, seq=1, ffn_mult=1)
    qkv = g.layers[0].shape
    assert (qkv.m, qkv.k, qkv.n) == (1, 1, 3)
    with pytest.raises(ConfigError, match="768"):
        build_gpt2_block(d_model=768, n_heads=5)

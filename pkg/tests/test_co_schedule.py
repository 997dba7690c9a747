import pytest

from conftest import make_chain
from src.errors import ConfigError, SearchError
from src.hardware import Coord, Dataflow
from src.mcm_package import homogeneous_package
from src.schedulers.co_schedule import balanced_column_splits, co_schedule
from src.schedulers.pipeline_search import search
from src.workloads.gpt2_block import build_gpt2_block
from src.workloads.resnet50 import build_resnet50


def test_balanced_column_splits():
    assert list(balanced_column_splits(2, 2)) == [(1, 1)]
    assert list(balanced_column_splits(3, 2)) == [(1, 2), (2, 1)]
    assert list(balanced_column_splits(4, 1)) == [(4,)]
    assert list(balanced_column_splits(5, 3)) == [(1, 2, 2), (2, 1, 2), (2, 2, 1)]


def test_single_model_uses_whole_package(package):
    g = build_gpt2_block(seq=128, d_model=128, n_heads=4)
    (placement,) = co_schedule([g], package)
    schedule, report = search(g, package)
    assert placement.columns == (0, 1)
    assert placement.schedule == schedule
    assert placement.report.throughput_out_s == report.throughput_out_s


def test_two_models_get_one_column_each(package):
    models = [build_gpt2_block(), build_resnet50()]
    placements = co_schedule(models, package)
    assert [pl.columns for pl in placements] == [(0,), (1,)]
    for pl, g, col in zip(placements, models, (0, 1)):
        chips = [Coord(0, col), Coord(1, col)]
        assert {lf.chiplet for lf in pl.schedule.leaves()} <= set(chips)
        schedule, report = search(g, package, chiplets=chips)
        assert pl.schedule == schedule
        assert pl.report.throughput_out_s == report.throughput_out_s


def test_max_min_fairness_picks_best_worst_case():
    p = homogeneous_package(Dataflow.OutputStationary, rows=1, cols=3)
    heavy = make_chain([(2048, 2048, 2048)] * 2, name="heavy")
    light = make_chain([(64, 64, 64)] * 2, name="light")
    placements = co_schedule([heavy, light], p)
    # 重负载拿到两列
    assert placements[0].columns == (0, 1)
    assert placements[1].columns == (2,)


def test_identical_models_are_symmetric():
    p = homogeneous_package(Dataflow.OutputStationary)
    g = make_chain([(512, 512, 512)] * 3)
    a, b = co_schedule([g, g], p)
    assert a.report.throughput_out_s == b.report.throughput_out_s


def test_co_schedule_errors(package):
    g = make_chain([(8, 8, 8)])
    assert co_schedule([], package) == []
    with pytest.raises(SearchError):
        co_schedule([g] * 5, package)
    with pytest.raises(SearchError):
        co_schedule([g] * 3, package)
    with pytest.raises(ConfigError):
        co_schedule([g], package, objective="latency")


def test_placement_to_dict(package):
    (pl,) = co_schedule([make_chain([(8, 8, 8)] * 2)], package)
    data = pl.to_dict()
    assert data["model"] == "toy"
    assert data["columns"] == [0, 1]
    assert data["chiplets"] == [[0, 0], [0, 1], [1, 0], [1, 1]]

import itertools
import random
from collections import deque

import pytest

from src.hardware import ChipletSpec, Coord, Dataflow, DramParams, NoPParams
from src.mcm_package import (
    PackageSpec,
    dram_path,
    dram_transfer,
    homogeneous_package,
    hop_count,
    memory_access_hops,
    monolithic_package,
    nop_transfer,
)


def _bfs_hops(rows, cols, src):
    dist = {src: 0}
    queue = deque([src])
    while queue:
        c = queue.popleft()
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nxt = Coord(c.row + dr, c.col + dc)
            if 0 <= nxt.row < rows and 0 <= nxt.col < cols and nxt not in dist:
                dist[nxt] = dist[c] + 1
                queue.append(nxt)
    return dist


def test_default_package(package):
    assert (package.rows, package.cols, package.size) == (2, 2, 4)
    assert package.dataflow_at(Coord(0, 0)) is Dataflow.OutputStationary
    assert package.dataflow_at(Coord(1, 0)) is Dataflow.OutputStationary
    assert package.dataflow_at(Coord(0, 1)) is Dataflow.WeightStationary
    assert package.dataflow_at(Coord(1, 1)) is Dataflow.WeightStationary
    assert list(package.coords()) == [Coord(0, 0), Coord(0, 1), Coord(1, 0), Coord(1, 1)]


def test_hop_count_examples(package):
    assert hop_count(Coord(0, 0), Coord(1, 1), package) == 2
    assert hop_count(Coord(0, 0), Coord(0, 0), package) == 0
    assert hop_count(Coord(0, 1), Coord(1, 1), package) == 1


def test_hop_count_matches_bfs_on_4x4():
    p = homogeneous_package(Dataflow.OutputStationary, rows=4, cols=4)
    coords = list(p.coords())
    for a in coords:
        dist = _bfs_hops(4, 4, a)
        for b in coords:
            assert hop_count(a, b, p) == dist[b]


def test_hop_count_is_a_metric():
    rng = random.Random(1)
    p = homogeneous_package(Dataflow.OutputStationary, rows=6, cols=6)
    coords = [Coord(r, c) for r, c in itertools.product(range(6), range(6))]
    for _ in range(300):
        a, b, c = rng.choice(coords), rng.choice(coords), rng.choice(coords)
        assert hop_count(a, b, p) == hop_count(b, a, p)
        assert hop_count(a, c, p) <= hop_count(a, b, p) + hop_count(b, c, p)
        assert (hop_count(a, b, p) == 0) == (a == b)


def test_hop_count_bounds_checked(package):
    with pytest.raises(IndexError):
        hop_count(Coord(0, 0), Coord(2, 0), package)
    with pytest.raises(IndexError):
        hop_count(Coord(-1, 0), Coord(0, 0), package)
    with pytest.raises(TypeError):
        hop_count(Coord(0, 0), Coord(1, 1))


def test_memory_access_hops(package):
    assert all(memory_access_hops(c, package) == 0 for c in package.coords())
    wide = homogeneous_package(Dataflow.OutputStationary, rows=2, cols=5)
    assert [memory_access_hops(Coord(1, c), wide) for c in range(5)] == [0, 1, 2, 1, 0]
    with pytest.raises(IndexError):
        memory_access_hops(Coord(0, 5), wide)


def test_nop_transfer_examples():
    nop = NoPParams()
    lat, energy = nop_transfer(1, 1, nop)
    assert lat == pytest.approx(35.01e-9, rel=1e-12)
    assert energy == pytest.approx(16.32e-12, rel=1e-12)
    lat, energy = nop_transfer(1e6, 2, nop)
    assert lat == pytest.approx(10.07e-6, rel=1e-12)
    assert energy == pytest.approx(16.32e-6, rel=1e-12)


def test_nop_energy_ignores_hops():
    nop = NoPParams()
    assert nop_transfer(4096, 1, nop)[1] == nop_transfer(4096, 3, nop)[1]


def test_nop_transfer_monotone():
    nop = NoPParams()
    rng = random.Random(2)
    for _ in range(100):
        b, h = rng.randint(0, 10**7), rng.randint(0, 6)
        lat, energy = nop_transfer(b, h, nop)
        assert nop_transfer(b + 1, h, nop)[0] >= lat
        assert nop_transfer(b, h + 1, nop)[0] >= lat
        assert nop_transfer(b + 1, h, nop)[1] >= energy


def test_nop_transfer_rejects_negative():
    with pytest.raises(ValueError):
        nop_transfer(-1, 1, NoPParams())


def test_dram_transfer_examples(package):
    lat, energy = dram_transfer(0, 0, package)
    assert lat == DramParams().lat_s
    assert energy == 0.0
    lat, energy = dram_transfer(64e9, 0, package)
    assert lat == pytest.approx(1.0 + 200e-9, rel=1e-12)
    assert energy == pytest.approx(64e9 * 8 * 14.8e-12, rel=1e-12)


def test_dram_path_through_interior_chiplet():
    dram, nop = DramParams(), NoPParams()
    lat, energy = dram_path(1000, 2, dram, nop)
    assert lat == pytest.approx(200e-9 + 1000 / 64e9 + 2 * 35e-9, rel=1e-12)
    assert energy == pytest.approx(1000 * 8 * (14.8e-12 + 2.04e-12), rel=1e-12)


def test_monolithic_package(package):
    mono = monolithic_package(package)
    assert mono.size == 1
    assert mono.chiplet.pe_count == 4 * 256
    assert mono.chiplet.buffer_bytes == 4 * 10 * 2**20
    assert mono.dataflow_at(Coord(0, 0)) is Dataflow.OutputStationary
    assert mono.dram == package.dram


def test_chiplet_overrides():
    small = ChipletSpec(pe_count=64)
    p = PackageSpec(overrides=((Coord(1, 1), small),))
    assert p.chiplet_at(Coord(1, 1)) is small
    assert p.chiplet_at(Coord(0, 0)) == ChipletSpec()


def test_package_rejects_bad_dataflow_map():
    with pytest.raises(ValueError):
        PackageSpec(rows=3, cols=2)
    with pytest.raises(IndexError):
        PackageSpec(overrides=((Coord(4, 0), ChipletSpec()),))


@pytest.mark.parametrize(
    "nbytes, hops, latency, energy",
    [
        (64, 0, 201e-9, 7577.6e-12),
        (64, 1, 236e-9, 7577.6e-12 + 64 * 8 * 2.04e-12),
    ],
)
def test_dram_transfer_constants(package, nbytes, hops, latency, energy):
    lat, e = dram_transfer(nbytes, hops, package)
    assert lat == pytest.approx(latency, rel=1e-12)
    assert e == pytest.approx(energy, rel=1e-12)


def test_nop_zero_payload():
    lat, energy = nop_transfer(0, 3, NoPParams())
    assert lat == pytest.approx(105e-9, rel=1e-12)
    assert energy == 0.0

import pytest

from src.hardware import ChipletSpec, Dataflow
from src.mcm_package import PackageSpec, homogeneous_package
from src.workloads.base import GemmShape, ModelGraph, chain

HUGE_BUFFER = 2**40


def make_chain(shapes, name="toy", elem_bytes=1, batch=1) -> ModelGraph:
    specs = [(f"l{i}", "gemm", GemmShape(m, k, n, elem_bytes)) for i, (m, k, n) in enumerate(shapes)]
    return chain(name, specs, batch=batch)


@pytest.fixture
def package() -> PackageSpec:
    return PackageSpec()


@pytest.fixture
def os_package() -> PackageSpec:
    return homogeneous_package(Dataflow.OutputStationary)


@pytest.fixture
def huge_chip() -> ChipletSpec:
    return ChipletSpec(pe_count=1, buffer_bytes=HUGE_BUFFER)

"""内置工作负载目录"""
from typing import Any

from ..errors import ConfigError
from .base import BaseWorkload, ModelGraph
from .gpt2_block import Gpt2BlockWorkload
from .resnet50 import ResNet50Workload

WORKLOADS: dict[str, BaseWorkload] = {
    w.id: w for w in (Gpt2BlockWorkload(), ResNet50Workload())
}


def get_workload(name: str) -> BaseWorkload:
    if name not in WORKLOADS:
        raise ConfigError(f"Unknown workload: {name!r} (available: {', '.join(sorted(WORKLOADS))})")
    return WORKLOADS[name]


def build_workload(name: str, params: dict[str, Any] = None) -> ModelGraph:
    return get_workload(name).build(**(params or {}))

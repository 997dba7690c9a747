"""配置加载模块"""
import copy
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml
from dotenv import load_dotenv

from .errors import ConfigError
from .hardware import ChipletSpec, Coord, Dataflow, DramParams, NoPParams
from .mcm_package import PackageSpec
from .schedulers.pipeline_search import ADJACENT_HOP_LIMIT
from .workloads.base import as_int
from .workloads.catalog import get_workload

ROOT = Path(__file__).parent.parent

# 加载 .env
load_dotenv(ROOT / ".env")

LOG_ENV = "CHIPLET_SCHED_LOG"
CONFIG_ENV = "CHIPLET_SCHED_CONFIG"

# 文件中的单位：ns / pJ / GB/s / MHz / MB(2^20 B)
PACKAGE_DEFAULTS: dict[str, Any] = {
    "rows": 2,
    "cols": 2,
    "nop": {"hop_lat_ns": 35.0, "e_pj_per_bit": 2.04, "bw_gb_s": 100.0},
    "dram": {"lat_ns": 200.0, "e_pj_per_bit": 14.8, "bw_gb_s": 64.0},
    "chiplet": {"pe_count": 256, "freq_mhz": 500.0, "buffer_mb": 10.0, "e_mac_pj": 1.0, "e_buf_pj_per_byte": 1.2},
}
PACKAGE_KEYS = set(PACKAGE_DEFAULTS) | {"dataflow_map", "chiplet_overrides"}

OPTION_LABELS = ("os", "ws", "os-os", "os-ws", "search")
BASELINES = ("os", "monolithic-4x")
SCENARIO_KEYS = {"package", "workloads", "options", "objective", "max_stages", "baseline", "seed", "output"}
DEFAULT_WORKLOADS = [{"builtin": "gpt2-block"}, {"builtin": "resnet50"}]


def setup_logging(level: Optional[str] = None) -> None:
    """根据 CHIPLET_SCHED_LOG 配置日志级别，默认 WARNING"""
    name = (level or os.getenv(LOG_ENV) or "WARNING").upper()
    numeric = getattr(logging, name, None)
    if not isinstance(numeric, int):
        raise ConfigError(f"{LOG_ENV}: unknown log level {name!r}")
    logging.basicConfig(level=numeric, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(numeric)


def _read_mapping(path: Path) -> dict[str, Any]:
    """读取 YAML/JSON 文件，解析错误带行号"""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"{path}: file not found") from e
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark is not None else str(path)
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"{where}: parse error: {problem}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping, got {type(data).__name__}")
    return data


def _merge_section(name: str, defaults: dict[str, Any], given: Any) -> dict[str, Any]:
    if given is None:
        return dict(defaults)
    if not isinstance(given, dict):
        raise ConfigError(f"{name}: expected a mapping")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"{name}: unknown field(s) {', '.join(unknown)}")
    merged = dict(defaults)
    for key, value in given.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{name}.{key}: expected a number, got {value!r}")
        merged[key] = value
    return merged


def _chiplet_from_units(section: dict[str, Any]) -> ChipletSpec:
    return ChipletSpec(
        pe_count=int(section["pe_count"]),
        freq_hz=section["freq_mhz"] * 1e6,
        buffer_bytes=int(section["buffer_mb"] * 2**20),
        e_mac=section["e_mac_pj"] / 1e12,
        e_buf_byte=section["e_buf_pj_per_byte"] / 1e12,
    )


def default_dataflow_layout(rows: int, cols: int) -> list[list[str]]:
    """偶数列 os、奇数列 ws；2x2 时即第 0 列 os、第 1 列 ws"""
    return [["os" if c % 2 == 0 else "ws" for c in range(cols)] for _ in range(rows)]


def resolve_package_dict(data: Optional[dict[str, Any]]) -> dict[str, Any]:
    """把用户给出的封装配置与默认值合并（仍为文件单位）"""
    data = dict(data or {})
    unknown = sorted(set(data) - PACKAGE_KEYS)
    if unknown:
        raise ConfigError(f"package: unknown field(s) {', '.join(unknown)}")
    resolved: dict[str, Any] = {}
    for key in ("rows", "cols"):
        value = data.get(key, PACKAGE_DEFAULTS[key])
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ConfigError(f"package.{key}: expected a positive integer, got {value!r}")
        resolved[key] = value
    for key in ("nop", "dram", "chiplet"):
        resolved[key] = _merge_section(key, PACKAGE_DEFAULTS[key], data.get(key))

    dmap = data.get("dataflow_map", default_dataflow_layout(resolved["rows"], resolved["cols"]))
    if (
        not isinstance(dmap, list)
        or len(dmap) != resolved["rows"]
        or any(not isinstance(row, list) or len(row) != resolved["cols"] for row in dmap)
    ):
        raise ConfigError(f"dataflow_map: must be a {resolved['rows']}x{resolved['cols']} list of lists")
    for row in dmap:
        for entry in row:
            if entry not in ("os", "ws"):
                raise ConfigError(f"dataflow_map: unknown dataflow {entry!r}")
    resolved["dataflow_map"] = [list(row) for row in dmap]

    overrides = []
    for i, entry in enumerate(data.get("chiplet_overrides") or []):
        if not isinstance(entry, dict) or "at" not in entry:
            raise ConfigError(f"chiplet_overrides[{i}]: expected a mapping with 'at': [row, col]")
        fields = {k: v for k, v in entry.items() if k != "at"}
        section = _merge_section(f"chiplet_overrides[{i}]", resolved["chiplet"], fields)
        at = entry["at"]
        if not isinstance(at, (list, tuple)) or len(at) != 2:
            raise ConfigError(f"chiplet_overrides[{i}].at: expected [row, col], got {at!r}")
        at = [as_int(x, f"chiplet_overrides[{i}].at") for x in at]
        overrides.append({"at": at, **section})
    resolved["chiplet_overrides"] = overrides
    return resolved


def package_from_dict(data: Optional[dict[str, Any]]) -> PackageSpec:
    """封装配置（文件单位）-> PackageSpec（SI 单位）"""
    r = resolve_package_dict(data)
    nop, dram = r["nop"], r["dram"]
    try:
        overrides = []
        for entry in r["chiplet_overrides"]:
            row, col = entry["at"]
            overrides.append((Coord(int(row), int(col)), _chiplet_from_units(entry)))
        return PackageSpec(
            rows=r["rows"],
            cols=r["cols"],
            chiplet=_chiplet_from_units(r["chiplet"]),
            dataflow_map=tuple(tuple(Dataflow.parse(x) for x in row) for row in r["dataflow_map"]),
            nop=NoPParams(
                hop_lat_s=nop["hop_lat_ns"] / 1e9,
                e_bit_j=nop["e_pj_per_bit"] / 1e12,
                bw_bytes_s=nop["bw_gb_s"] * 1e9,
            ),
            dram=DramParams(
                lat_s=dram["lat_ns"] / 1e9,
                e_bit_j=dram["e_pj_per_bit"] / 1e12,
                bw_bytes_s=dram["bw_gb_s"] * 1e9,
            ),
            overrides=tuple(overrides),
        )
    except (ValueError, IndexError) as e:
        raise ConfigError(f"package: {e}") from e


def load_package_config(path: Path) -> PackageSpec:
    return package_from_dict(_read_mapping(path))


@dataclass
class WorkloadSpec:
    """内置生成器 + 参数，或工作负载 JSON 文件"""
    builtin: Optional[str] = None
    params: dict[str, Any] = field(default_factory=dict)
    file: Optional[Path] = None

    @property
    def label(self) -> str:
        return self.builtin or str(self.file)

    def to_dict(self) -> dict[str, Any]:
        if self.file is not None:
            return {"file": str(self.file)}
        return {"builtin": self.builtin, "params": get_workload(self.builtin).resolve_params(self.params)}


@dataclass
class ScenarioConfig:
    package: PackageSpec
    package_source: str = "default"
    package_dict: dict[str, Any] = field(default_factory=dict)
    workloads: list[WorkloadSpec] = field(default_factory=list)
    options: list[str] = field(default_factory=lambda: ["os", "ws", "os-os", "os-ws"])
    objective: str = "throughput"
    max_stages: int = 2
    baseline: str = "os"
    seed: int = 0
    out_json: Optional[Path] = None
    out_csv: Optional[Path] = None
    out_markdown: Optional[Path] = None
    out_html: Optional[Path] = None


def _parse_workloads(raw: Any, base_dir: Path) -> list[WorkloadSpec]:
    if raw is None:
        raw = copy.deepcopy(DEFAULT_WORKLOADS)
    if not isinstance(raw, list) or not raw:
        raise ConfigError("workloads: at least one workload is required")
    specs = []
    for i, entry in enumerate(raw):
        if isinstance(entry, str):
            entry = {"builtin": entry}
        if not isinstance(entry, dict):
            raise ConfigError(f"workloads[{i}]: expected a mapping")
        if "file" in entry:
            path = Path(entry["file"])
            path = path if path.is_absolute() else base_dir / path
            if not path.exists():
                raise ConfigError(f"workloads[{i}]: workload file {path} not found")
            specs.append(WorkloadSpec(file=path))
        elif "builtin" in entry:
            workload = get_workload(entry["builtin"])
            params = entry.get("params") or {}
            specs.append(WorkloadSpec(builtin=workload.id, params=workload.resolve_params(params)))
        else:
            raise ConfigError(f"workloads[{i}]: needs 'builtin' or 'file'")
    return specs


def config_from_dict(data: dict[str, Any], base_dir: Path = Path(".")) -> ScenarioConfig:
    """场景配置字典 -> ScenarioConfig，缺省项取默认值"""
    unknown = sorted(set(data) - SCENARIO_KEYS)
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")

    pkg = data.get("package", "default")
    if pkg == "default" or pkg is None:
        source, pkg_data = "default", {}
    elif isinstance(pkg, str):
        path = Path(pkg)
        path = path if path.is_absolute() else base_dir / path
        source, pkg_data = str(path), _read_mapping(path)
    elif isinstance(pkg, dict):
        source, pkg_data = "inline", pkg
    else:
        raise ConfigError("package: expected 'default', a file path or a mapping")

    options = data.get("options", ["os", "ws", "os-os", "os-ws"])
    if not isinstance(options, list) or not options:
        raise ConfigError("options: expected a non-empty list")
    for opt in options:
        if opt not in OPTION_LABELS:
            raise ConfigError(f"Unknown option label: {opt!r} (expected one of {', '.join(OPTION_LABELS)})")

    objective = data.get("objective", "throughput")
    if objective not in ("throughput", "efficiency"):
        raise ConfigError(f"Unknown objective: {objective!r}")
    max_stages = data.get("max_stages", 2)
    if not isinstance(max_stages, int) or isinstance(max_stages, bool) or max_stages < 1:
        raise ConfigError(f"max_stages: expected a positive integer, got {max_stages!r}")
    baseline = data.get("baseline", "os")
    if baseline not in BASELINES:
        raise ConfigError(f"Unknown baseline: {baseline!r} (expected one of {', '.join(BASELINES)})")

    output = data.get("output") or {}
    if not isinstance(output, dict) or set(output) - {"json", "csv", "markdown", "html"}:
        raise ConfigError("output: expected a mapping with json/csv/markdown/html paths")

    def out_path(key: str) -> Optional[Path]:
        return Path(output[key]) if output.get(key) else None

    return ScenarioConfig(
        package=package_from_dict(pkg_data),
        package_source=source,
        package_dict=resolve_package_dict(pkg_data),
        workloads=_parse_workloads(data.get("workloads"), base_dir),
        options=list(options),
        objective=objective,
        max_stages=max_stages,
        baseline=baseline,
        seed=as_int(data.get("seed", 0), "seed"),
        out_json=out_path("json"),
        out_csv=out_path("csv"),
        out_markdown=out_path("markdown"),
        out_html=out_path("html"),
    )


def load_config(path: Optional[Path] = None) -> ScenarioConfig:
    """加载场景配置；未给出路径时读取 CHIPLET_SCHED_CONFIG，仍没有则全部取默认值"""
    if path is None and os.getenv(CONFIG_ENV):
        path = Path(os.environ[CONFIG_ENV])
    if path is None:
        return config_from_dict({})
    path = Path(path)
    return config_from_dict(_read_mapping(path), base_dir=path.parent)


def resolved_echo(cfg: ScenarioConfig) -> dict[str, Any]:
    """报告头：本次运行用到的全部常量（文件单位 + SI 单位）"""
    p = cfg.package
    return {
        "package_source": cfg.package_source,
        "package": cfg.package_dict,
        "package_si": {
            "rows": p.rows,
            "cols": p.cols,
            "nop": {"hop_lat_s": p.nop.hop_lat_s, "e_bit_j": p.nop.e_bit_j, "bw_bytes_s": p.nop.bw_bytes_s},
            "dram": {"lat_s": p.dram.lat_s, "e_bit_j": p.dram.e_bit_j, "bw_bytes_s": p.dram.bw_bytes_s},
            "chiplet": {
                "pe_count": p.chiplet.pe_count,
                "freq_hz": p.chiplet.freq_hz,
                "buffer_bytes": p.chiplet.buffer_bytes,
                "e_mac_j": p.chiplet.e_mac,
                "e_buf_byte_j": p.chiplet.e_buf_byte,
            },
        },
        "workloads": [w.to_dict() for w in cfg.workloads],
        "options": list(cfg.options),
        "objective": cfg.objective,
        "max_stages": cfg.max_stages,
        "baseline": cfg.baseline,
        "seed": cfg.seed,
        "search": {"adjacent_hop_limit": ADJACENT_HOP_LIMIT},
    }

"""
场景执行器 - 遍历 工作负载 x 调度选项，评估并按基准归一化
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Optional

from ..config_loader import ScenarioConfig, WorkloadSpec, resolved_echo
from ..errors import ChipletSchedError, ConfigError, SearchError
from ..hardware import Coord, Dataflow
from ..mcm_package import PackageSpec, monolithic_package
from ..schedulers.assignment import preferred_chiplet
from ..schedulers.pipeline_search import balanced_cut, search
from ..schedulers.schedule import CostReport, CostTable, Schedule, evaluate_schedule, leaf, pipeline
from ..workloads.base import ModelGraph, load_workload
from ..workloads.catalog import build_workload

logger = logging.getLogger(__name__)

PIPELINED_OPTIONS = ("os-os", "os-ws", "search")


@dataclass
class ScenarioRow:
    workload: str
    option: str
    schedule: Optional[Schedule] = None
    report: Optional[CostReport] = None
    throughput_norm: Optional[float] = None
    efficiency_norm: Optional[float] = None
    error: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "workload": self.workload,
            "option": self.option,
            "schedule": self.schedule.to_dict() if self.schedule else None,
            "report": self.report.to_dict() if self.report else None,
            "throughput_norm": self.throughput_norm,
            "efficiency_norm": self.efficiency_norm,
            "error": self.error,
        }


@dataclass
class NormalizedReport:
    config: dict[str, Any]
    baseline: str = "os"
    rows: list[ScenarioRow] = field(default_factory=list)
    flags: list[dict[str, str]] = field(default_factory=list)

    def row(self, workload: str, option: str) -> Optional[ScenarioRow]:
        for r in self.rows:
            if r.workload == workload and r.option == option:
                return r
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "baseline": self.baseline,
            "rows": [r.to_dict() for r in self.rows],
            "flags": list(self.flags),
        }


def build_graph(spec: WorkloadSpec) -> tuple[str, ModelGraph]:
    """返回 (报告中的工作负载名, 模型图)"""
    if spec.file is not None:
        try:
            g = load_workload(spec.file)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"{spec.file}: invalid workload file: {e}") from e
        return g.name, g
    return spec.builtin, build_workload(spec.builtin, spec.params)


def _require_chiplet(p: PackageSpec, df: Dataflow, option: str, exclude=()) -> Coord:
    chip = preferred_chiplet(p, df, exclude=exclude)
    if chip is None:
        raise SearchError(f"option {option}: package has no free {df.value} chiplet")
    return chip


def option_schedule(
    option: str,
    g: ModelGraph,
    p: PackageSpec,
    table: CostTable,
    objective: str = "throughput",
    max_stages: int = 2,
) -> Schedule:
    """os/ws：整条链放在一个 chiplet；os-os/os-ws：EDP/延迟均衡的两段流水；search：调度搜索"""
    n = len(g.layers)
    if option in ("os", "ws"):
        chip = _require_chiplet(p, Dataflow.parse(option), option)
        return pipeline(((0, n),), (chip,), p)
    if option in ("os-os", "os-ws"):
        first_df, second_df = (Dataflow.parse(x) for x in option.split("-"))
        first = _require_chiplet(p, first_df, option)
        second = _require_chiplet(p, second_df, option, exclude=[first])
        if n < 2:
            raise SearchError(f"option {option}: {g.name} has a single layer, nothing to pipeline")
        part = balanced_cut(g, p, 2, chiplets=[first, second], table=table)
        return pipeline(part, (first, second), p)
    if option == "search":
        schedule, _ = search(g, p, objective, max_stages, table=table)
        return schedule
    raise ConfigError(f"Unknown option label: {option!r}")


def baseline_report(cfg: ScenarioConfig, g: ModelGraph, table: CostTable,
                    rows: dict[str, ScenarioRow]) -> CostReport:
    if cfg.baseline == "monolithic-4x":
        mono = monolithic_package(cfg.package)
        return evaluate_schedule(leaf_schedule(g, mono), g, mono)
    os_row = rows.get("os")
    if os_row is not None:
        if os_row.report is None:
            raise SearchError(f"os baseline unavailable: {os_row.error}")
        return os_row.report
    schedule = option_schedule("os", g, cfg.package, table)
    return evaluate_schedule(schedule, g, cfg.package, table)


def leaf_schedule(g: ModelGraph, p: PackageSpec) -> Schedule:
    chip = next(iter(p.coords()))
    return Schedule(leaf(0, len(g.layers), chip, p), p.dataflow_at(chip).value)


def _flags(workload: str, spec: WorkloadSpec, rows: dict[str, ScenarioRow]) -> list[dict[str, str]]:
    flags = []
    if spec.builtin == "gpt2-block":
        flags.append({"workload": workload, "flag": "assumed-model-size",
                      "detail": "GPT-2 width/heads/sequence length are assumed, GPT-2 small defaults used"})
    if spec.builtin == "resnet50":
        flags.append({"workload": workload, "flag": "modeled-workload",
                      "detail": "projection shortcut convs modeled as chain layers; residual adds, BN, pooling ignored"})
    for option in PIPELINED_OPTIONS:
        r = rows.get(option)
        if r is not None and r.throughput_norm is not None and r.throughput_norm <= 1.0:
            flags.append({"workload": workload, "flag": "no-pipelining-gain",
                          "detail": f"{option} throughput_norm={r.throughput_norm:.6g} <= 1"})
    hetero, homo = rows.get("os-ws"), rows.get("os-os")
    if (
        hetero is not None and homo is not None
        and hetero.efficiency_norm is not None and homo.efficiency_norm is not None
        and hetero.efficiency_norm < homo.efficiency_norm
    ):
        flags.append({"workload": workload, "flag": "heterogeneity-efficiency-divergence",
                      "detail": f"os-ws efficiency_norm={hetero.efficiency_norm:.6g} below "
                                f"os-os {homo.efficiency_norm:.6g}; reported trend is the opposite"})
    return flags


def run_scenario(cfg: ScenarioConfig) -> NormalizedReport:
    """执行全部组合，单个选项失败只记录错误，不中断运行"""
    p = cfg.package
    report = NormalizedReport(config=resolved_echo(cfg), baseline=cfg.baseline)

    for spec in cfg.workloads:
        name, g = build_graph(spec)
        table = CostTable(g, p)
        logger.info("workload %s: %d layers, %d MACs", name, len(g.layers), g.total_macs)
        rows: dict[str, ScenarioRow] = {}
        for option in cfg.options:
            row = ScenarioRow(workload=name, option=option)
            try:
                row.schedule = option_schedule(option, g, p, table, cfg.objective, cfg.max_stages)
                row.report = evaluate_schedule(row.schedule, g, p, table)
            except ChipletSchedError as e:
                logger.warning("%s / %s failed: %s", name, option, e)
                row.error = str(e)
            rows[option] = row

        try:
            base = baseline_report(cfg, g, table, rows)
        except ChipletSchedError as e:
            base = None
            report.flags.append({"workload": name, "flag": "no-baseline", "detail": str(e)})
        for row in rows.values():
            if base is not None and row.report is not None:
                row.throughput_norm = row.report.throughput_out_s / base.throughput_out_s
                row.efficiency_norm = row.report.efficiency / base.efficiency
            report.rows.append(row)
        report.flags.extend(_flags(name, spec, rows))
    return report

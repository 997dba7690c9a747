#!/usr/bin/env python3
"""
异构 chiplet MCM 调度分析 - 主入口
用法: python main.py run [--config cfg.yaml] [--out-csv out.csv] [--out-json out.json]
      python main.py search --workload gpt2-block [--objective efficiency]
      python main.py co-schedule --workloads gpt2-block,resnet50
      python main.py dump-workload resnet50 output/resnet50.json
      python main.py compare a.json b.json
退出码: 0 成功, 1 配置错误, 2 运行错误
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from src.collectors.runner import build_graph, run_scenario
from src.config_loader import (
    BASELINES,
    WorkloadSpec,
    load_config,
    resolved_echo,
    setup_logging,
)
from src.errors import ChipletSchedError, ConfigError
from src.reporters.report_generator import (
    compare_csv,
    emit_reports,
    load_report,
    report_csv,
    save_html_report,
    save_report,
    save_text,
)
from src.schedulers.co_schedule import co_schedule
from src.schedulers.pipeline_search import OBJECTIVES, search
from src.workloads.base import save_workload
from src.workloads.catalog import WORKLOADS, build_workload

logger = logging.getLogger("main")


def _parse_params(items: list[str]) -> dict[str, int]:
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        try:
            params[key.strip().replace("-", "_")] = int(value)
        except ValueError as e:
            raise ConfigError(f"--param {key}: expected an integer, got {value!r}") from e
    return params


def _workload_spec(text: str, params: dict[str, int]) -> WorkloadSpec:
    if text in WORKLOADS:
        return WorkloadSpec(builtin=text, params=params)
    path = Path(text)
    if not path.exists():
        raise ConfigError(f"Unknown workload: {text!r} (not a builtin name or an existing file)")
    return WorkloadSpec(file=path)


def _apply_overrides(cfg, args) -> None:
    if getattr(args, "objective", None):
        cfg.objective = args.objective
    if getattr(args, "max_stages", None) is not None:
        if args.max_stages < 1:
            raise ConfigError(f"--max-stages must be >= 1, got {args.max_stages}")
        cfg.max_stages = args.max_stages
    if getattr(args, "baseline", None):
        cfg.baseline = args.baseline
    if getattr(args, "seed", None) is not None:
        # 所有算法都是确定性的，seed 只记录在报告中
        cfg.seed = args.seed


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    out_json = args.out_json or cfg.out_json
    out_csv = args.out_csv or cfg.out_csv
    out_md = args.out_md or cfg.out_markdown
    out_html = args.out_html or cfg.out_html

    if args.dry_run:
        print(json.dumps(resolved_echo(cfg), indent=2, sort_keys=True))
        return 0

    print("开始执行调度场景...")
    print(f"  Workloads: {[w.label for w in cfg.workloads]}")
    print(f"  Options: {cfg.options}")
    report = run_scenario(cfg)

    emit_reports(report, out_json, out_csv)
    for path in (out_json, out_csv):
        if path:
            print(f"已保存: {path}")
    if out_md:
        save_report(report, out_md)
        print(f"报告已保存: {out_md}")
    if out_html:
        save_html_report(report, out_html)
        print(f"HTML 已保存: {out_html}")
    if not (out_json or out_csv or out_md or out_html):
        sys.stdout.write(report_csv(report))

    for flag in report.flags:
        logger.info("%s: %s (%s)", flag["workload"], flag["flag"], flag["detail"])
    print("完成。")
    return 0


def cmd_search(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    name, g = build_graph(_workload_spec(args.workload, _parse_params(args.param)))
    schedule, report = search(g, cfg.package, cfg.objective, cfg.max_stages)
    result = {
        "workload": name,
        "objective": cfg.objective,
        "max_stages": cfg.max_stages,
        "config": resolved_echo(cfg),
        "schedule": schedule.to_dict(),
        "report": report.to_dict(),
    }
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out_json:
        save_text(args.out_json, text)
        print(f"已保存: {args.out_json}")
    else:
        print(f"{name}: {schedule.label}  throughput={report.throughput_out_s:.9g} /s  "
              f"efficiency={report.efficiency:.9g} /(J*s)")
    return 0


def cmd_co_schedule(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    if args.workloads:
        specs = [_workload_spec(w.strip(), {}) for w in args.workloads.split(",") if w.strip()]
    else:
        specs = cfg.workloads
    graphs = [build_graph(s)[1] for s in specs]
    placements = co_schedule(graphs, cfg.package, cfg.objective, cfg.max_stages)
    result = {
        "objective": cfg.objective,
        "config": resolved_echo(cfg),
        "placements": [pl.to_dict() for pl in placements],
    }
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out_json:
        save_text(args.out_json, text)
        print(f"已保存: {args.out_json}")
    else:
        for pl in placements:
            print(f"{pl.model}: columns {list(pl.columns)} -> {pl.schedule.label}  "
                  f"{cfg.objective}={pl.report.objective(cfg.objective):.9g}")
    return 0


def cmd_dump_workload(args) -> int:
    g = build_workload(args.name, _parse_params(args.param))
    save_workload(g, Path(args.path))
    print(f"{args.name}: {len(g.layers)} layers, {g.total_macs} MACs -> {args.path}")
    return 0


def cmd_compare(args) -> int:
    text = compare_csv(load_report(args.a), load_report(args.b), (str(args.a), str(args.b)))
    if args.out_csv:
        save_text(args.out_csv, text)
        print(f"已保存: {args.out_csv}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="异构 chiplet MCM 加速器调度分析")
    parser.add_argument("--log-level", type=str, default=None, help="覆盖 CHIPLET_SCHED_LOG")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="场景配置文件（YAML/JSON），缺省时全部取内置默认值")
    common.add_argument("--objective", choices=OBJECTIVES, default=None)
    common.add_argument("--max-stages", type=int, default=None)
    common.add_argument("--seed", type=int, default=None, help="保留参数，所有算法均为确定性")

    run = sub.add_parser("run", parents=[common], help="运行 os / ws / os-os / os-ws 场景矩阵")
    run.add_argument("--out-json", type=Path, default=None)
    run.add_argument("--out-csv", type=Path, default=None)
    run.add_argument("--out-md", type=Path, default=None, help="Markdown 报告路径")
    run.add_argument("--out-html", type=Path, default=None, help="HTML 报告路径")
    run.add_argument("--baseline", choices=BASELINES, default=None)
    run.add_argument("--dry-run", action="store_true", help="仅解析并打印配置，不做评估")
    run.set_defaults(func=cmd_run)

    srch = sub.add_parser("search", parents=[common], help="对单个工作负载做调度搜索")
    srch.add_argument("--workload", required=True, help="内置名称或工作负载 JSON 路径")
    srch.add_argument("--param", action="append", default=[], help="生成器参数 key=value，可重复")
    srch.add_argument("--out-json", type=Path, default=None)
    srch.set_defaults(func=cmd_search)

    co = sub.add_parser("co-schedule", parents=[common], help="多模型按列划分 chiplet 协同调度")
    co.add_argument("--workloads", type=str, default="", help="逗号分隔，默认取配置中的工作负载")
    co.add_argument("--out-json", type=Path, default=None)
    co.set_defaults(func=cmd_co_schedule)

    dump = sub.add_parser("dump-workload", help="导出内置工作负载 JSON")
    dump.add_argument("name", help=", ".join(sorted(WORKLOADS)))
    dump.add_argument("path")
    dump.add_argument("--param", action="append", default=[], help="生成器参数 key=value，可重复")
    dump.set_defaults(func=cmd_dump_workload)

    cmp_ = sub.add_parser("compare", help="两份 JSON 报告的比值表 (b / a)")
    cmp_.add_argument("a", type=Path)
    cmp_.add_argument("b", type=Path)
    cmp_.add_argument("--out-csv", type=Path, default=None)
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        setup_logging(args.log_level)
        return args.func(args)
    except ConfigError as e:
        print(f"配置错误: {e}", file=sys.stderr)
        return 1
    except (ChipletSchedError, OSError) as e:
        print(f"运行错误: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

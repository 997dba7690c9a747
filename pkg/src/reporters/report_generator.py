"""报告生成器 - CSV / JSON / Markdown / HTML"""
import csv
import io
import json
from pathlib import Path
from typing import Any, Optional

import markdown
from jinja2 import Environment

from ..collectors.runner import NormalizedReport
from ..errors import ChipletSchedError

CSV_HEADER = [
    "workload",
    "option",
    "latency_s",
    "interval_s",
    "throughput_out_s",
    "energy_j",
    "edp",
    "efficiency",
    "throughput_norm",
    "efficiency_norm",
]
COMPARE_HEADER = [
    "workload",
    "option",
    "throughput_ratio",
    "efficiency_ratio",
    "latency_ratio",
    "energy_ratio",
]


def fmt_raw(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.9g}"


def fmt_norm(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.9f}"


def csv_rows(r: NormalizedReport) -> list[list[str]]:
    rows = []
    for row in r.rows:
        rep = row.report
        if rep is None:
            raw = [""] * 6
        else:
            raw = [fmt_raw(x) for x in (rep.e2e_latency_s, rep.interval_s, rep.throughput_out_s,
                                        rep.energy_j, rep.edp, rep.efficiency)]
        rows.append([row.workload, row.option, *raw, fmt_norm(row.throughput_norm), fmt_norm(row.efficiency_norm)])
    return rows


def _write_csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def report_csv(r: NormalizedReport) -> str:
    return _write_csv(CSV_HEADER, csv_rows(r))


def report_json(r: NormalizedReport) -> str:
    # JSON 保留完整精度，读回后与内存中的报告完全相等
    return json.dumps(r.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write(path: Path, content: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
    except OSError as e:
        raise ChipletSchedError(f"cannot write {path}: {e.strerror or e}") from e


def emit_reports(r: NormalizedReport, json_path: Optional[Path] = None, csv_path: Optional[Path] = None) -> None:
    if json_path is not None:
        _write(json_path, report_json(r))
    if csv_path is not None:
        _write(csv_path, report_csv(r))


def load_report(path: Path) -> dict[str, Any]:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ChipletSchedError(f"cannot read {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ChipletSchedError(f"{path}:{e.lineno}: not a report JSON file ({e.msg})") from e


MARKDOWN_TEMPLATE = """\
# 异构 Chiplet MCM 调度分析报告

## 1. 配置

| 参数 | 值 |
|------|----|
| 封装 | {{ cfg.package.rows }}x{{ cfg.package.cols }} mesh（来源: {{ cfg.package_source }}） |
| 数据流布局 | {{ layout }} |
| NoP | {{ cfg.package.nop.hop_lat_ns }} ns/hop, {{ cfg.package.nop.e_pj_per_bit }} pJ/bit, {{ cfg.package.nop.bw_gb_s }} GB/s |
| DRAM | {{ cfg.package.dram.lat_ns }} ns, {{ cfg.package.dram.e_pj_per_bit }} pJ/bit, {{ cfg.package.dram.bw_gb_s }} GB/s |
| Chiplet | {{ cfg.package.chiplet.pe_count }} PE @ {{ cfg.package.chiplet.freq_mhz }} MHz, {{ cfg.package.chiplet.buffer_mb }} MB 缓存 |
| 能耗 | MAC {{ cfg.package.chiplet.e_mac_pj }} pJ, 缓存 {{ cfg.package.chiplet.e_buf_pj_per_byte }} pJ/B |
| 目标 / 最大阶段数 | {{ cfg.objective }} / {{ cfg.max_stages }} |
| 归一化基准 | {{ baseline }} |

## 2. 结果

| 工作负载 | 选项 | 调度 | 吞吐 (1/s) | 能效 (1/(J·s)) | 吞吐(归一化) | 能效(归一化) |
|----------|------|------|-----------|----------------|--------------|--------------|
{% for row in rows -%}
| {{ row.workload }} | {{ row.option }} | {{ row.label }} | {{ row.throughput }} | {{ row.efficiency }} | {{ row.tnorm }} | {{ row.enorm }} |
{% endfor %}
{% if errors %}
## 3. 执行错误

{% for row in errors -%}
- **{{ row.workload }} / {{ row.option }}**: {{ row.error }}
{% endfor %}
{% endif %}
{% if flags %}
## 4. 提示

{% for f in flags -%}
- **{{ f.workload }}** `{{ f.flag }}`: {{ f.detail }}
{% endfor %}
{% endif %}
"""


def generate_markdown_report(r: NormalizedReport) -> str:
    """生成 Markdown 格式报告"""
    env = Environment(keep_trailing_newline=True)
    rows = []
    for row in r.rows:
        rep = row.report
        rows.append({
            "workload": row.workload,
            "option": row.option,
            "label": row.schedule.label if row.schedule else "-",
            "throughput": fmt_raw(rep.throughput_out_s) if rep else "-",
            "efficiency": fmt_raw(rep.efficiency) if rep else "-",
            "tnorm": fmt_norm(row.throughput_norm) or "-",
            "enorm": fmt_norm(row.efficiency_norm) or "-",
        })
    layout = " / ".join(" ".join(row) for row in r.config["package"]["dataflow_map"])
    return env.from_string(MARKDOWN_TEMPLATE).render(
        cfg=r.config,
        layout=layout,
        baseline=r.baseline,
        rows=rows,
        errors=[row for row in r.rows if row.error],
        flags=r.flags,
    )


def save_report(r: NormalizedReport, output_path: Path) -> None:
    """保存 Markdown 报告到文件"""
    _write(output_path, generate_markdown_report(r))


def save_html_report(r: NormalizedReport, output_path: Path) -> None:
    body = markdown.markdown(generate_markdown_report(r), extensions=["tables"])
    _write(output_path, f"<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"></head><body>\n{body}\n</body></html>\n")


def _ratio(b: Optional[float], a: Optional[float]) -> Optional[float]:
    if a in (None, 0) or b is None:
        return None
    return b / a


COMPARE_METRICS = ("throughput_out_s", "efficiency", "e2e_latency_s", "energy_j")


def compare_reports(
    a: dict[str, Any], b: dict[str, Any], names: tuple[str, str] = ("a", "b")
) -> list[list[str]]:
    """两份 JSON 报告的比值表 (b / a)，只比较两边都成功的 (workload, option)"""
    def index(rep: dict[str, Any], name: str) -> dict[tuple[str, str], dict[str, Any]]:
        try:
            return {(row["workload"], row["option"]): row["report"] for row in rep.get("rows", []) if row.get("report")}
        except (KeyError, TypeError, AttributeError) as e:
            raise ChipletSchedError(f"{name}: malformed report row ({e!r})") from e

    def metric(rep: dict[str, Any], key: tuple[str, str], field: str, name: str) -> Optional[float]:
        try:
            return rep[field]
        except KeyError:
            raise ChipletSchedError(f"{name}: {key[0]}/{key[1]} is missing '{field}'") from None

    ia, ib = index(a, names[0]), index(b, names[1])
    table = []
    for key in sorted(set(ia) & set(ib)):
        row = [key[0], key[1]]
        for field in COMPARE_METRICS:
            va = metric(ia[key], key, field, names[0])
            vb = metric(ib[key], key, field, names[1])
            row.append(fmt_raw(_ratio(vb, va)))
        table.append(row)
    return table


def compare_csv(a: dict[str, Any], b: dict[str, Any], names: tuple[str, str] = ("a", "b")) -> str:
    return _write_csv(COMPARE_HEADER, compare_reports(a, b, names))


def save_text(path: Path, content: str) -> None:
    _write(path, content)

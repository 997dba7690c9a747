import json

import pytest

from src.collectors.runner import NormalizedReport, run_scenario
from src.config_loader import config_from_dict
from src.errors import ChipletSchedError
from src.reporters.report_generator import (
    CSV_HEADER,
    compare_csv,
    emit_reports,
    fmt_norm,
    fmt_raw,
    generate_markdown_report,
    load_report,
    report_csv,
    report_json,
    save_html_report,
)

SMALL_GPT2 = {"builtin": "gpt2-block", "params": {"d_model": 64, "n_heads": 4, "seq": 32}}


@pytest.fixture(scope="module")
def report():
    cfg = config_from_dict({"workloads": [SMALL_GPT2], "options": ["os", "ws", "os-os", "os-ws"]})
    return run_scenario(cfg)


def test_csv_header():
    assert ",".join(CSV_HEADER) == (
        "workload,option,latency_s,interval_s,throughput_out_s,energy_j,edp,efficiency,"
        "throughput_norm,efficiency_norm"
    )


def test_csv_rows(report):
    lines = report_csv(report).splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 5
    os_line = next(line for line in lines if line.startswith("gpt2-block,os,"))
    assert os_line.endswith(",1.000000000,1.000000000")
    assert all(len(line.split(",")) == len(CSV_HEADER) for line in lines)


def test_empty_report_is_header_only():
    assert report_csv(NormalizedReport(config={})) == ",".join(CSV_HEADER) + "\n"


def test_number_formats():
    assert fmt_raw(0.000123456789012) == "0.000123456789"
    assert fmt_raw(None) == ""
    assert fmt_norm(1.0) == "1.000000000"
    assert fmt_norm(1.8345) == "1.834500000"


def test_json_round_trip(report, tmp_path):
    assert json.loads(report_json(report)) == report.to_dict()
    emit_reports(report, tmp_path / "r.json", tmp_path / "r.csv")
    assert load_report(tmp_path / "r.json") == report.to_dict()
    assert (tmp_path / "r.csv").read_text(encoding="utf-8") == report_csv(report)


def test_json_rows_carry_schedule_and_costs(report):
    row = json.loads(report_json(report))["rows"][2]
    assert row["option"] == "os-os"
    assert row["schedule"]["tree"]["type"] == "pipe"
    assert len(row["report"]["stages"]) == 2
    assert len(row["report"]["transfers"]) == 1
    assert set(row["report"]["stages"][0]["layer_costs"][0]) >= {"cycles", "latency_s", "e_total_j"}


def test_compare_same_report(report):
    lines = compare_csv(report.to_dict(), report.to_dict()).splitlines()
    assert lines[0] == "workload,option,throughput_ratio,efficiency_ratio,latency_ratio,energy_ratio"
    assert len(lines) == 5
    assert all(line.endswith(",1,1,1,1") for line in lines[1:])


def test_compare_only_shared_rows(report):
    other = report.to_dict()
    other["rows"] = other["rows"][:1]
    lines = compare_csv(report.to_dict(), other).splitlines()
    assert lines[1:] == ["gpt2-block,os,1,1,1,1"]


def test_markdown_and_html(report, tmp_path):
    text = generate_markdown_report(report)
    assert "| gpt2-block | os-os |" in text
    assert "2x2" in text
    save_html_report(report, tmp_path / "r.html")
    html = (tmp_path / "r.html").read_text(encoding="utf-8")
    assert "<table>" in html


def test_unwritable_path(report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ChipletSchedError, match="file"):
        emit_reports(report, csv_path=blocker / "out.csv")


def test_load_report_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ChipletSchedError, match="bad.json:1"):
        load_report(bad)
    with pytest.raises(ChipletSchedError, match="cannot read"):
        load_report(tmp_path / "missing.json")


def test_compare_missing_metric_names_report_and_field(report):
    broken = json.loads(report_json(report))
    del broken["rows"][2]["report"]["efficiency"]
    with pytest.raises(ChipletSchedError) as e:
        compare_csv(report.to_dict(), broken, ("base.json", "new.json"))
    msg = str(e.value)
    assert "new.json" in msg
    assert "gpt2-block/os-os" in msg
    assert "efficiency" in msg

"""
report.py
以表格形式输出数据摘要、预测消费、校准与分类结果

文本中的数值固定保留 6 位小数；CSV 与 JSON 同时给出 6 位小数值与全精度值（*_exact 列/键），
读回时使用全精度值。
JSON 导出格式:
    {
      "calibration": {"<variant>": {"zeta", "xi", "rho", "residuals": [3], "consistency_gap", ...}},
      "classifications": [ReportRow, ...]
    }
"""

import io
import json
import math
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Dict, List, Mapping, Optional

import pandas as pd
from tabulate import tabulate

from src.core.config import ChineseText, Defaults
from src.core.errors import EmptyReport, InvalidParameter, SchemaError

LABEL_TEXTS = (
    "Risk-averse",
    "Risk-loving",
    "Not enough risk-loving",
    "Not enough risk-averse",
    "Risk-neutral",
)

TABLE_HEADERS = [
    "Year",
    "Per Capita Real Consumption (in dollars)",
    "Certain Utility",
    "Uncertain Utility",
    "Utility Allocation",
    "Type of Investor",
    "CRRA",
]


class OutputFormat(Enum):
    TEXT = "text"
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True)
class ReportRow:
    """一行比较：决策年的确定效用与下一年的不确定效用"""

    investor: str
    year_certain: int
    year_uncertain: int
    variant: str
    consumption_certain: float
    consumption_uncertain: float
    certain_utility: float
    uncertain_utility: float
    allocation_text: str
    label_text: str
    rho: float

    NUMERIC = ("consumption_certain", "consumption_uncertain", "certain_utility", "uncertain_utility", "rho")

    def __post_init__(self):
        for name in self.NUMERIC:
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter(f"{name} 不是有限值")
        if self.label_text not in LABEL_TEXTS:
            raise InvalidParameter(f"未知的投资者类型标签: {self.label_text}")

    @property
    def uncertain_year_text(self) -> str:
        return f"{self.year_uncertain} ({self.variant})"


def build_row(investor, variant, dataset, cmp, attitude, rho) -> ReportRow:
    """由流水线结果构造报表行"""
    decision_year = dataset.final_year - 1
    return ReportRow(
        investor=investor.value,
        year_certain=decision_year,
        year_uncertain=dataset.final_year,
        variant=variant.value,
        consumption_certain=dataset.consumption_at(decision_year),
        consumption_uncertain=dataset.consumption_at(dataset.final_year),
        certain_utility=cmp.certain,
        uncertain_utility=cmp.uncertain,
        allocation_text=investor.allocation_text(attitude.allocation_sign),
        label_text=attitude.describe(),
        rho=rho,
    )


def _fmt(value: float) -> str:
    return f"{value:.{Defaults.DECIMALS}f}"


EXACT_COLUMNS = [f"{name}_exact" for name in ReportRow.NUMERIC]


def _row_record(row: ReportRow, exact_as_text: bool = False) -> dict:
    record = asdict(row)
    for name in ReportRow.NUMERIC:
        value = float(getattr(row, name))
        record[name] = _fmt(value)
        # repr 是最短的可逐位读回的写法
        record[f"{name}_exact"] = repr(value) if exact_as_text else value
    return record


def _calibration_record(result) -> dict:
    return {
        "zeta": round(result.zeta, Defaults.DECIMALS),
        "xi": round(result.xi, Defaults.DECIMALS),
        "rho": round(result.rho, Defaults.DECIMALS),
        "zeta_exact": result.zeta,
        "xi_exact": result.xi,
        "rho_exact": result.rho,
        "beta": result.beta,
        "residuals": list(result.residuals),
        "variance_form_residuals": list(result.variance_form_residuals),
        "consistency_gap": result.consistency_gap,
        "rho_sensitivity": result.rho_sensitivity,
        "condition_diagnostic": result.condition_diagnostic if math.isfinite(result.condition_diagnostic) else None,
        "method": result.method,
        "iterations": result.iterations,
        "warnings": list(result.warnings),
    }


def _text_table(rows: List[ReportRow]) -> str:
    """每个比较占两行：确定效用行与不确定效用行"""
    lines = []
    for row in rows:
        lines.append([f"{row.year_certain} (realized)", _fmt(row.consumption_certain), _fmt(row.certain_utility),
                      "", "", "", _fmt(row.rho)])
        lines.append([row.uncertain_year_text, _fmt(row.consumption_uncertain), "", _fmt(row.uncertain_utility),
                      row.allocation_text, row.label_text, ""])
    return tabulate(lines, headers=TABLE_HEADERS, tablefmt="simple", disable_numparse=True)


def render_table(rows: List[ReportRow], fmt: OutputFormat = OutputFormat.TEXT,
                 calibration: Optional[Mapping[str, object]] = None) -> bytes:
    """
    渲染分类表

    Args:
        rows: 报表行（可包含两类投资者，文本格式下按投资者分表）
        fmt: 输出格式
        calibration: 可选，版本名 → CalibrationResult，仅 JSON 输出

    Returns:
        bytes: UTF-8 编码的输出
    """
    if not rows:
        raise EmptyReport("没有可渲染的行")

    if fmt is OutputFormat.TEXT:
        titles = {"equity": ChineseText.TABLE_EQUITY, "riskfree": ChineseText.TABLE_RISKFREE}
        blocks = []
        for investor in dict.fromkeys(r.investor for r in rows):
            block_rows = [r for r in rows if r.investor == investor]
            blocks.append(f"{titles.get(investor, investor)}\n\n{_text_table(block_rows)}")
        return ("\n\n".join(blocks) + "\n").encode("utf-8")

    if fmt is OutputFormat.CSV:
        columns = [f.name for f in fields(ReportRow)] + EXACT_COLUMNS
        frame = pd.DataFrame([_row_record(r, exact_as_text=True) for r in rows], columns=columns)
        return frame.to_csv(index=False, lineterminator="\n").encode("utf-8")

    document = {
        "calibration": {name: _calibration_record(res) for name, res in (calibration or {}).items()},
        "classifications": [_row_record(r) for r in rows],
    }
    return (json.dumps(document, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def parse_table(payload: bytes, fmt: OutputFormat) -> List[ReportRow]:
    """把CSV或JSON输出读回报表行"""
    names = [f.name for f in fields(ReportRow)]

    if fmt is OutputFormat.CSV:
        frame = pd.read_csv(io.BytesIO(payload), dtype=str, keep_default_na=False)
        records = frame.to_dict(orient="records")
    elif fmt is OutputFormat.JSON:
        records = json.loads(payload.decode("utf-8"))["classifications"]
    else:
        raise InvalidParameter("文本格式不支持读回")

    rows = []
    for record in records:
        missing = set(names + EXACT_COLUMNS) - set(record)
        if missing:
            raise SchemaError(f"缺少列: {sorted(missing)}")
        values = {name: record[name] for name in names}
        for name in ReportRow.NUMERIC:
            values[name] = record[f"{name}_exact"]
        for name in ("year_certain", "year_uncertain"):
            values[name] = int(values[name])
        for name in ReportRow.NUMERIC:
            values[name] = float(values[name])
        rows.append(ReportRow(**values))
    return rows


def render_calibration(results: Mapping[str, object], fmt: OutputFormat = OutputFormat.TEXT) -> bytes:
    """渲染校准结果（每个数据版本一列）"""
    if not results:
        raise EmptyReport("没有校准结果")

    if fmt is OutputFormat.JSON:
        document = {"calibration": {name: _calibration_record(res) for name, res in results.items()}}
        return (json.dumps(document, indent=2, ensure_ascii=False) + "\n").encode("utf-8")

    records = {name: _calibration_record(res) for name, res in results.items()}
    index = ["zeta", "xi", "rho", "residual_riskfree", "residual_equity", "residual_excess", "consistency_gap",
             "rho_sensitivity", "condition_diagnostic", "method"]
    table = {}
    for name, rec in records.items():
        cond = rec["condition_diagnostic"]
        table[name] = [
            _fmt(rec["zeta_exact"]), _fmt(rec["xi_exact"]), _fmt(rec["rho_exact"]),
            *[f"{r:.3e}" for r in rec["residuals"]],
            f"{rec['consistency_gap']:.6e}",
            f"{rec['rho_sensitivity']:.3e}",
            f"{cond:.3e}" if cond is not None else "inf",
            rec["method"],
        ]

    if fmt is OutputFormat.CSV:
        frame = pd.DataFrame(table, index=index)
        frame.index.name = "quantity"
        return frame.to_csv(lineterminator="\n").encode("utf-8")

    betas = {rec["beta"] for rec in records.values()}
    title = ChineseText.CALIBRATION_TITLE.format(variant=", ".join(records), beta=", ".join(f"{b:g}" for b in sorted(betas)))
    body = tabulate([[q, *[table[n][i] for n in table]] for i, q in enumerate(index)],
                    headers=["", *table], tablefmt="simple", disable_numparse=True)
    return f"{title}\n\n{body}\n".encode("utf-8")


def render_projection(p, value: float, fmt: OutputFormat = OutputFormat.TEXT) -> bytes:
    """预测输入：人口、名义消费、平减指数与人均实际消费"""
    record = {
        "population": int(p.population) if float(p.population).is_integer() else p.population,
        "nondurables_bn": p.nominal_nondurables,
        "services_bn": p.nominal_services,
        "nondurables_and_services_bn": round(p.nominal_total, Defaults.DECIMALS),
        "gnp_deflator": p.gnp_deflator,
        "per_capita_real_consumption": _fmt(value),
    }
    if fmt is OutputFormat.JSON:
        record["per_capita_real_consumption_exact"] = value
        return (json.dumps({"projection": record}, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt is OutputFormat.CSV:
        return pd.DataFrame([record]).to_csv(index=False, lineterminator="\n").encode("utf-8")
    return (tabulate([list(record.values())], headers=list(record), tablefmt="simple", disable_numparse=True) + "\n").encode("utf-8")


def render_summary(dataset, moments, gap: float, projection_value: Optional[float] = None,
                   fmt: OutputFormat = OutputFormat.TEXT) -> bytes:
    """数据集校验摘要"""
    record: Dict[str, object] = {
        "years": dataset.span,
        "start_year": dataset.start_year,
        "end_year": dataset.final_year,
        "mean_x": moments.mean_x,
        "std_x": moments.std_x,
        "mu_x": moments.mu_x,
        "sigma2_x": moments.sigma2_x,
        "mu_z": moments.mu_z,
        "sigma2_z": moments.sigma2_z,
        "mean_re": moments.mean_re,
        "mean_rf": moments.mean_rf,
        "sigma_xe": moments.sigma_xe,
        "consistency_gap": gap,
    }
    if projection_value is not None:
        record["projected_consumption"] = projection_value

    if fmt is OutputFormat.JSON:
        return (json.dumps({"dataset": record}, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt is OutputFormat.CSV:
        return pd.DataFrame([record]).to_csv(index=False, lineterminator="\n").encode("utf-8")

    text = ChineseText
    lines = [
        text.INGEST_SUMMARY.format(n=dataset.span, start=dataset.start_year, end=dataset.final_year),
        text.INGEST_GROWTH.format(mean=moments.mean_x, std=moments.std_x),
        text.INGEST_LOG_GROWTH.format(mu=moments.mu_x, s2=moments.sigma2_x),
        text.INGEST_LEVELS.format(mu=moments.mu_z, s2=moments.sigma2_z),
        text.INGEST_RETURNS.format(re=moments.mean_re, rf=moments.mean_rf),
        text.INGEST_GAP.format(gap=gap),
    ]
    if projection_value is not None:
        lines.append(text.INGEST_PROJECTION.format(value=projection_value))
    return ("\n".join(lines) + "\n").encode("utf-8")

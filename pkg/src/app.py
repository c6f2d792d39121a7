"""
app.py
命令行入口：数据集 → 统计量 → 校准 → 分类 → 报表

    python main.py ingest    [--dataset PATH] [--projection PATH] [--format text|csv|json]
    python main.py calibrate [--variant realized|projected|both] [--beta F]
    python main.py classify  [--group one|two] [--investor equity|riskfree|both] [--eta F] [--rho F] [--tol F]

stdout 只输出报表，日志与错误信息写到 stderr。
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

from dotenv import load_dotenv
from loguru import logger

from src.algorithms.calibration import CalibrationResult, solve_system
from src.algorithms.classify import DefinitionGroup, InvestorType, classify_pipeline
from src.algorithms.moments import SampleMoments, compute_moments, consistency_gap
from src.core.config import ChineseText, DataFiles, Defaults, load_config_file, pick
from src.core.dataset import (
    DatasetVariant,
    MarketDataset,
    build_variants,
    load_dataset,
    load_projection,
    projected_consumption,
)
from src.core.errors import InputError, InvalidParameter, RiskAttitudeError
from src.core.log import setup_logging
from src.core.resources import get_resource_path
from src.utils.help_module import HelpModule
from src.utils.report import (
    OutputFormat,
    build_row,
    render_calibration,
    render_projection,
    render_summary,
    render_table,
)

VARIANT_CHOICES = {
    "realized": (DatasetVariant.REALIZED,),
    "projected": (DatasetVariant.PROJECTED,),
    "both": (DatasetVariant.REALIZED, DatasetVariant.PROJECTED),
}

INVESTOR_CHOICES = {
    "equity": (InvestorType.EQUITY,),
    "riskfree": (InvestorType.RISK_FREE,),
    "both": (InvestorType.EQUITY, InvestorType.RISK_FREE),
}


# ==================== 运行配置 ====================
@dataclass(frozen=True)
class RunConfig:
    """一次运行的全部参数"""

    dataset_path: str
    projection_path: Optional[str] = None
    beta: float = Defaults.BETA
    group: DefinitionGroup = DefinitionGroup.TWO
    tolerance: float = Defaults.TOLERANCE
    variant: str = "both"
    investor: str = "both"
    eta: Optional[float] = None
    rho: Optional[float] = None
    output_format: OutputFormat = OutputFormat.TEXT

    def validate(self) -> "RunConfig":
        if not 0 < self.beta <= 1:
            raise InvalidParameter(f"β 必须在 (0, 1] 内: {self.beta}")
        if not self.tolerance >= 0:
            raise InvalidParameter(f"容差不能为负: {self.tolerance}")
        if self.variant not in VARIANT_CHOICES:
            raise InvalidParameter(f"未知的数据版本: {self.variant}")
        if self.investor not in INVESTOR_CHOICES:
            raise InvalidParameter(f"未知的投资者类型: {self.investor}")
        if self.eta is not None and not self.eta > 0:
            raise InvalidParameter(f"η 必须为正: {self.eta}")
        if self.rho is not None and not self.rho >= 0:
            raise InvalidParameter(f"ρ 必须 ≥ 0: {self.rho}")
        return self

    @property
    def variants(self):
        return VARIANT_CHOICES[self.variant]

    @property
    def investors(self):
        return INVESTOR_CHOICES[self.investor]


def _as_float(name, value):
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError) as e:
        raise InvalidParameter(f"{name} 不是数值: {value!r}") from e


def _as_enum(enum_type, name, value):
    try:
        return enum_type(value)
    except ValueError as e:
        raise InvalidParameter(f"{name} 取值无效: {value!r}") from e


def resolve_run_config(args: argparse.Namespace, env: Mapping[str, str]) -> RunConfig:
    """
    合并命令行参数、配置文件、环境变量与默认值

    优先级: 命令行参数 > 配置文件 > 环境变量 (RAC_DATASET) > 默认值
    """
    flags = vars(args)
    file_config = load_config_file(flags.get("config"))

    dataset_path = pick("dataset", flags, file_config,
                        default=get_resource_path(DataFiles.REFERENCE_DATASET),
                        env_value=env.get(DataFiles.DATASET_ENV))
    projection_path = pick("projection", flags, file_config,
                           default=get_resource_path(DataFiles.REFERENCE_PROJECTION))

    config = RunConfig(
        dataset_path=str(dataset_path),
        projection_path=str(projection_path) if projection_path else None,
        beta=_as_float("beta", pick("beta", flags, file_config, Defaults.BETA)),
        group=_as_enum(DefinitionGroup, "group", pick("group", flags, file_config, DefinitionGroup.TWO.value)),
        tolerance=_as_float("tol", pick("tol", flags, file_config, Defaults.TOLERANCE)),
        variant=str(pick("variant", flags, file_config, "both")),
        investor=str(pick("investor", flags, file_config, "both")),
        eta=_as_float("eta", pick("eta", flags, file_config)),
        rho=_as_float("rho", pick("rho", flags, file_config)),
        output_format=_as_enum(OutputFormat, "format", pick("format", flags, file_config, OutputFormat.TEXT.value)),
    )
    return config.validate()


# ==================== 数据准备 ====================
def _require_file(path: str, what: str) -> str:
    if not os.path.isfile(path):
        raise InputError(f"{what}不存在: {path}")
    return path


def _load_inputs(config: RunConfig, need_projection: bool):
    dataset = load_dataset(_require_file(config.dataset_path, "数据集文件"))
    projection = None
    if need_projection and config.projection_path:
        projection = load_projection(_require_file(config.projection_path, "预测文件"))
    return dataset, projection


def _prepare_variants(config: RunConfig) -> Dict[DatasetVariant, MarketDataset]:
    need_projection = DatasetVariant.PROJECTED in config.variants
    dataset, projection = _load_inputs(config, need_projection)
    if need_projection and projection is None:
        raise InputError("projected 版本需要预测文件 (--projection)")

    variants = build_variants(dataset, projection)
    return {v: variants[v] for v in config.variants}


def _run_variants(variants: Dict[DatasetVariant, MarketDataset], task) -> List:
    """各版本并行计算，结果按 realized, projected 的固定顺序返回"""
    if len(variants) == 1:
        return [task(v, d) for v, d in variants.items()]

    with ThreadPoolExecutor(max_workers=len(variants)) as pool:
        futures = [pool.submit(task, v, d) for v, d in variants.items()]
        return [f.result() for f in futures]


def _emit(payload: bytes) -> None:
    sys.stdout.write(payload.decode("utf-8"))
    sys.stdout.flush()


# ==================== 命令 ====================
def cmd_ingest(config: RunConfig) -> int:
    """校验数据集并输出统计摘要"""
    dataset, projection = _load_inputs(config, need_projection=True)
    moments = compute_moments(dataset)
    value = projected_consumption(projection) if projection is not None else None

    _emit(render_summary(dataset, moments, consistency_gap(moments), value, config.output_format))
    if projection is not None and config.output_format is OutputFormat.TEXT:
        _emit(b"\n" + render_projection(projection, value, config.output_format))
    return 0


def _calibrate_variant(config: RunConfig):
    def task(variant: DatasetVariant, dataset: MarketDataset):
        logger.info(f"校准 {variant.value} 版本 (β = {config.beta})")
        moments = compute_moments(dataset)
        return variant, moments, solve_system(config.beta, moments)

    return task


def cmd_calibrate(config: RunConfig) -> int:
    """求解 (ζ, ξ, ρ) 并输出"""
    outcomes = _run_variants(_prepare_variants(config), _calibrate_variant(config))
    results = {variant.value: result for variant, _, result in outcomes}
    _emit(render_calibration(results, config.output_format))
    return 0


def cmd_classify(config: RunConfig) -> int:
    """计算确定/不确定效用并输出投资者类型表"""
    need_calibration = config.eta is None or config.rho is None

    def task(variant: DatasetVariant, dataset: MarketDataset):
        moments: SampleMoments = compute_moments(dataset)
        result: Optional[CalibrationResult] = solve_system(config.beta, moments) if need_calibration else None
        rho = config.rho if config.rho is not None else result.rho

        rows = {}
        for investor in config.investors:
            eta = config.eta if config.eta is not None else investor.eta_from(result)
            cmp, attitude = classify_pipeline(dataset, eta, rho, config.beta, config.group,
                                              config.tolerance, moments=moments)
            rows[investor] = build_row(investor, variant, dataset, cmp, attitude, rho)
        return variant, result, rows

    outcomes = _run_variants(_prepare_variants(config), task)

    # 按投资者分表，每张表内 realized 在前
    ordered = [rows[investor] for investor in config.investors for _, _, rows in outcomes]
    calibration = {variant.value: result for variant, result, _ in outcomes if result is not None}
    _emit(render_table(ordered, config.output_format, calibration))
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "calibrate": cmd_calibrate,
    "classify": cmd_classify,
}


# ==================== 参数解析 ====================
class _Parser(argparse.ArgumentParser):
    """参数错误按输入错误处理（退出码 1）"""

    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    text = ChineseText
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dataset", help=text.HELP_DATASET)
    common.add_argument("--projection", help=text.HELP_PROJECTION)
    common.add_argument("--config", help=text.HELP_CONFIG)
    common.add_argument("--beta", type=float, help=text.HELP_BETA)
    common.add_argument("--group", choices=[g.value for g in DefinitionGroup], help=text.HELP_GROUP)
    common.add_argument("--tol", type=float, help=text.HELP_TOL)
    common.add_argument("--variant", choices=list(VARIANT_CHOICES), help=text.HELP_VARIANT)
    common.add_argument("--investor", choices=list(INVESTOR_CHOICES), help=text.HELP_INVESTOR)
    common.add_argument("--eta", type=float, help=text.HELP_ETA)
    common.add_argument("--rho", type=float, help=text.HELP_RHO)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], help=text.HELP_FORMAT)
    common.add_argument("--verbose", action="store_true", help=text.HELP_VERBOSE)

    parser = _Parser(prog="main.py", description=text.PROG_DESCRIPTION, epilog=HelpModule().epilog(),
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("ingest", parents=[common], help=text.CMD_INGEST)
    sub.add_parser("calibrate", parents=[common], help=text.CMD_CALIBRATE)
    sub.add_parser("classify", parents=[common], help=text.CMD_CLASSIFY)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    运行命令行

    Returns:
        int: 退出码 (0 成功, 1 输入错误, 2 数值/分类错误)
    """
    helper = HelpModule()
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.verbose)
        load_dotenv()
        config = resolve_run_config(args, os.environ)
        return COMMANDS[args.command](config)
    except RiskAttitudeError as e:
        logger.debug(f"❌ {type(e).__name__}: {e} {e.context or ''}")
        print(helper.explain(e), file=sys.stderr)
        return e.exit_code
    except SystemExit as e:
        # --help
        return int(e.code or 0)

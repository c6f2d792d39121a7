import sys

from loguru import logger

LOG_FORMAT = "<green>{time:HH:mm:ss}</green> | {level: <7} | {message}"


def setup_logging(verbose: bool = False) -> None:
    """配置日志输出到 stderr，stdout 只留给报表"""
    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level="DEBUG" if verbose else "INFO")

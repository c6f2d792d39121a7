"""
核心模块包
"""
from .config import ChineseText, DataFiles, Defaults
from .dataset import DatasetVariant, MarketDataset, load_dataset, load_reference_dataset
from .errors import RiskAttitudeError

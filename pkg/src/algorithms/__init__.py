"""
算法模块包
"""
from .moments import SampleMoments, compute_moments, consistency_gap, lognormal_moment
from .utility import UtilitySpec, crra_utility, uncertain_utility
from .calibration import CalibrationResult, solve_system, system_residuals
from .classify import DefinitionGroup, InvestorType, classify, classify_pipeline

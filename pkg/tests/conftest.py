import math

import pytest

from src.algorithms.moments import SampleMoments, compute_moments
from src.core.dataset import (
    DatasetVariant,
    build_variants,
    load_reference_dataset,
    load_reference_projection,
)

HEADER = "year,consumption_per_capita,equity_gross_return,riskfree_gross_return"


@pytest.fixture(scope="session")
def reference_dataset():
    return load_reference_dataset()


@pytest.fixture(scope="session")
def reference_projection():
    return load_reference_projection()


@pytest.fixture(scope="session")
def variants(reference_dataset, reference_projection):
    return build_variants(reference_dataset, reference_projection)


@pytest.fixture(scope="session")
def realized_moments(variants):
    return compute_moments(variants[DatasetVariant.REALIZED])


@pytest.fixture(scope="session")
def projected_moments(variants):
    return compute_moments(variants[DatasetVariant.PROJECTED])


@pytest.fixture
def make_moments():
    """合成统计量；gap 为一致性缺口，excess 为 σ_xe - σ_x²"""

    def build(mu_x=0.018, sigma2_x=0.0013, gap=0.0, excess=0.0, mean_re=1.07, mean_rf=1.008,
              mu_z=7.3, sigma2_z=0.17):
        mean_x = math.exp(mu_x + 0.5 * sigma2_x + gap)
        return SampleMoments.from_values(mu_x=mu_x, sigma2_x=sigma2_x, mean_x=mean_x, mean_re=mean_re,
                                         mean_rf=mean_rf, mu_z=mu_z, sigma2_z=sigma2_z,
                                         sigma_xe=sigma2_x + excess)

    return build


@pytest.fixture
def write_dataset(tmp_path):
    """把 (year, c, re, rf) 行写成CSV，返回路径"""

    def write(rows, name="dataset.csv", header=HEADER):
        path = tmp_path / name
        lines = [header] + [",".join(str(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def degenerate_dataset(write_dataset):
    """消费每年翻倍：对数增长方差为 0，一致性缺口恰为 0"""
    rows = [(2000 + i, 100 * 2 ** i, 1.05, 1.01) for i in range(5)]
    return write_dataset(rows, name="degenerate.csv")

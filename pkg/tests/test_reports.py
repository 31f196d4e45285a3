import math

import pytest
from pydantic import ValidationError

from sipdg.models.domain.reports import ConvergenceRow, ConvergenceTable, ExtremaReport, MeshMetrics


def _row(level, h, linf, rate=None, subdomain=None):
    return ConvergenceRow(level=level, h=h, dofs=24 * 4 ** level, linf_error=linf, l2_error=linf / 2,
                          broken_h1_error=math.sqrt(linf), rate_linf=rate, linf_boundary_error=linf,
                          linf_subdomain=subdomain)


@pytest.fixture
def table():
    hs = [0.4, 0.2, 0.1, 0.05]
    rows = [_row(k, h, h ** 2, None if k == 0 else 2.0) for k, h in enumerate(hs)]
    return ConvergenceTable(domain="square", r=1, sigma=10.0, problem="manufactured", rows=rows)


class TestExtremaReport:

    def test_gap(self):
        report = ExtremaReport(domain="square", h=0.15, r=1, sigma=10.0, min_omega=-1.02, min_boundary=-1.0,
                               max_omega=1.01, max_boundary=1.01)
        assert report.extrema_gap() == pytest.approx(0.02)
        assert report.within_sanity_window()

    def test_sanity_window(self):
        report = ExtremaReport(domain="square", h=0.15, r=1, sigma=10.0, min_omega=-3.0, min_boundary=-3.0,
                               max_omega=1.0, max_boundary=1.0)
        assert not report.within_sanity_window()

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            ExtremaReport(domain="square", h=0.15, r=1, sigma=10.0, min_omega=float("nan"), min_boundary=0.0,
                          max_omega=1.0, max_boundary=1.0)

    def test_frozen(self):
        report = ExtremaReport(domain="lshape", h=0.1, r=2, sigma=40.0, min_omega=-1.0, min_boundary=-1.0,
                               max_omega=1.0, max_boundary=1.0)
        with pytest.raises(ValidationError):
            report.r = 1


class TestConvergenceTable:

    def test_column(self, table):
        assert table.column("linf_error") == pytest.approx([0.16, 0.04, 0.01, 0.0025])

    def test_unpopulated_column(self, table):
        with pytest.raises(ValueError):
            table.column("linf_subdomain")

    def test_asymptotic_rate(self, table):
        assert table.asymptotic_rate("linf_error") == pytest.approx(2.0, abs=1e-12)
        assert table.asymptotic_rate("l2_error") == pytest.approx(2.0, abs=1e-12)
        assert table.asymptotic_rate("broken_h1_error") == pytest.approx(1.0, abs=1e-12)

    def test_finite_rates(self, table):
        assert table.has_finite_rates()


def test_mesh_metrics_validation():
    with pytest.raises(ValidationError):
        MeshMetrics(h=0.0, max_shape_ratio=2.4, quasi_uniformity=1.0)

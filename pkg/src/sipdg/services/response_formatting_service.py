"""Response formatting service: CSV files, plot data and console tables.

Reports are flattened into pandas DataFrames with a fixed column schema, so
the CSV written for a run depends only on its numbers. Timings never enter
these files.
"""
from typing import List, Sequence, Union

import numpy as np
import pandas as pd

from sipdg.models.domain.rate_estimation import asymptotic_rate
from sipdg.models.domain.reports import ConvergenceTable, ExtremaReport
from sipdg.utils.logging import get_logger
from sipdg.utils.validation import validate_output_path

EXTREMA_COLUMNS = ["domain", "h", "r", "sigma", "min_omega", "min_boundary", "max_omega", "max_boundary"]
CONVERGENCE_COLUMNS = ["level", "h", "dofs", "linf", "l2", "brokenH1", "rate_linf"]
INTERIOR_COLUMNS = CONVERGENCE_COLUMNS + ["linf_subdomain", "rate_subdomain"]

_TABLE_FIELDS = {
    "level": "level",
    "h": "h",
    "dofs": "dofs",
    "linf": "linf_error",
    "l2": "l2_error",
    "brokenH1": "broken_h1_error",
    "rate_linf": "rate_linf",
    "linf_subdomain": "linf_subdomain",
    "rate_subdomain": "rate_subdomain",
}

Reportable = Union[ExtremaReport, Sequence[ExtremaReport], ConvergenceTable]


class ResponseFormattingService:
    """Turns experiment reports into CSV files, plot data and printable tables."""

    def __init__(self, float_format: str = "%.12e") -> None:
        self.float_format = float_format
        self.logger = get_logger(__name__)

    def extrema_frame(self, reports: Sequence[ExtremaReport]) -> pd.DataFrame:
        """One row per report with the extrema schema."""
        return pd.DataFrame([report.model_dump(include=set(EXTREMA_COLUMNS)) for report in reports],
                            columns=EXTREMA_COLUMNS)

    def convergence_frame(self, table: ConvergenceTable) -> pd.DataFrame:
        """Rows of the table; the subdomain columns appear only when populated."""
        columns = INTERIOR_COLUMNS if self._has_subdomain(table) else CONVERGENCE_COLUMNS
        data = {column: [getattr(row, _TABLE_FIELDS[column]) for row in table.rows] for column in columns}
        frame = pd.DataFrame(data, columns=columns)
        for column in columns:
            if column.startswith("rate") or column == "linf_subdomain":
                frame[column] = pd.to_numeric(frame[column], errors="coerce").astype(float)
        return frame

    @staticmethod
    def _has_subdomain(table: ConvergenceTable) -> bool:
        return any(row.linf_subdomain is not None for row in table.rows)

    def _to_frame(self, data: Reportable) -> pd.DataFrame:
        if isinstance(data, ConvergenceTable):
            return self.convergence_frame(data)
        if isinstance(data, ExtremaReport):
            return self.extrema_frame([data])
        return self.extrema_frame(list(data))

    def emit_csv(self, data: Reportable, path: str) -> None:
        """Write an extrema report (or several) or a convergence table as CSV.

        Raises:
            ValidationError: The path cannot be written
        """
        validate_output_path(path).raise_if_invalid()
        frame = self._to_frame(data)
        frame.to_csv(path, index=False, float_format=self.float_format, na_rep="", lineterminator="\n")
        self.logger.info("Wrote CSV", context={"path": path, "rows": len(frame)})

    def plot_data(self, table: ConvergenceTable, column: str = "linf_error", last: int = 3) -> tuple[pd.DataFrame, float]:
        """(log10 h, log10 error) pairs and the least-squares slope over the last rows."""
        hs = [row.h for row in table.rows]
        errors = table.column(column)
        floor = np.finfo(float).tiny
        frame = pd.DataFrame({
            "log10_h": np.log10(np.asarray(hs, dtype=float)),
            "log10_error": np.log10(np.maximum(np.asarray(errors, dtype=float), floor)),
        })
        return frame, asymptotic_rate(hs, errors, last=min(last, len(hs)))

    def emit_plotdata(self, table: ConvergenceTable, path: str, column: str = "linf_error") -> float:
        """Write plot data followed by a ``# slope=<value>`` line.

        Returns:
            The fitted slope
        """
        validate_output_path(path).raise_if_invalid()
        frame, slope = self.plot_data(table, column)
        text = frame.to_csv(index=False, float_format=self.float_format, lineterminator="\n")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
            handle.write(f"# slope={slope!r}\n")
        self.logger.info("Wrote plot data", context={"path": path, "rows": len(frame), "slope": slope})
        return slope

    def format_table(self, data: Reportable) -> str:
        """Console rendering of a report or table."""
        frame = self._to_frame(data)
        return frame.to_string(index=False, na_rep="-", float_format=lambda value: f"{value:.6e}")

    def format_summary(self, table: ConvergenceTable) -> List[str]:
        """Lines with the asymptotic rates of every populated error column."""
        lines = []
        if len(table.rows) >= 3:
            for label, column in (("linf", "linf_error"), ("l2", "l2_error"), ("brokenH1", "broken_h1_error"),
                                  ("linf_boundary", "linf_boundary_error")):
                lines.append(f"asymptotic rate {label}: {table.asymptotic_rate(column):.4f}")
            if self._has_subdomain(table):
                lines.append(f"asymptotic rate linf_subdomain: {table.asymptotic_rate('linf_subdomain'):.4f}")
        return lines

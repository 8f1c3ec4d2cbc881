"""Structured run reports: one dataclass, lossless JSON, flat CSV.

Every CLI run produces a SensitivityReport.  JSON serialization preserves
every numeric field exactly (Python float round-trips through json's repr
formatting), so reruns can be compared bit-for-bit once timings are set
aside.  CSV emission flattens whichever section the run produced: per-row
estimates, an alpha sweep, a benchmark table, or a one-line summary.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field


@dataclass
class SensitivityReport:
    input_path: str
    n: int
    d: int
    p: float
    method: str
    seed: int
    config: dict = field(default_factory=dict)
    per_row: list | None = None
    total: float | None = None
    max_value: float | None = None
    oracle_per_row: list | None = None
    oracle_total: float | None = None
    oracle_max: float | None = None
    metrics: dict | None = None
    alpha_series: list | None = None
    bench_table: list | None = None
    values: list | None = None  # reduction outputs and other small vectors
    notes: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SensitivityReport":
        return cls(**json.loads(text))

    def to_csv(self) -> str:
        """Flatten the most specific populated section to CSV text."""
        if self.bench_table is not None:
            cols = [
                "p",
                "total_upper_bound",
                "brute_force",
                "approximation",
                "brute_runtime_s",
                "approx_runtime_s",
            ]
            lines = [",".join(cols)]
            for row in self.bench_table:
                lines.append(",".join(_fmt(row[c]) for c in cols))
            return "\n".join(lines) + "\n"
        if self.alpha_series is not None:
            cols = ["alpha", "mean_abs_log_ratio", "max_abs_log_ratio"]
            lines = [",".join(cols)]
            for row in self.alpha_series:
                lines.append(",".join(_fmt(row[c]) for c in cols))
            return "\n".join(lines) + "\n"
        if self.per_row is not None:
            has_oracle = self.oracle_per_row is not None
            header = "row,estimate" + (",oracle" if has_oracle else "")
            lines = [header]
            for i, v in enumerate(self.per_row):
                line = f"{i},{_fmt(v)}"
                if has_oracle:
                    line += f",{_fmt(self.oracle_per_row[i])}"
                lines.append(line)
            return "\n".join(lines) + "\n"
        if self.values is not None:
            lines = ["index,value"]
            for i, v in enumerate(self.values):
                lines.append(f"{i},{_fmt(v)}")
            return "\n".join(lines) + "\n"
        lines = ["field,value"]
        if self.total is not None:
            lines.append(f"total,{_fmt(self.total)}")
        if self.max_value is not None:
            lines.append(f"max,{_fmt(self.max_value)}")
        if self.oracle_total is not None:
            lines.append(f"oracle_total,{_fmt(self.oracle_total)}")
        if self.oracle_max is not None:
            lines.append(f"oracle_max,{_fmt(self.oracle_max)}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)

from __future__ import annotations

import csv
import io
from pathlib import Path
import threading
from typing import Iterable

from vembench.schemas import RESULT_COLUMNS, BenchResultRow


class CsvResultCollector:
    """Thread-safe row sink; rows keep arrival order and are written with the frozen column set."""

    def __init__(self) -> None:
        self._rows: list[BenchResultRow] = []
        self._lock = threading.Lock()

    def append(self, row: BenchResultRow) -> None:
        with self._lock:
            self._rows.append(row)

    def extend(self, rows: Iterable[BenchResultRow]) -> None:
        rows = list(rows)
        with self._lock:
            self._rows.extend(rows)

    @property
    def rows(self) -> list[BenchResultRow]:
        with self._lock:
            return list(self._rows)

    @property
    def any_diverged(self) -> bool:
        return any(row.diverged for row in self.rows)

    def render(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(RESULT_COLUMNS), lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row.to_csv_record())
        return buffer.getvalue()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.render(), encoding="utf-8")


def read_results(path: str | Path) -> list[BenchResultRow]:
    rows = []
    with Path(path).open(encoding="utf-8", newline="") as handle:
        for record in csv.DictReader(handle):
            values = {key: (value if value != "" else None) for key, value in record.items()}
            values["diverged"] = values.get("diverged") == "1"
            rows.append(BenchResultRow.model_validate(values))
    return rows

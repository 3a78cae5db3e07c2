"""Survey CSV ingestion.

Schema: ``participant,group,phase,instrument,item1..item6``. Instruments
carry a fixed item count; satisfaction rows leave the trailing item cells
blank. All violations raise SchemaError with the row and column named.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

INSTRUMENT_SELF_EFFICACY = "self-efficacy"
INSTRUMENT_NASA_TLX = "nasa-tlx"
INSTRUMENT_SATISFACTION = "satisfaction"

INSTRUMENT_ITEMS = {
    INSTRUMENT_SELF_EFFICACY: 6,
    INSTRUMENT_NASA_TLX: 6,
    INSTRUMENT_SATISFACTION: 4,
}

# Which phases each instrument is administered in.
INSTRUMENT_PHASES = {
    INSTRUMENT_SELF_EFFICACY: ("pre", "post"),
    INSTRUMENT_NASA_TLX: ("post-only",),
    INSTRUMENT_SATISFACTION: ("post-only",),
}

# 5-point Likert instruments; NASA-TLX scores are only required nonnegative.
LIKERT_INSTRUMENTS = (INSTRUMENT_SELF_EFFICACY, INSTRUMENT_SATISFACTION)
LIKERT_MIN, LIKERT_MAX = 1, 5

GROUPS = ("control", "experimental")

MAX_ITEMS = max(INSTRUMENT_ITEMS.values())
HEADER = ["participant", "group", "phase", "instrument"] + [
    f"item{i}" for i in range(1, MAX_ITEMS + 1)
]


class SchemaError(ValueError):
    def __init__(self, row: int, column: str, reason: str):
        super().__init__(f"row {row}, column {column!r}: {reason}")
        self.row = row
        self.column = column


@dataclass(frozen=True)
class SurveyResponse:
    participant_id: str
    group: str
    phase: str
    instrument: str
    scores: tuple[int, ...]


def _parse_row(row: dict[str, str], row_number: int) -> SurveyResponse:
    participant = (row.get("participant") or "").strip()
    if not participant:
        raise SchemaError(row_number, "participant", "must not be empty")
    group = (row.get("group") or "").strip()
    if group not in GROUPS:
        raise SchemaError(row_number, "group", f"must be one of {GROUPS}, got {group!r}")
    instrument = (row.get("instrument") or "").strip()
    if instrument not in INSTRUMENT_ITEMS:
        raise SchemaError(
            row_number, "instrument", f"must be one of {tuple(INSTRUMENT_ITEMS)}, got {instrument!r}"
        )
    phase = (row.get("phase") or "").strip()
    if phase not in INSTRUMENT_PHASES[instrument]:
        raise SchemaError(
            row_number,
            "phase",
            f"{instrument} allows phases {INSTRUMENT_PHASES[instrument]}, got {phase!r}",
        )
    expected = INSTRUMENT_ITEMS[instrument]
    scores = []
    for i in range(1, MAX_ITEMS + 1):
        column = f"item{i}"
        cell = (row.get(column) or "").strip()
        if i <= expected:
            try:
                value = int(cell)
            except ValueError:
                raise SchemaError(row_number, column, f"expected an integer, got {cell!r}") from None
            if instrument in LIKERT_INSTRUMENTS and not LIKERT_MIN <= value <= LIKERT_MAX:
                raise SchemaError(
                    row_number, column, f"Likert score must be in [{LIKERT_MIN}, {LIKERT_MAX}], got {value}"
                )
            if instrument == INSTRUMENT_NASA_TLX and value < 0:
                raise SchemaError(row_number, column, f"score must be nonnegative, got {value}")
            scores.append(value)
        elif cell:
            raise SchemaError(
                row_number, column, f"{instrument} has only {expected} items; cell must be blank"
            )
    return SurveyResponse(participant, group, phase, instrument, tuple(scores))


def load_survey_csv(path: str | Path) -> list[SurveyResponse]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise SchemaError(1, "header", "file is empty")
        missing = [c for c in HEADER if c not in reader.fieldnames]
        if missing:
            raise SchemaError(1, missing[0], "missing column")
        responses = [_parse_row(row, i) for i, row in enumerate(reader, start=2)]
    if not responses:
        raise SchemaError(2, "participant", "no data rows")
    return responses


def write_survey_csv(path: str | Path, responses: Iterable[SurveyResponse]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(HEADER)
        for r in responses:
            padded = list(r.scores) + [""] * (MAX_ITEMS - len(r.scores))
            writer.writerow([r.participant_id, r.group, r.phase, r.instrument, *padded])

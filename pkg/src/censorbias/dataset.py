"""Survival-data model, CSV ingestion and emission, bundled clinical datasets.

The canonical record is (time, status, group): follow-up time in the
dataset's native units, status 1 for an observed event and 0 for a censored
observation, and a free-text group label. Every other module consumes and
produces this shape; all per-dataset column renaming happens here at
ingestion and never downstream.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import DomainError, SchemaError

__all__ = [
    "SurvivalRecord",
    "SurvivalDataset",
    "DatasetMapping",
    "BuiltinDataset",
    "BUILTIN_DATASETS",
    "read_csv",
    "write_csv",
    "clinical_preprocess",
    "concat",
]


@dataclass(frozen=True)
class SurvivalRecord:
    time: float
    status: int
    group: str


class SurvivalDataset:
    """Immutable ordered collection of survival records.

    Vector access is the primary interface (``times``, ``statuses``,
    ``groups`` are parallel arrays); ``records`` materializes row objects
    when per-record access reads better.
    """

    __slots__ = ("times", "statuses", "groups", "name")

    def __init__(self, times, statuses, groups, name: str = ""):
        times = np.array(times, dtype=float)
        raw_statuses = np.asarray(statuses)
        if isinstance(groups, str):
            groups = np.full(times.shape, groups, dtype=object)
        else:
            groups = np.array(groups, dtype=object)
        if times.ndim != 1 or times.size == 0:
            raise DomainError("a dataset needs at least one record")
        if raw_statuses.shape != times.shape or groups.shape != times.shape:
            raise DomainError("times, statuses and groups must have equal length")
        if not np.all(np.isfinite(times)) or np.any(times < 0):
            raise DomainError("times must be finite and non-negative")
        if not np.all((raw_statuses == 0) | (raw_statuses == 1)):
            raise DomainError("statuses must be 0 (censored) or 1 (event)")
        statuses = raw_statuses.astype(np.int8)
        times.setflags(write=False)
        statuses.setflags(write=False)
        groups.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "statuses", statuses)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "name", name)

    def __setattr__(self, key, value):
        raise AttributeError("SurvivalDataset is immutable")

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, SurvivalDataset):
            return NotImplemented
        return (self.name == other.name
                and np.array_equal(self.times, other.times)
                and np.array_equal(self.statuses, other.statuses)
                and np.array_equal(self.groups, other.groups))

    def __repr__(self) -> str:
        return (f"SurvivalDataset(name={self.name!r}, n={len(self)}, "
                f"events={self.n_events})")

    @property
    def n(self) -> int:
        return self.times.size

    @property
    def n_events(self) -> int:
        return int(np.sum(self.statuses == 1))

    @property
    def p_censored(self) -> float:
        """Fraction of records that are censored."""
        return float(np.mean(self.statuses == 0))

    @property
    def event_times(self) -> np.ndarray:
        return self.times[self.statuses == 1]

    @property
    def censored_times(self) -> np.ndarray:
        return self.times[self.statuses == 0]

    @property
    def label(self) -> str:
        """The group label of the first record (shared by all records in
        generated datasets)."""
        return str(self.groups[0])

    @property
    def records(self) -> list[SurvivalRecord]:
        return [SurvivalRecord(float(t), int(s), str(g))
                for t, s, g in zip(self.times, self.statuses, self.groups)]

    def with_group(self, label: str, name: str | None = None) -> "SurvivalDataset":
        """Copy with every record's group set to ``label``."""
        return SurvivalDataset(self.times, self.statuses, label,
                               self.name if name is None else name)

    def renamed(self, name: str) -> "SurvivalDataset":
        return SurvivalDataset(self.times, self.statuses, self.groups, name)

    def sorted_by_time(self) -> "SurvivalDataset":
        """Records ordered by ascending time; ties keep their input order."""
        order = np.argsort(self.times, kind="stable")
        return SurvivalDataset(self.times[order], self.statuses[order],
                               self.groups[order], self.name)

    def subset(self, mask, name: str | None = None) -> "SurvivalDataset":
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            raise DomainError("subset selects no records")
        return SurvivalDataset(self.times[mask], self.statuses[mask],
                               self.groups[mask],
                               self.name if name is None else name)

    def split_by_group(self) -> dict[str, "SurvivalDataset"]:
        """One dataset per distinct group label, in first-appearance order."""
        out: dict[str, SurvivalDataset] = {}
        for g in self.groups:
            key = str(g)
            if key not in out:
                out[key] = self.subset(self.groups == g, name=key)
        return out


def concat(*datasets: SurvivalDataset, name: str = "") -> SurvivalDataset:
    """Stack datasets row-wise, keeping per-record group labels."""
    if not datasets:
        raise DomainError("concat needs at least one dataset")
    return SurvivalDataset(
        np.concatenate([d.times for d in datasets]),
        np.concatenate([d.statuses for d in datasets]),
        np.concatenate([d.groups for d in datasets]),
        name or datasets[0].name,
    )


@dataclass(frozen=True)
class DatasetMapping:
    """Column mapping applied by read_csv.

    ``event_value`` lists the status cell tokens that mean "event observed";
    everything else is censored. ``derived_time`` names a (stop, start)
    column pair whose difference becomes the time when the source has no
    single duration column.
    """

    time_column: str
    status_column: str
    event_value: str | tuple[str, ...] = "1"
    group_column: str | None = None
    derived_time: tuple[str, str] | None = None

    @property
    def event_tokens(self) -> frozenset:
        if isinstance(self.event_value, str):
            return frozenset({self.event_value})
        return frozenset(self.event_value)


def _parse_rows(reader, source: str, mapping: DatasetMapping,
                name: str) -> SurvivalDataset:
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{source}: empty file, expected a CSV header") from None
    header = [h.strip() for h in header]
    index = {h: i for i, h in enumerate(header)}

    needed = [mapping.status_column]
    if mapping.derived_time is not None:
        needed.extend(mapping.derived_time)
    else:
        needed.append(mapping.time_column)
    if mapping.group_column is not None:
        needed.append(mapping.group_column)
    missing = [c for c in needed if c not in index]
    if missing:
        raise SchemaError(f"{source}: missing column(s) {missing}, header has {header}")

    times: list[float] = []
    statuses: list[int] = []
    groups: list[str] = []
    tokens = mapping.event_tokens
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue

        def cell(column: str) -> str:
            try:
                return row[index[column]].strip()
            except IndexError:
                raise DomainError(f"{source}:{lineno}: short row, no {column!r} cell") from None

        if mapping.derived_time is not None:
            stop_raw, start_raw = cell(mapping.derived_time[0]), cell(mapping.derived_time[1])
            if not stop_raw or not start_raw:
                raise DomainError(f"{source}:{lineno}: missing time value")
            try:
                time = float(stop_raw) - float(start_raw)
            except ValueError:
                raise DomainError(f"{source}:{lineno}: non-numeric time "
                                  f"({stop_raw!r}, {start_raw!r})") from None
            if time < 0:
                raise DomainError(f"{source}:{lineno}: negative derived time {time}")
        else:
            raw = cell(mapping.time_column)
            if not raw:
                raise DomainError(f"{source}:{lineno}: missing time value")
            try:
                time = float(raw)
            except ValueError:
                raise DomainError(f"{source}:{lineno}: non-numeric time {raw!r}") from None
        status_raw = cell(mapping.status_column)
        if not status_raw:
            raise DomainError(f"{source}:{lineno}: missing status value")
        times.append(time)
        statuses.append(1 if status_raw in tokens else 0)
        groups.append(cell(mapping.group_column) if mapping.group_column else name)

    if not times:
        raise SchemaError(f"{source}: no data rows")
    return SurvivalDataset(times, statuses, groups, name)


def read_csv(path, mapping: DatasetMapping, name: str | None = None) -> SurvivalDataset:
    """Load a survival dataset from a headered, comma-delimited CSV file."""
    if name is None:
        name = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    with open(path, newline="", encoding="utf-8") as fh:
        return _parse_rows(csv.reader(fh), os.fspath(path), mapping, name)


def write_csv(data, path) -> None:
    """Write a dataset (columns time,status,x) or any object exposing its
    own ``write_csv`` to ``path``."""
    if not isinstance(data, SurvivalDataset):
        data.write_csv(path)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time", "status", "x"])
        for t, s, g in zip(data.times, data.statuses, data.groups):
            writer.writerow([repr(float(t)), int(s), str(g)])


@dataclass(frozen=True)
class BuiltinDataset:
    """A bundled clinical dataset: file, column mapping, display metadata.

    ``arms`` pairs each group value with the display name its per-arm row
    uses in the audit table.
    """

    key: str
    title: str
    reference: str
    mapping: DatasetMapping
    arms: tuple[tuple[str, str], ...] = ()


BUILTIN_DATASETS: dict[str, BuiltinDataset] = {
    b.key: b for b in [
        BuiltinDataset(
            key="aml",
            title="Acute Myelogenous Leukemia survival data",
            reference="Miller (1997)",
            mapping=DatasetMapping("time", "status", "1", group_column="x"),
        ),
        BuiltinDataset(
            key="bladder1",
            title="Bladder Cancer Recurrences - bladder1",
            reference="Wei, Lin and Weissfeld (1989)",
            # recurrence (1) and death of any cause (2, 3) are coded 1..3;
            # statuses 1 and 2 count as events, 0 and 3 as censored
            mapping=DatasetMapping("time", "status", ("1", "2"),
                                   group_column="treatment",
                                   derived_time=("stop", "start")),
            arms=(("placebo", "placebo"), ("pyridoxine", "pyridoxine"),
                  ("thiotepa", "thiotepa")),
        ),
        BuiltinDataset(
            key="bladder2",
            title="Bladder Cancer Recurrences - bladder2",
            reference="Wei, Lin and Weissfeld (1989)",
            mapping=DatasetMapping("time", "event", "1", group_column="rx",
                                   derived_time=("stop", "start")),
            arms=(("1", "rx1"), ("2", "rx2")),
        ),
        BuiltinDataset(
            key="lung",
            title="NCCTG Lung Cancer Data",
            reference="Loprinzi et al (1994)",
            # status is coded 1 = censored, 2 = dead
            mapping=DatasetMapping("time", "status", "2"),
        ),
        BuiltinDataset(
            key="colon",
            title="Chemotherapy for Stage B/C colon cancer",
            reference="Moertel et al (1990)",
            mapping=DatasetMapping("time", "status", "1", group_column="rx"),
            arms=(("Obs", "Observation"), ("Lev", "Levamisol"),
                  ("Lev+5FU", "Levamisol + 5FU")),
        ),
        BuiltinDataset(
            key="ovarian",
            title="Ovarian Cancer Survival Data",
            reference="Edmonson et al (1979)",
            mapping=DatasetMapping("futime", "fustat", "1", group_column="rx"),
            arms=(("1", "rx1"), ("2", "rx2")),
        ),
        BuiltinDataset(
            key="veteran",
            title="Veterans' Administration Lung Cancer Study",
            reference="Kalbfleisch and Prentice (1980)",
            mapping=DatasetMapping("time", "status", "1", group_column="trt"),
            arms=(("1", "standard"), ("2", "test")),
        ),
    ]
}


def clinical_preprocess(dataset_id: str) -> list[SurvivalDataset]:
    """Load a bundled clinical dataset and split it into audit units.

    Returns the overall dataset first (named by its display title), then one
    dataset per treatment arm in registry order.
    """
    try:
        spec = BUILTIN_DATASETS[dataset_id]
    except KeyError:
        raise DomainError(
            f"unknown dataset {dataset_id!r}, expected one of "
            f"{sorted(BUILTIN_DATASETS)}") from None
    resource = resources.files("censorbias").joinpath("data") / f"{spec.key}.csv"
    with resource.open("r", encoding="utf-8") as fh:
        overall = _parse_rows(csv.reader(fh), f"{spec.key}.csv", spec.mapping,
                              spec.title)
    out = [overall]
    for value, arm_name in spec.arms:
        out.append(overall.subset(overall.groups == value, name=arm_name))
    return out

"""Experiment design, synthetic observers and CSV file formats.

The canonical design spans 11 color centers, four nominal magnitudes
(1, 2, 4 and 8 CIELAB units) and 23 directions per center/magnitude:
7 in the L*a* plane, 7 in L*b* and 9 in a*b*, equally spaced by angle.
That makes 11 × 4 × 23 = 1,012 pairs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .color import LabColor, XyzColor
from .corrections import ParametricFactors, formula_function
from .errors import DataError, DomainError, ParseError, SchemaError
from .stats import GS_MAX, GS_MIN, AssessmentRecord, dv_to_gs, gs_to_dv

SCHEMA_LINE = "# schema=v1"
PLANES = ("La", "Lb", "ab")
PLANE_DIRECTIONS = {"La": 7, "Lb": 7, "ab": 9}
CANONICAL_MAGNITUDES = (1.0, 2.0, 4.0, 8.0)

PAIRS_HEADER = (
    "pair_id",
    "center_id",
    "plane",
    "magnitude_label",
    "ref_L",
    "ref_a",
    "ref_b",
    "smp_L",
    "smp_a",
    "smp_b",
)
ASSESSMENTS_HEADER = ("pair_id", "observer_id", "session", "gs", "dv")
XYZ_PAIRS_HEADER = ("pair_id", "ref_X", "ref_Y", "ref_Z", "smp_X", "smp_Y", "smp_Z")


@dataclass(frozen=True)
class ColorCenter:
    id: str
    name: str
    lab: LabColor


CENTERS = (
    ColorCenter("gray", "Gray", LabColor(61.1, -3.2, 3.2)),
    ColorCenter("red", "Red", LabColor(41.0, 33.2, 25.5)),
    ColorCenter("hc_orange", "High-chroma orange", LabColor(60.3, 33.0, 64.3)),
    ColorCenter("yellow", "Yellow", LabColor(84.1, -6.7, 50.4)),
    ColorCenter("hc_yellow_green", "High-chroma yellow green", LabColor(63.2, -29.3, 44.1)),
    ColorCenter("green", "Green", LabColor(56.2, -32.5, 4.9)),
    ColorCenter("hc_green", "High-chroma green", LabColor(56.0, -45.7, 5.7)),
    ColorCenter("blue_green", "Blue green", LabColor(50.6, -18.7, -6.9)),
    ColorCenter("blue", "Blue", LabColor(37.0, -1.3, -27.9)),
    ColorCenter("hc_purple", "High-chroma purple", LabColor(45.4, 18.9, -25.0)),
    ColorCenter("black", "Black", LabColor(29.8, -3.1, 2.3)),
)

CENTER_INDEX = {center.id: center for center in CENTERS}


def center_by_id(center_id: str) -> ColorCenter:
    center = CENTER_INDEX.get(center_id)
    if center is None:
        raise DataError(f"unknown color center: {center_id!r}")
    return center


@dataclass(frozen=True)
class PairRecord:
    """One reference/sample pair with its design metadata."""

    pair_id: str
    center_id: str
    plane: str
    magnitude_label: float
    reference: LabColor
    sample: LabColor


@dataclass(frozen=True)
class ExperimentDesign:
    centers: tuple[ColorCenter, ...]
    pairs: tuple[PairRecord, ...]


def _format_magnitude(magnitude: float) -> str:
    return f"{magnitude:g}"


def generate_design(
    centers: Sequence[ColorCenter] | None = None,
    magnitudes: Sequence[float] | None = None,
) -> ExperimentDesign:
    """Build the sample-pair design around the given centers.

    Per center and magnitude, directions are equally spaced over 360°
    in each plane; the sample sits at center + magnitude·direction, so
    the out-of-plane component difference is exactly zero and the
    nominal ΔE*_ab equals the magnitude.
    """
    chosen_centers = tuple(centers) if centers is not None else CENTERS
    chosen_magnitudes = tuple(float(m) for m in (magnitudes if magnitudes is not None else CANONICAL_MAGNITUDES))
    seen = set()
    for center in chosen_centers:
        if center.id in seen:
            raise DomainError(f"duplicate center id: {center.id!r}")
        seen.add(center.id)
    for magnitude in chosen_magnitudes:
        if not (math.isfinite(magnitude) and magnitude > 0.0):
            raise DomainError(f"magnitudes must be positive, got {magnitude!r}")

    pairs: list[PairRecord] = []
    for center in chosen_centers:
        lab = center.lab
        for magnitude in chosen_magnitudes:
            for plane in PLANES:
                count = PLANE_DIRECTIONS[plane]
                for j in range(count):
                    angle = 2.0 * math.pi * j / count
                    dx = magnitude * math.cos(angle)
                    dy = magnitude * math.sin(angle)
                    if plane == "La":
                        sample = LabColor(lab.l + dx, lab.a + dy, lab.b)
                    elif plane == "Lb":
                        sample = LabColor(lab.l + dx, lab.a, lab.b + dy)
                    else:
                        sample = LabColor(lab.l, lab.a + dx, lab.b + dy)
                    pair_id = f"{center.id}-{plane}-m{_format_magnitude(magnitude)}-d{j}"
                    pairs.append(PairRecord(pair_id, center.id, plane, magnitude, lab, sample))
    return ExperimentDesign(chosen_centers, tuple(pairs))


def synthesize_assessments(
    design: ExperimentDesign,
    ground_truth: str = "NS",
    factors: ParametricFactors | None = None,
    noise_sigma: float = 0.0,
    n_observers: int = 1,
    seed: int = 0,
    repeat_center_id: str | None = None,
) -> list[AssessmentRecord]:
    """Simulate observers assessing the design's pairs.

    Each observer's ΔV is the ground-truth formula value times a
    log-normal factor exp(σ·z); the gray-scale grade is the inverse of
    the visual law, clamped to [1, 8], and ΔV is re-derived from the
    grade so every record satisfies the grade/ΔV consistency law.
    With ``repeat_center_id`` the pairs of that center are assessed a
    second time (session 2) by every observer.
    """
    if not noise_sigma >= 0.0:
        raise DomainError(f"noise_sigma must be non-negative, got {noise_sigma!r}")
    if n_observers < 1:
        raise DomainError(f"n_observers must be at least 1, got {n_observers!r}")
    if repeat_center_id is not None and all(p.center_id != repeat_center_id for p in design.pairs):
        raise DataError(f"repeat center {repeat_center_id!r} has no pairs in the design")

    truth_fn = formula_function(ground_truth, factors)
    truth = np.array([truth_fn(p.reference, p.sample) for p in design.pairs])
    if not (truth > 0.0).all():
        raise DomainError("ground-truth ΔE must be positive for every pair")
    repeat_rows = (
        [i for i, p in enumerate(design.pairs) if p.center_id == repeat_center_id]
        if repeat_center_id is not None
        else []
    )

    rng = np.random.default_rng(seed)
    records: list[AssessmentRecord] = []

    def assess(pair_index: int, observer_id: str, session: int, noise: float) -> AssessmentRecord:
        dv_raw = truth[pair_index] * noise
        gs = min(GS_MAX, max(GS_MIN, dv_to_gs(dv_raw)))
        return AssessmentRecord.from_gs(design.pairs[pair_index].pair_id, observer_id, session, gs)

    for i in range(n_observers):
        observer_id = f"obs{i + 1:02d}"
        noise = rng.lognormal(mean=0.0, sigma=noise_sigma, size=truth.size)
        for idx in range(truth.size):
            records.append(assess(idx, observer_id, 1, float(noise[idx])))
        if repeat_rows:
            repeat_noise = rng.lognormal(mean=0.0, sigma=noise_sigma, size=len(repeat_rows))
            for noise_value, idx in zip(repeat_noise, repeat_rows):
                records.append(assess(idx, observer_id, 2, float(noise_value)))
    return records


def _write_csv(path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(SCHEMA_LINE + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


class _RowReader:
    """CSV rows with 1-based file line numbers, schema line verified."""

    def __init__(self, path, header: Sequence[str]):
        self.path = Path(path)
        text = self.path.read_text()
        lines = text.splitlines()
        if not lines or lines[0].strip() != SCHEMA_LINE:
            raise SchemaError(f"{self.path}: first line must be {SCHEMA_LINE!r}")
        if len(lines) < 2:
            raise SchemaError(f"{self.path}: missing header line")
        header_row = next(csv.reader([lines[1]]))
        if tuple(h.strip() for h in header_row) != tuple(header):
            raise SchemaError(
                f"{self.path}: unknown header {header_row!r}, expected {list(header)!r}"
            )
        self.rows = [
            (line_no, row)
            for line_no, row in enumerate(csv.reader(lines[2:]), start=3)
            if row
        ]
        self.n_columns = len(header)
        self.header = tuple(header)

    def parse_float(self, row: Sequence[str], line_no: int, column: str) -> float:
        value = row[self.header.index(column)]
        try:
            parsed = float(value)
        except ValueError:
            raise ParseError(f"invalid number {value!r} for {column}", line=line_no, column=column) from None
        if not math.isfinite(parsed):
            raise ParseError(f"non-finite value {value!r} for {column}", line=line_no, column=column)
        return parsed

    def check_width(self, row: Sequence[str], line_no: int) -> None:
        if len(row) != self.n_columns:
            raise ParseError(
                f"expected {self.n_columns} columns, got {len(row)}", line=line_no
            )


def save_pairs(pairs: Sequence[PairRecord], path) -> None:
    rows = [
        (
            p.pair_id,
            p.center_id,
            p.plane,
            _format_magnitude(p.magnitude_label),
            f"{p.reference.l:.6f}",
            f"{p.reference.a:.6f}",
            f"{p.reference.b:.6f}",
            f"{p.sample.l:.6f}",
            f"{p.sample.a:.6f}",
            f"{p.sample.b:.6f}",
        )
        for p in pairs
    ]
    _write_csv(path, PAIRS_HEADER, rows)


def load_pairs(path, allow_any_magnitude: bool = False) -> list[PairRecord]:
    """Read a pairs file; duplicate pair ids are rejected.

    Magnitude labels outside the canonical {1, 2, 4, 8} are a schema
    violation unless ``allow_any_magnitude`` is set.
    """
    reader = _RowReader(path, PAIRS_HEADER)
    records: list[PairRecord] = []
    seen: set[str] = set()
    for line_no, row in reader.rows:
        reader.check_width(row, line_no)
        pair_id = row[0].strip()
        if not pair_id:
            raise ParseError("empty pair_id", line=line_no, column="pair_id")
        if pair_id in seen:
            raise DataError(f"duplicate pair_id {pair_id!r} (line {line_no})")
        seen.add(pair_id)
        plane = row[2].strip()
        if plane not in PLANES:
            raise ParseError(f"plane must be one of {PLANES}, got {plane!r}", line=line_no, column="plane")
        magnitude = reader.parse_float(row, line_no, "magnitude_label")
        if not magnitude > 0.0:
            raise ParseError(f"magnitude_label must be positive, got {magnitude!r}", line=line_no, column="magnitude_label")
        if not allow_any_magnitude and magnitude not in CANONICAL_MAGNITUDES:
            raise SchemaError(
                f"magnitude_label {magnitude:g} not in canonical set {{1, 2, 4, 8}} (line {line_no}); "
                "pass the free-magnitude flag to accept it"
            )
        values = [reader.parse_float(row, line_no, column) for column in PAIRS_HEADER[4:]]
        try:
            reference = LabColor(values[0], values[1], values[2])
            sample = LabColor(values[3], values[4], values[5])
        except DomainError as exc:
            raise ParseError(str(exc), line=line_no) from None
        records.append(PairRecord(pair_id, row[1].strip(), plane, magnitude, reference, sample))
    return records


def save_assessments(records: Sequence[AssessmentRecord], path) -> None:
    rows = [
        (r.pair_id, r.observer_id, str(r.session), f"{r.gs:.6f}", f"{r.dv:.6f}")
        for r in records
    ]
    _write_csv(path, ASSESSMENTS_HEADER, rows)


def load_assessments(path) -> list[AssessmentRecord]:
    """Read an assessments file; an empty dv field is derived from gs."""
    reader = _RowReader(path, ASSESSMENTS_HEADER)
    records: list[AssessmentRecord] = []
    for line_no, row in reader.rows:
        reader.check_width(row, line_no)
        pair_id = row[0].strip()
        observer_id = row[1].strip()
        if not pair_id:
            raise ParseError("empty pair_id", line=line_no, column="pair_id")
        if not observer_id:
            raise ParseError("empty observer_id", line=line_no, column="observer_id")
        try:
            session = int(row[2])
        except ValueError:
            raise ParseError(f"invalid session index {row[2]!r}", line=line_no, column="session") from None
        gs = reader.parse_float(row, line_no, "gs")
        try:
            if row[4].strip() == "":
                record = AssessmentRecord.from_gs(pair_id, observer_id, session, gs)
            else:
                dv = reader.parse_float(row, line_no, "dv")
                record = AssessmentRecord(pair_id, observer_id, session, gs, dv)
        except DomainError as exc:
            raise ParseError(str(exc), line=line_no, column="gs") from None
        records.append(record)
    return records


def save_xyz_pairs(rows: Sequence[tuple[str, XyzColor, XyzColor]], path) -> None:
    formatted = [
        (
            pair_id,
            f"{ref.x:.6f}",
            f"{ref.y:.6f}",
            f"{ref.z:.6f}",
            f"{smp.x:.6f}",
            f"{smp.y:.6f}",
            f"{smp.z:.6f}",
        )
        for pair_id, ref, smp in rows
    ]
    _write_csv(path, XYZ_PAIRS_HEADER, formatted)


def load_xyz_pairs(path) -> list[tuple[str, XyzColor, XyzColor]]:
    reader = _RowReader(path, XYZ_PAIRS_HEADER)
    out: list[tuple[str, XyzColor, XyzColor]] = []
    seen: set[str] = set()
    for line_no, row in reader.rows:
        reader.check_width(row, line_no)
        pair_id = row[0].strip()
        if not pair_id:
            raise ParseError("empty pair_id", line=line_no, column="pair_id")
        if pair_id in seen:
            raise DataError(f"duplicate pair_id {pair_id!r} (line {line_no})")
        seen.add(pair_id)
        values = [reader.parse_float(row, line_no, column) for column in XYZ_PAIRS_HEADER[1:]]
        try:
            reference = XyzColor(values[0], values[1], values[2])
            sample = XyzColor(values[3], values[4], values[5])
        except DomainError as exc:
            raise ParseError(str(exc), line=line_no) from None
        out.append((pair_id, reference, sample))
    return out

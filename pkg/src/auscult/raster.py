"""Breath-phenomena features from per-point probability rasters.

A recording of one auscultation point arrives as a probability raster: five
rows of per-frame event probabilities (inspiration, expiration, wheeze,
crackle, noise). This module turns a raster into the 8-value summary the
agent consumes: for each pathological phenomenon (wheeze, crackle) and each
breath phase (inspiration, expiration), the average within-event maximum
probability and the average fraction of the event covered by the phenomenon.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import RasterFormatError, RasterRangeError

CLASS_INSPIRATION = 0
CLASS_EXPIRATION = 1
CLASS_WHEEZE = 2
CLASS_CRACKLE = 3
CLASS_NOISE = 4
N_CLASSES = 5
N_FEATURES = 8


@dataclass(frozen=True)
class EventInterval:
    """Maximal run of frames forming one breath event. `end` is inclusive."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid interval ({self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass
class ProbabilityRaster:
    """Per-frame class probabilities for one recorded point.

    rows is a (5, frame_count) array in class order: inspiration, expiration,
    wheeze, crackle, noise. frame_duration_s is carried as metadata only.
    """

    rows: np.ndarray
    frame_duration_s: float = 0.05

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] != N_CLASSES:
            raise RasterFormatError(
                f"raster must have {N_CLASSES} rows, got shape {rows.shape}"
            )
        if rows.shape[1] < 1:
            raise RasterFormatError("raster must contain at least one frame")
        if not np.isfinite(rows).all():
            raise RasterRangeError("raster contains non-finite probabilities")
        if rows.min() < 0.0 or rows.max() > 1.0:
            raise RasterRangeError("raster probabilities must lie in [0, 1]")
        if not (isinstance(self.frame_duration_s, (int, float))
                and math.isfinite(self.frame_duration_s)
                and self.frame_duration_s > 0):
            raise RasterFormatError("frame_duration_s must be a positive real")
        self.rows = rows

    @property
    def frame_count(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class PhenomenaFeatures:
    """The 8 per-point summary values, all in [0, 1].

    Order mirrors the state encoding: wheeze max probability on inspirations
    and expirations, wheeze coverage on inspirations and expirations, then
    the same four values for crackles. A phase with no detected breath events
    contributes zeros.
    """

    wheeze_insp_prob: float
    wheeze_exp_prob: float
    wheeze_insp_coverage: float
    wheeze_exp_coverage: float
    crackle_insp_prob: float
    crackle_exp_prob: float
    crackle_insp_coverage: float
    crackle_exp_coverage: float

    def as_vector(self) -> np.ndarray:
        return np.array(
            [
                self.wheeze_insp_prob,
                self.wheeze_exp_prob,
                self.wheeze_insp_coverage,
                self.wheeze_exp_coverage,
                self.crackle_insp_prob,
                self.crackle_exp_prob,
                self.crackle_insp_coverage,
                self.crackle_exp_coverage,
            ],
            dtype=float,
        )

    @classmethod
    def from_vector(cls, vec) -> "PhenomenaFeatures":
        arr = np.asarray(vec, dtype=float)
        if arr.shape != (N_FEATURES,):
            raise ValueError(f"expected {N_FEATURES} features, got shape {arr.shape}")
        if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("features must be finite and lie in [0, 1]")
        return cls(*[float(v) for v in arr])

    @classmethod
    def zeros(cls) -> "PhenomenaFeatures":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class FeatureConfig:
    """Thresholds for event segmentation and pathology coverage counting."""

    event_threshold: float = 0.5
    pathology_threshold: float = 0.5

    def __post_init__(self):
        for name in ("event_threshold", "pathology_threshold"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")


def segment_events(row, threshold: float) -> list[EventInterval]:
    """Maximal contiguous runs of frames with probability >= threshold.

    Returned intervals are disjoint, sorted by start, and inclusive of both
    endpoints. An empty row is a precondition violation.
    """
    arr = np.asarray(row, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("row must be a non-empty 1-D sequence")
    mask = np.concatenate(([False], arr >= threshold, [False]))
    edges = np.flatnonzero(mask[1:] != mask[:-1])
    starts = edges[0::2]
    ends = edges[1::2] - 1
    return [EventInterval(int(s), int(e)) for s, e in zip(starts, ends)]


def event_stats(pathology_row, interval: EventInterval, threshold: float) -> tuple[float, float]:
    """Max probability and covered fraction of a pathology within one event."""
    arr = np.asarray(pathology_row, dtype=float)
    if interval.end >= arr.size:
        raise ValueError(f"interval {interval} exceeds row of length {arr.size}")
    segment = arr[interval.start:interval.end + 1]
    max_prob = float(segment.max())
    coverage = float(np.count_nonzero(segment >= threshold) / segment.size)
    return max_prob, coverage


def _phase_stats(phase_row, pathology_row, config: FeatureConfig) -> tuple[float, float]:
    events = segment_events(phase_row, config.event_threshold)
    if not events:
        return 0.0, 0.0
    stats = [event_stats(pathology_row, ev, config.pathology_threshold) for ev in events]
    mean_prob = float(np.mean([s[0] for s in stats]))
    mean_cov = float(np.mean([s[1] for s in stats]))
    return mean_prob, mean_cov


def extract_features(raster: ProbabilityRaster,
                     config: FeatureConfig | None = None) -> PhenomenaFeatures:
    """Aggregate a raster into the 8 per-point phenomena features.

    Breath events are segmented on the inspiration and expiration rows; each
    pathology's within-event max probability and coverage are averaged over
    all events of a phase, unweighted by event length.
    """
    cfg = config or FeatureConfig()
    insp = raster.rows[CLASS_INSPIRATION]
    exp = raster.rows[CLASS_EXPIRATION]
    values = []
    for pathology in (CLASS_WHEEZE, CLASS_CRACKLE):
        row = raster.rows[pathology]
        insp_prob, insp_cov = _phase_stats(insp, row, cfg)
        exp_prob, exp_cov = _phase_stats(exp, row, cfg)
        values.extend([insp_prob, exp_prob, insp_cov, exp_cov])
    return PhenomenaFeatures(*values)


def save_raster(raster: ProbabilityRaster, path) -> None:
    doc = {
        "frame_count": raster.frame_count,
        "frame_duration_s": raster.frame_duration_s,
        "rows": [row.tolist() for row in raster.rows],
    }
    Path(path).write_text(json.dumps(doc))


def load_raster(path) -> ProbabilityRaster:
    """Load a raster document, validating structure and value ranges."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise RasterFormatError(f"cannot parse raster file {path}: {exc}") from exc
    return raster_from_document(doc)


def raster_from_document(doc) -> ProbabilityRaster:
    """Build a raster from an already-parsed document (file or request body)."""
    if not isinstance(doc, dict):
        raise RasterFormatError("raster document must be an object")
    missing = {"frame_count", "frame_duration_s", "rows"} - set(doc)
    if missing:
        raise RasterFormatError(f"raster document missing fields: {sorted(missing)}")
    rows = doc["rows"]
    if not isinstance(rows, list) or len(rows) != N_CLASSES:
        raise RasterFormatError(f"raster document must carry {N_CLASSES} rows")
    if not all(isinstance(r, list) for r in rows):
        raise RasterFormatError("raster rows must be arrays of reals")
    if any(len(r) != doc["frame_count"] for r in rows):
        raise RasterFormatError("every row must have exactly frame_count entries")
    try:
        arr = np.array(rows, dtype=float)
        duration = float(doc["frame_duration_s"])
    except (TypeError, ValueError) as exc:
        raise RasterFormatError(f"raster document holds non-numeric data: {exc}") from exc
    return ProbabilityRaster(rows=arr, frame_duration_s=duration)

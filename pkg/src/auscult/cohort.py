"""Synthetic examination cohorts.

An examination is a patient: a ground-truth severity label (0 none,
1 innocent, 2 significant) and, for each of the 12 auscultation points, a
latent 8-value phenomena profile. Auscultating a point observes its profile
under clipped Gaussian noise. `render_raster` additionally synthesizes a
probability raster whose extracted features reproduce the latent profile,
so the full raster pipeline can be exercised end to end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CohortFormatError
from .raster import (
    CLASS_CRACKLE,
    CLASS_EXPIRATION,
    CLASS_INSPIRATION,
    CLASS_NOISE,
    CLASS_WHEEZE,
    N_CLASSES,
    N_FEATURES,
    FeatureConfig,
    PhenomenaFeatures,
    ProbabilityRaster,
)

N_POINTS = 12

# latent_profiles columns, matching PhenomenaFeatures order
_WHEEZE_COLS = (0, 1, 2, 3)     # (insp prob, exp prob, insp cov, exp cov)
_CRACKLE_COLS = (4, 5, 6, 7)
_COVERAGE_COLS = (2, 3, 6, 7)


@dataclass(eq=False)
class Examination:
    """One synthetic patient: label plus latent per-point phenomena profiles."""

    id: str
    label: int
    latent_profiles: np.ndarray
    observation_noise: float = 0.0

    def __post_init__(self):
        if self.label not in (0, 1, 2):
            raise CohortFormatError(f"label must be 0, 1 or 2, got {self.label}")
        profiles = np.asarray(self.latent_profiles, dtype=float)
        if profiles.shape != (N_POINTS, N_FEATURES):
            raise CohortFormatError(
                f"latent_profiles must be {N_POINTS}x{N_FEATURES}, got {profiles.shape}"
            )
        if not np.isfinite(profiles).all() or profiles.min() < 0 or profiles.max() > 1:
            raise CohortFormatError("latent profiles must lie in [0, 1]")
        if self.observation_noise < 0:
            raise CohortFormatError("observation_noise must be >= 0")
        self.latent_profiles = profiles


@dataclass
class CohortConfig:
    """Generator knobs. Defaults follow the 200/85/285 class balance."""

    label_priors: tuple[float, float, float] = (200 / 570, 85 / 570, 285 / 570)
    benign_ceiling: float = 0.1
    mild_range: tuple[float, float] = (0.2, 0.5)
    severe_range: tuple[float, float] = (0.6, 1.0)
    severe_point_counts: tuple[int, int] = (2, 6)
    # points more likely to carry pathology in severe cases; favored_mass of
    # the per-point selection probability is spread over them. Findings
    # cluster at characteristic sites, which is what makes guided point
    # selection viable in the first place.
    favored_points: tuple[int, ...] = (2, 4, 9, 11, 12)
    favored_mass: float = 0.8
    noise_sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        priors = np.asarray(self.label_priors, dtype=float)
        if priors.shape != (3,) or (priors < 0).any():
            raise ValueError("label_priors must be 3 nonnegative reals")
        if abs(priors.sum() - 1.0) > 1e-9:
            raise ValueError(f"label_priors must sum to 1, got {priors.sum()!r}")
        for name in ("mild_range", "severe_range"):
            lo, hi = getattr(self, name)
            if not (0 <= lo <= hi <= 1):
                raise ValueError(f"{name} must be an ordered subrange of [0, 1]")
        if not 0 <= self.benign_ceiling <= 1:
            raise ValueError("benign_ceiling must lie in [0, 1]")
        lo, hi = self.severe_point_counts
        if not (1 <= lo <= hi <= N_POINTS):
            raise ValueError("severe_point_counts must satisfy 1 <= lo <= hi <= 12")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not 0 <= self.favored_mass <= 1:
            raise ValueError("favored_mass must lie in [0, 1]")
        if any(p < 1 or p > N_POINTS for p in self.favored_points):
            raise ValueError("favored_points must be point numbers 1..12")


def _point_weights(config: CohortConfig) -> np.ndarray:
    """Per-point selection probabilities for severe pathology placement."""
    weights = np.empty(N_POINTS)
    favored = [p - 1 for p in config.favored_points]
    rest = [i for i in range(N_POINTS) if i not in favored]
    if favored:
        weights[favored] = config.favored_mass / len(favored)
    if rest:
        weights[rest] = (1.0 - config.favored_mass) / len(rest)
    return weights / weights.sum()


def _draw_block(rng: np.random.Generator, lo: float, hi: float,
                with_coverage: bool) -> np.ndarray:
    """(insp prob, exp prob, insp cov, exp cov) with phases drawn independently.

    Coverage entries stay 0 unless the range lies above the pathology
    threshold: a raster frame can only count toward coverage by crossing the
    threshold, which would raise the max, so sub-threshold profiles with
    nonzero coverage would be unrepresentable.
    """
    probs = rng.uniform(lo, hi, size=2)  # inspiration, expiration
    covs = rng.uniform(lo, hi, size=2) if with_coverage else np.zeros(2)
    return np.array([probs[0], probs[1], covs[0], covs[1]])


def sample_examination(rng: np.random.Generator, config: CohortConfig,
                       exam_id: str = "") -> Examination:
    """Draw one examination: label from the priors, then per-point latents.

    Label 0 keeps every latent under the benign ceiling. Label 1 elevates a
    single point into the mild range for one pathology. Label 2 elevates
    2..6 points (biased toward the favored points) into the severe range for
    wheeze, crackle or both.
    """
    label = int(rng.choice(3, p=np.asarray(config.label_priors, dtype=float)))
    profiles = rng.uniform(0.0, config.benign_ceiling, size=(N_POINTS, N_FEATURES))
    profiles[:, list(_COVERAGE_COLS)] = 0.0

    if label == 1:
        point = int(rng.integers(0, N_POINTS))
        cols = _WHEEZE_COLS if rng.random() < 0.5 else _CRACKLE_COLS
        profiles[point, list(cols)] = _draw_block(rng, *config.mild_range,
                                                  with_coverage=False)
    elif label == 2:
        lo, hi = config.severe_point_counts
        count = int(rng.integers(lo, hi + 1))
        points = rng.choice(N_POINTS, size=count, replace=False, p=_point_weights(config))
        for point in points:
            which = rng.integers(0, 3)  # 0 wheeze, 1 crackle, 2 both
            if which in (0, 2):
                profiles[point, list(_WHEEZE_COLS)] = _draw_block(
                    rng, *config.severe_range, with_coverage=True)
            if which in (1, 2):
                profiles[point, list(_CRACKLE_COLS)] = _draw_block(
                    rng, *config.severe_range, with_coverage=True)

    return Examination(
        id=exam_id or f"exam-{rng.integers(0, 2**32):08x}",
        label=label,
        latent_profiles=profiles,
        observation_noise=config.noise_sigma,
    )


def generate_cohort(n: int, config: CohortConfig) -> list[Examination]:
    """Deterministically generate n examinations from config.seed."""
    rng = np.random.default_rng(config.seed)
    return [sample_examination(rng, config, exam_id=f"exam-{i:04d}") for i in range(n)]


def observe_point(exam: Examination, point: int,
                  rng: np.random.Generator) -> PhenomenaFeatures:
    """One auscultation of a point: its latent profile under clipped noise."""
    if not 1 <= point <= N_POINTS:
        raise ValueError(f"point must be 1..{N_POINTS}, got {point}")
    latent = exam.latent_profiles[point - 1]
    if exam.observation_noise > 0:
        observed = latent + rng.normal(0.0, exam.observation_noise, size=N_FEATURES)
        observed = np.clip(observed, 0.0, 1.0)
    else:
        observed = latent.copy()
    return PhenomenaFeatures.from_vector(observed)


def save_cohort(examinations: list[Examination], path) -> None:
    records = [
        {
            "id": exam.id,
            "label": exam.label,
            "profiles": exam.latent_profiles.tolist(),
            "noise_sigma": exam.observation_noise,
        }
        for exam in examinations
    ]
    Path(path).write_text(json.dumps(records))


def load_cohort(path) -> list[Examination]:
    try:
        records = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CohortFormatError(f"cannot parse cohort file {path}: {exc}") from exc
    if not isinstance(records, list):
        raise CohortFormatError("cohort document must be an array of examinations")
    exams = []
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise CohortFormatError(f"examination record {i} must be an object")
        missing = {"id", "label", "profiles", "noise_sigma"} - set(rec)
        if missing:
            raise CohortFormatError(f"examination record {i} missing {sorted(missing)}")
        try:
            profiles = np.array(rec["profiles"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise CohortFormatError(f"examination record {i}: bad profiles: {exc}") from exc
        try:
            exams.append(Examination(
                id=str(rec["id"]),
                label=rec["label"],
                latent_profiles=profiles,
                observation_noise=float(rec["noise_sigma"]),
            ))
        except CohortFormatError as exc:
            raise CohortFormatError(f"examination record {i}: {exc}") from exc
    return exams


# --- raster synthesis -------------------------------------------------------

_EVENT_LEN = 40        # frames per breath event
_GAP_LEN = 5           # frames between events
_BREATHS = 3           # inspiration/expiration pairs
_PHASE_LEVEL = 0.95    # phase-row probability inside its events
_BACKGROUND = 0.3      # ceiling for sub-threshold background activity


def render_raster(exam: Examination, point: int, rng: np.random.Generator,
                  config: FeatureConfig | None = None) -> ProbabilityRaster:
    """Synthesize a raster for one point whose features match the latents.

    Within each breath event the pathology rows carry a contiguous run of
    frames at the latent max probability, sized so coverage reproduces the
    latent coverage. A latent max below the pathology threshold cannot carry
    coverage (no frame may cross the threshold without raising the max), so
    such profiles render with coverage 0. The generator only emits coverage
    alongside above-threshold maxima, so every cohort profile round-trips
    through extraction within 0.05 per feature (grid rounding is <= 1/80).
    """
    if not 1 <= point <= N_POINTS:
        raise ValueError(f"point must be 1..{N_POINTS}, got {point}")
    cfg = config or FeatureConfig()
    latent = exam.latent_profiles[point - 1]
    if exam.observation_noise > 0:
        latent = np.clip(latent + rng.normal(0.0, exam.observation_noise, N_FEATURES),
                         0.0, 1.0)

    frame_count = _GAP_LEN + 2 * _BREATHS * (_EVENT_LEN + _GAP_LEN)
    rows = np.zeros((N_CLASSES, frame_count))

    insp_events, exp_events = [], []
    cursor = _GAP_LEN
    for _ in range(_BREATHS):
        insp_events.append((cursor, cursor + _EVENT_LEN))
        cursor += _EVENT_LEN + _GAP_LEN
        exp_events.append((cursor, cursor + _EVENT_LEN))
        cursor += _EVENT_LEN + _GAP_LEN

    for phase_class, events in ((CLASS_INSPIRATION, insp_events),
                                (CLASS_EXPIRATION, exp_events)):
        for start, stop in events:
            rows[phase_class, start:stop] = _PHASE_LEVEL

    # sub-threshold clutter on the noise row and between events
    rows[CLASS_NOISE] = rng.uniform(0.0, _BACKGROUND, size=frame_count)

    for pathology, (prob_i, prob_e, cov_i, cov_e) in (
        (CLASS_WHEEZE, latent[list(_WHEEZE_COLS)]),
        (CLASS_CRACKLE, latent[list(_CRACKLE_COLS)]),
    ):
        for events, prob, cov in ((insp_events, prob_i, cov_i),
                                  (exp_events, prob_e, cov_e)):
            for start, stop in events:
                _fill_event(rows[pathology], start, stop, prob, cov,
                            cfg.pathology_threshold, rng)

    return ProbabilityRaster(rows=rows)


def _fill_event(row: np.ndarray, start: int, stop: int, prob: float,
                coverage: float, threshold: float, rng: np.random.Generator) -> None:
    length = stop - start
    if prob <= 0.0:
        return
    if prob >= threshold:
        hot = int(round(coverage * length))
        hot = max(hot, 1)  # the max-probability frame itself counts as covered
    else:
        hot = 1            # below threshold: carries the max, adds no coverage
    offset = int(rng.integers(0, length - hot + 1))
    row[start + offset:start + offset + hot] = prob
    # low-level activity elsewhere in the event, strictly under both the
    # event max and the counting threshold
    rest = np.ones(length, dtype=bool)
    rest[offset:offset + hot] = False
    ceiling = min(prob, threshold) * 0.5
    row[start:stop][rest] = rng.uniform(0.0, ceiling, size=int(rest.sum()))

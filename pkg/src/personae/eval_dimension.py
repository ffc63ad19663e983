"""Dimension projection and pairwise ranking agreement against survey data.

A social dimension is built from seed pairs: the unit-normalized mean of
(pole A embedding - pole B embedding) over all pairs. Identities are
projected onto the dimension and, for every ordered pair of surveyed
identities that is not excluded by the SD rule, the projection ordering is
compared with the survey-mean ordering.

The exclusion rule: a comparison (i, j) is skipped when the survey means
are within a standard deviation of each other. The default predicate is
|mean_i - mean_j| <= max(sd_i, sd_j); "min" and "pooled" variants are
selectable and recorded in the report settings. Equal projections on a
surviving pair count as disagreement: a model that cannot order the pair
has not recovered the stereotype.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDimension, NoValidComparisons, UnknownPhrase
from .store import TableProvider, similarity

EXCLUSION_MODES = ("max", "min", "pooled")
RACE_CATEGORIES = ("white", "black", "middle_eastern", "hispanic", "asian")


@dataclass(frozen=True)
class DimensionSpec:
    """Named dimension with its seed pairs and survey orientation.

    ``high_pole`` declares which pole sits at the high end of the survey
    scale; it is never inferred from the data.
    """

    name: str
    seed_pairs: tuple
    high_pole: str = "a"

    def __post_init__(self):
        if not self.seed_pairs:
            raise ValueError("a dimension needs at least one seed pair")
        if self.high_pole not in ("a", "b"):
            raise ValueError("high_pole must be 'a' or 'b'")


@dataclass
class SurveyRating:
    identity: str
    dimension: str
    mean: float
    sd: float
    n_raters: int

    def __post_init__(self):
        if self.sd < 0:
            raise ValueError(f"negative sd for {self.identity!r}")
        if self.n_raters < 3:
            raise ValueError(f"{self.identity!r} has fewer than 3 raters")


@dataclass
class DimensionReport:
    dimension: str
    per_identity: dict
    n_comparisons: dict
    score: float
    n_identities_scored: int
    settings: dict = field(default_factory=dict)


def build_dimension(provider: TableProvider, spec: DimensionSpec) -> np.ndarray:
    """Unit vector of the mean seed-pair difference.

    Raises UnknownPhrase when a pole is missing from the provider and
    DegenerateDimension when the mean difference has zero norm.
    """
    diffs = []
    for pole_a, pole_b in spec.seed_pairs:
        diffs.append(provider.vector(pole_a) - provider.vector(pole_b))
    mean_diff = np.mean(diffs, axis=0)
    norm = np.linalg.norm(mean_diff)
    if norm == 0.0:
        raise DegenerateDimension(spec.name)
    return mean_diff / norm


def project(provider: TableProvider, identity: str, direction: np.ndarray, use_cosine: bool = True) -> float:
    """Scalar placement of an identity along a unit dimension vector.

    Cosine by default; raw inner product behind the flag. An identity
    whose embedding is the zero vector projects to 0.0.
    """
    if not provider.has(identity):
        raise UnknownPhrase(identity)
    vec = provider.vector(identity)
    if use_cosine:
        return similarity(vec, direction)
    return float(vec @ direction)


def _exclusion_threshold(sds: np.ndarray, mode: str) -> np.ndarray:
    if mode == "max":
        return np.maximum(sds[:, None], sds[None, :])
    if mode == "min":
        return np.minimum(sds[:, None], sds[None, :])
    if mode == "pooled":
        return np.sqrt((sds[:, None] ** 2 + sds[None, :] ** 2) / 2.0)
    raise ValueError(f"exclusion mode must be one of {EXCLUSION_MODES}")


def agreement_from_values(
    projections: np.ndarray, means: np.ndarray, sds: np.ndarray, exclusion: str = "max"
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pairwise agreement counts from raw value arrays.

    Returns (agreements, valid_counts, valid_mask); callers attach names.
    """
    means = np.asarray(means, dtype=float)
    sds = np.asarray(sds, dtype=float)
    projections = np.asarray(projections, dtype=float)
    mean_diff = means[:, None] - means[None, :]
    valid = np.abs(mean_diff) > _exclusion_threshold(sds, exclusion)
    np.fill_diagonal(valid, False)
    proj_diff = projections[:, None] - projections[None, :]
    agree = valid & (np.sign(proj_diff) == np.sign(mean_diff))
    return agree.sum(axis=1), valid.sum(axis=1), valid


def ranking_agreement(
    provider: TableProvider,
    spec: DimensionSpec,
    survey: list[SurveyRating],
    exclusion: str = "max",
    use_cosine: bool = True,
) -> DimensionReport:
    """Fraction of surviving pairwise comparisons each identity gets right.

    The dimension score is the mean per-identity fraction over identities
    with at least one valid comparison. Identities missing from the
    provider project to 0.0 via the zero-vector rule rather than failing,
    so restricted-vocabulary models can still be scored.
    """
    ratings = [r for r in survey if r.dimension == spec.name]
    if len(ratings) < 2:
        raise ValueError(f"need >= 2 survey identities for dimension {spec.name!r}")
    direction = build_dimension(provider, spec)

    names = [r.identity for r in ratings]
    means = np.array([r.mean for r in ratings])
    if spec.high_pole == "b":
        means = -means
    sds = np.array([r.sd for r in ratings])
    projections = np.array(
        [
            similarity(provider.embed_phrase_set([name]).vector, direction)
            if use_cosine
            else float(provider.embed_phrase_set([name]).vector @ direction)
            for name in names
        ]
    )

    agreements, valid_counts, _ = agreement_from_values(projections, means, sds, exclusion)
    scored = valid_counts > 0
    if not scored.any():
        raise NoValidComparisons(spec.name)
    fractions = np.divide(
        agreements, valid_counts, out=np.zeros_like(agreements, dtype=float), where=scored
    )
    return DimensionReport(
        dimension=spec.name,
        per_identity={n: float(f) for n, f, s in zip(names, fractions, scored) if s},
        n_comparisons={n: int(c) for n, c in zip(names, valid_counts)},
        score=float(fractions[scored].mean()),
        n_identities_scored=int(scored.sum()),
        settings={"exclusion": exclusion, "projection": "cosine" if use_cosine else "dot",
                  "high_pole": spec.high_pole},
    )


def race_aggregate(reports: list[DimensionReport]) -> float:
    """Unweighted mean over race-category dimension scores."""
    if not reports:
        raise ValueError("need at least one category report")
    return float(np.mean([r.score for r in reports]))


def bootstrap_ci(
    report: DimensionReport, n_resamples: int = 1000, seed: int = 0, alpha: float = 0.05
) -> tuple[float, float]:
    """Percentile bootstrap over identities for the dimension score."""
    values = np.array(list(report.per_identity.values()))
    rng = np.random.default_rng(seed)
    stats = np.array(
        [values[rng.integers(0, len(values), len(values))].mean() for _ in range(n_resamples)]
    )
    return float(np.quantile(stats, alpha / 2)), float(np.quantile(stats, 1 - alpha / 2))


# ---------------------------------------------------------------------------
# File formats

def load_survey_tsv(path) -> list[SurveyRating]:
    """identity <TAB> dimension <TAB> mean <TAB> sd <TAB> n_raters"""
    out = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ValueError(f"{path}:{ln}: expected 5 fields")
            out.append(
                SurveyRating(
                    identity=parts[0],
                    dimension=parts[1],
                    mean=float(parts[2]),
                    sd=float(parts[3]),
                    n_raters=int(parts[4]),
                )
            )
    return out


def load_dimension_specs(path) -> list[DimensionSpec]:
    """JSON list of {name, pairs: [[a, b], ...], high_pole}."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return [
        DimensionSpec(
            name=d["name"],
            seed_pairs=tuple((a, b) for a, b in d["pairs"]),
            high_pole=d.get("high_pole", "a"),
        )
        for d in raw
    ]


def default_dimension_specs() -> list[DimensionSpec]:
    from importlib.resources import files

    path = files("personae").joinpath("data/dimensions_default.json")
    with path.open(encoding="utf-8") as fh:
        raw = json.load(fh)
    return [
        DimensionSpec(
            name=d["name"],
            seed_pairs=tuple((a, b) for a, b in d["pairs"]),
            high_pole=d.get("high_pole", "a"),
        )
        for d in raw
    ]

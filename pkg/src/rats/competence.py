"""STEM competence estimation from graded attempts.

Each RAT is tagged with criteria from a fixed 21-item catalog; every criterion
belongs to one or more of three competencies (data literacy, representational
competence, mathematical literacy).  For every graded first attempt the
per-competence criterion count of the RAT is added to the student's maximum
score, and to the current score as well iff the RAT was solved correctly.
The competence level is the exact ratio current/maximum.

Scores are integer pairs and levels are ``fractions.Fraction``; rendering to
decimals happens only at the presentation boundary, so progression series
carry no floating-point drift.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from importlib import resources
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import UnknownCriterion


class Competence(str, Enum):
    DATA_LITERACY = "data_literacy"
    REPRESENTATIONAL = "representational_competence"
    MATHEMATICAL = "mathematical_literacy"


COMPETENCES: tuple[Competence, ...] = (
    Competence.DATA_LITERACY,
    Competence.REPRESENTATIONAL,
    Competence.MATHEMATICAL,
)


@dataclass(frozen=True)
class Criterion:
    id: int
    description: str
    competencies: frozenset[Competence]


@dataclass(frozen=True)
class CriterionCatalog:
    version: str
    entries: tuple[Criterion, ...]

    def __post_init__(self):
        ids = [c.id for c in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("catalog criterion ids must be unique")
        for c in self.entries:
            if not c.competencies:
                raise ValueError(f"criterion {c.id} maps to no competence")

    @property
    def ids(self) -> frozenset[int]:
        return frozenset(c.id for c in self.entries)

    def __getitem__(self, criterion_id: int) -> Criterion:
        for c in self.entries:
            if c.id == criterion_id:
                return c
        raise KeyError(criterion_id)


def load_catalog(path: Optional[str] = None) -> CriterionCatalog:
    """Load the criteria catalog from a JSON file (the packaged v1 by default)."""
    if path is None:
        raw = resources.files("rats.data").joinpath("criteria_catalog.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    doc = json.loads(raw)
    entries = tuple(
        Criterion(
            id=int(e["id"]),
            description=e["description"],
            competencies=frozenset(Competence(c) for c in e["competencies"]),
        )
        for e in doc["entries"]
    )
    return CriterionCatalog(version=str(doc["catalog_version"]), entries=entries)


def criteria_counts(rat, catalog: CriterionCatalog) -> dict[Competence, int]:
    """Per-competence count of the RAT's criterion flags.

    Accepts a RAT or a bare iterable of criterion ids.  Raises
    UnknownCriterion for flags outside the catalog.
    """
    ids: Iterable[int] = getattr(rat, "criteria", rat)
    known = {c.id: c for c in catalog.entries}
    counts = {c: 0 for c in COMPETENCES}
    for criterion_id in ids:
        criterion = known.get(criterion_id)
        if criterion is None:
            raise UnknownCriterion(f"criterion {criterion_id} is not in the catalog")
        for competence in criterion.competencies:
            counts[competence] += 1
    return counts


Counts = Mapping[Union[Competence, str], int]


def _normalize(counts: Counts) -> dict[Competence, int]:
    return {Competence(k): int(v) for k, v in counts.items() if int(v) != 0}


@dataclass(frozen=True)
class CompetenceProfile:
    """Per-student current/maximum score pairs, one per competence."""

    student: str = ""
    lecture: Optional[str] = None
    current: Mapping[Competence, int] = field(default_factory=dict)
    maximum: Mapping[Competence, int] = field(default_factory=dict)

    def __post_init__(self):
        for c in COMPETENCES:
            cur, mx = self.current.get(c, 0), self.maximum.get(c, 0)
            if not 0 <= cur <= mx:
                raise ValueError(f"score out of range for {c.value}: {cur}/{mx}")


def fresh_profile(student: str = "", lecture: Optional[str] = None) -> CompetenceProfile:
    return CompetenceProfile(student=student, lecture=lecture, current={}, maximum={})


def update_profile(profile: CompetenceProfile, counts: Counts, correct: bool) -> CompetenceProfile:
    """Apply one graded first attempt: maximum grows by the RAT's criterion
    counts, current too iff the RAT was solved correctly."""
    add = _normalize(counts)
    if not add:
        return profile
    maximum = dict(profile.maximum)
    current = dict(profile.current)
    for competence, n in add.items():
        maximum[competence] = maximum.get(competence, 0) + n
        if correct:
            current[competence] = current.get(competence, 0) + n
    return CompetenceProfile(profile.student, profile.lecture, current, maximum)


def relative_level(profile: CompetenceProfile, competence: Competence) -> Optional[Fraction]:
    """Exact current/maximum ratio; None (no data) while maximum is zero."""
    maximum = profile.maximum.get(competence, 0)
    if maximum == 0:
        return None
    return Fraction(profile.current.get(competence, 0), maximum)


def fold_attempts(
    attempts: Iterable[tuple[Counts, bool]],
    student: str = "",
    lecture: Optional[str] = None,
) -> CompetenceProfile:
    """Fold (counts, correct) pairs, in attempt order, into a profile."""
    profile = fresh_profile(student, lecture)
    for counts, correct in attempts:
        profile = update_profile(profile, counts, correct)
    return profile


@dataclass(frozen=True)
class ProgressionPoint:
    competence: Competence
    attempt_index: int
    level: Optional[Fraction]


def progression_series(
    attempts: Sequence[tuple[Counts, bool]],
) -> dict[Competence, list[ProgressionPoint]]:
    """Level after every completed attempt, per competence.

    Point i is the relative level of the profile folded over the first i
    attempts (1-based), so any prefix of a series equals the series of the
    prefix.
    """
    series: dict[Competence, list[ProgressionPoint]] = {c: [] for c in COMPETENCES}
    profile = fresh_profile()
    for i, (counts, correct) in enumerate(attempts, start=1):
        profile = update_profile(profile, counts, correct)
        for c in COMPETENCES:
            series[c].append(ProgressionPoint(c, i, relative_level(profile, c)))
    return series

"""Shared domain vocabulary: users, roles, RATs, scaffolds, attempts.

Everything here is a plain value type plus pure validation functions; nothing
touches storage.  Mutation happens through the service layer's transactional
store, so these objects are safe to share across request handlers.

Rich text (questions, option texts, feedback, scaffold bodies) is markdown
with ``$...$`` / ``$$...$$`` math delimiters and image references by asset id.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum, IntEnum
from typing import Mapping, Optional, Union


class Role(IntEnum):
    """User roles, totally ordered; higher roles inherit lower roles' rights."""

    STUDENT = 1
    RAT_CREATOR = 2
    LECTURER = 3
    ADMINISTRATOR = 4

    @classmethod
    def parse(cls, name: str) -> "Role":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown role: {name!r}") from None


def check_access(actor_role: Role, required_role: Role) -> bool:
    """True iff ``actor_role`` is at least ``required_role`` in the role order."""
    return Role(actor_role) >= Role(required_role)


class QuestionKind(str, Enum):
    MULTIPLE_CHOICE = "multiple_choice"
    MULTI_TRUE_FALSE = "multi_true_false"
    OPEN_ENDED = "open_ended"


class PublicationState(str, Enum):
    DRAFT = "draft"
    IN_REVIEW = "in_review"
    PUBLISHED = "published"
    RETIRED = "retired"


class ScaffoldKind(str, Enum):
    TEXT = "text"
    VIDEO_LINK = "video_link"
    EXTERNAL_LINK = "external_link"
    BOOK_REFERENCE = "book_reference"


class AttemptContext(str, Enum):
    AUTO_RATS = "auto_rats"
    SHEET = "sheet"
    LIVE_SHEET = "live_sheet"
    CROSS_LECTURE = "cross_lecture"


@dataclass(frozen=True)
class UserAccount:
    id: str
    email: str
    password_hash: bytes
    role: Role
    terms_accepted: bool
    email_verified: bool
    created_at: datetime


@dataclass(frozen=True)
class AnswerOption:
    """One answer option (multiple choice) or statement (multiple true/false).

    ``is_correct`` is set for multiple-choice options, ``truth_value`` for
    true/false statements; the unused one stays None.  ``feedback`` is the
    answer-specific informative feedback shown when this option was chosen
    incorrectly; authoring requires it to be non-empty for incorrect options.
    """

    id: str
    text: str
    is_correct: Optional[bool] = None
    truth_value: Optional[bool] = None
    feedback: str = ""


# Responses by question kind: a chosen option id (multiple choice), a mapping
# of statement id -> submitted truth value (multiple true/false), or free text
# (open-ended).
Response = Union[str, Mapping[str, bool]]


@dataclass(frozen=True)
class RAT:
    """A rapid assessment task: one short formative assessment item."""

    id: str
    question: str
    kind: QuestionKind
    options: tuple[AnswerOption, ...] = ()
    accepted_answers: tuple[str, ...] = ()
    topics: frozenset[str] = frozenset()
    concepts: frozenset[str] = frozenset()
    lectures: frozenset[str] = frozenset()
    criteria: frozenset[int] = frozenset()
    is_cross_lecture: bool = False
    general_feedback: str = ""
    author: str = ""
    state: PublicationState = PublicationState.DRAFT
    approvals: frozenset[str] = frozenset()
    created_at: Optional[datetime] = None


@dataclass(frozen=True)
class Scaffold:
    """Optional learner-requested support material attached to a RAT."""

    id: str
    rat_id: str
    kind: ScaffoldKind
    body: str
    approvals: frozenset[str] = frozenset()
    ratings: tuple[tuple[str, int], ...] = ()
    suggested_by: str = ""
    created_at: Optional[datetime] = None

    def mean_rating(self) -> float:
        if not self.ratings:
            return 0.0
        return sum(stars for _, stars in self.ratings) / len(self.ratings)

    def visible(self, approval_threshold: int) -> bool:
        return len(self.approvals) >= approval_threshold


@dataclass(frozen=True)
class Attempt:
    """One student response to one RAT.

    ``correct`` is None while the response is ungraded (open-ended answers
    that matched no accepted answer and await manual grading).  ``counts`` is
    the per-competence criterion count snapshot taken when the attempt was
    recorded, so later edits to the RAT cannot rewrite history.
    """

    id: str
    student: str
    rat: str
    lecture: Optional[str]
    context: AttemptContext
    response: Response
    correct: Optional[bool]
    submitted_at: datetime
    is_first_for_rat: bool
    counts: Mapping[str, int] = field(default_factory=dict)

    @property
    def graded(self) -> bool:
        return self.correct is not None


@dataclass(frozen=True)
class Violation:
    """One authoring-rule violation found by validate_rat."""

    code: str
    fields: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}({self.fields}): {self.message}"


_WHITESPACE = re.compile(r"\s+")


def normalize_answer(text: str) -> str:
    """Normalization applied before comparing open-ended answers.

    Trims, collapses internal whitespace, and case-folds, so "  42 " and "42"
    compare equal.
    """
    return _WHITESPACE.sub(" ", text.strip()).casefold()


def validate_rat(
    rat: RAT,
    *,
    concept_topics: Optional[Mapping[str, str]] = None,
    valid_criteria: Optional[frozenset[int]] = None,
) -> list[Violation]:
    """Check all authoring invariants; returns an empty list iff compliant.

    Violations are data, not failures.  ``concept_topics`` maps concept id to
    its topic id; when given, every referenced concept must belong to one of
    the referenced topics.  ``valid_criteria`` is the set of catalog criterion
    ids; when given, criterion flags outside it are rejected.  Either check is
    skipped when its mapping is not supplied (pure structural validation).
    """
    violations: list[Violation] = []

    def bad(code: str, fields: str, message: str) -> None:
        violations.append(Violation(code, fields, message))

    if rat.kind is QuestionKind.MULTIPLE_CHOICE:
        if len(rat.options) < 2:
            bad("TooFewOptions", "options", "multiple choice needs at least 2 options")
        n_correct = sum(1 for o in rat.options if o.is_correct)
        if n_correct == 0:
            bad("NoCorrectOption", "options", "no option is marked correct")
        elif n_correct > 1:
            bad("MultipleCorrectOptions", "options", f"{n_correct} options marked correct")
        for o in rat.options:
            if o.is_correct is None:
                bad("MissingCorrectFlag", f"options[{o.id}]", "option has no is_correct flag")
        if rat.accepted_answers:
            bad("AcceptedAnswersNotAllowed", "accepted_answers", "only open-ended items take accepted answers")
    elif rat.kind is QuestionKind.MULTI_TRUE_FALSE:
        if not rat.options:
            bad("NoStatements", "options", "multiple true/false needs at least 1 statement")
        for o in rat.options:
            if o.truth_value is None:
                bad("MissingTruthValue", f"options[{o.id}]", "statement has no defined truth value")
        if rat.accepted_answers:
            bad("AcceptedAnswersNotAllowed", "accepted_answers", "only open-ended items take accepted answers")
    elif rat.kind is QuestionKind.OPEN_ENDED:
        if not rat.accepted_answers:
            bad("NoAcceptedAnswer", "accepted_answers", "open-ended needs at least 1 accepted answer")
        if rat.options:
            bad("OptionsNotAllowed", "options", "open-ended items take no options")

    for o in rat.options:
        incorrect = (
            rat.kind is QuestionKind.MULTIPLE_CHOICE and o.is_correct is False
        ) or rat.kind is QuestionKind.MULTI_TRUE_FALSE
        # Every statement of a multi-T/F item can be answered wrongly, so all
        # of them need feedback; for MC only the incorrect options do.
        if incorrect and not o.feedback.strip():
            bad("MissingIncorrectFeedback", f"options[{o.id}]", "incorrect option without feedback text")

    option_ids = [o.id for o in rat.options]
    if len(set(option_ids)) != len(option_ids):
        bad("DuplicateOptionId", "options", "option ids must be unique")

    if concept_topics is not None:
        for concept in sorted(rat.concepts):
            topic = concept_topics.get(concept)
            if topic is None:
                bad("UnknownConcept", "concepts", f"concept {concept} does not exist")
            elif topic not in rat.topics:
                bad("ConceptOutsideTopics", "concepts", f"concept {concept} belongs to topic {topic}, not referenced")

    if valid_criteria is not None:
        for criterion in sorted(rat.criteria):
            if criterion not in valid_criteria:
                bad("UnknownCriterion", "criteria", f"criterion {criterion} is not in the catalog")

    return violations


def utcnow() -> datetime:
    return datetime.now(timezone.utc)

"""Grading and elaborated feedback.

``grade`` is the pure verdict function for all three question kinds; feedback
assembly pairs the evaluative verdict (correct / incorrect / ungraded) with
the informative component: the answer-specific feedback of every chosen
incorrect option, followed by the item's general feedback.  The store-backed
session flow lives in :mod:`rats.services`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Union

from .errors import ShapeMismatch
from .model import AnswerOption, QuestionKind, RAT, Response, normalize_answer


@dataclass(frozen=True)
class FeedbackBlock:
    """One informative feedback fragment, rendered as rich text by the UI."""

    kind: str  # "option" or "general"
    text: str
    option_id: Optional[str] = None


@dataclass(frozen=True)
class GradedResult:
    correct: Optional[bool]  # None = ungraded
    evaluative: str  # "correct" | "incorrect" | "ungraded"
    informative: tuple[FeedbackBlock, ...]
    updated_levels: Optional[Mapping[str, Optional[Fraction]]] = None


@dataclass(frozen=True)
class SheetSession:
    """A student's pass through one sheet; the cursor advances by exactly one
    per submission and the session completes when it reaches the end."""

    id: str
    student: str
    sheet: str
    cursor: int = 0
    completed: bool = False


def grade(rat: RAT, response: Response) -> Optional[bool]:
    """Verdict for a response; None means ungraded (open-ended, no match).

    Multiple choice is true iff the single chosen option is the correct one;
    multiple true/false is all-or-nothing over the statements; open-ended
    compares the normalized response against the accepted answers and leaves
    unmatched responses ungraded rather than wrong.

    Raises ShapeMismatch when the response does not fit the question kind.
    """
    if rat.kind is QuestionKind.MULTIPLE_CHOICE:
        if not isinstance(response, str):
            raise ShapeMismatch("multiple choice expects a chosen option id")
        chosen = _option(rat, response)
        return bool(chosen.is_correct)
    if rat.kind is QuestionKind.MULTI_TRUE_FALSE:
        if not isinstance(response, Mapping):
            raise ShapeMismatch("multiple true/false expects {statement id: bool}")
        expected = {o.id for o in rat.options}
        got = set(response.keys())
        if expected != got:
            raise ShapeMismatch(f"statement ids {sorted(got)} do not match item statements {sorted(expected)}")
        for option in rat.options:
            value = response[option.id]
            if not isinstance(value, bool):
                raise ShapeMismatch(f"statement {option.id}: expected a boolean")
            if value is not option.truth_value:
                return False
        return True
    if rat.kind is QuestionKind.OPEN_ENDED:
        if not isinstance(response, str):
            raise ShapeMismatch("open-ended expects free text")
        normalized = normalize_answer(response)
        accepted = {normalize_answer(a) for a in rat.accepted_answers}
        return True if normalized in accepted else None
    raise ShapeMismatch(f"unknown question kind: {rat.kind}")


def _option(rat: RAT, option_id: str) -> AnswerOption:
    for option in rat.options:
        if option.id == option_id:
            return option
    raise ShapeMismatch(f"option {option_id} is not part of this item")


def wrong_choices(rat: RAT, response: Response) -> list[AnswerOption]:
    """The chosen incorrect options: the picked option when it is wrong (MC),
    or every statement whose submitted truth value mismatches (multi-T/F)."""
    if rat.kind is QuestionKind.MULTIPLE_CHOICE and isinstance(response, str):
        chosen = _option(rat, response)
        return [] if chosen.is_correct else [chosen]
    if rat.kind is QuestionKind.MULTI_TRUE_FALSE and isinstance(response, Mapping):
        return [o for o in rat.options if response.get(o.id) is not o.truth_value]
    return []


def assemble_feedback(rat: RAT, response: Response, correct: Optional[bool]) -> GradedResult:
    """Build the elaborated-feedback result for one graded response."""
    blocks: list[FeedbackBlock] = []
    if correct is False:
        for option in wrong_choices(rat, response):
            if option.feedback.strip():
                blocks.append(FeedbackBlock("option", option.feedback, option.id))
    if rat.general_feedback.strip():
        blocks.append(FeedbackBlock("general", rat.general_feedback))
    evaluative = "ungraded" if correct is None else ("correct" if correct else "incorrect")
    return GradedResult(correct=correct, evaluative=evaluative, informative=tuple(blocks))


def order_scaffolds(scaffolds, approval_threshold: int):
    """Approved scaffolds only, best mean rating first, ties by id."""
    visible = [s for s in scaffolds if s.visible(approval_threshold)]
    return sorted(visible, key=lambda s: (-s.mean_rating(), s.id))

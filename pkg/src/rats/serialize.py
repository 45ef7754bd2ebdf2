"""JSON boundary: domain values in and out of API payloads.

Levels are exact integer ratios internally; here they are rendered as floats
plus a lossless ``exact`` string.  Student-facing RAT payloads hide answer
keys, option feedback, and accepted answers until the item was answered.
"""

from __future__ import annotations

from datetime import date
from fractions import Fraction
from typing import Mapping, Optional

from .analytics import ErrorCategoryReport, StudentStats
from .assessment import GradedResult
from .competence import ProgressionPoint
from .errors import ShapeMismatch
from .model import AnswerOption, PublicationState, QuestionKind, RAT, Role, Scaffold


def fraction_json(value: Optional[Fraction]) -> Optional[dict]:
    if value is None:
        return None
    return {
        "value": float(value),
        "exact": f"{value.numerator}/{value.denominator}",
    }


def parse_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise ShapeMismatch(f"not an ISO date: {text!r}") from None


def option_json(option: AnswerOption, reveal: bool) -> dict:
    data = {"id": option.id, "text": option.text}
    if reveal:
        data["is_correct"] = option.is_correct
        data["truth_value"] = option.truth_value
        data["feedback"] = option.feedback
    return data


def rat_json(rat: RAT, reveal: bool) -> dict:
    """``reveal`` exposes the answer key and feedback (author/reviewer view)."""
    data = {
        "id": rat.id,
        "question": rat.question,
        "kind": rat.kind.value,
        "options": [option_json(o, reveal) for o in rat.options],
        "topics": sorted(rat.topics),
        "concepts": sorted(rat.concepts),
        "lectures": sorted(rat.lectures),
        "criteria": sorted(rat.criteria),
        "is_cross_lecture": rat.is_cross_lecture,
        "state": rat.state.value,
    }
    if reveal:
        data["accepted_answers"] = list(rat.accepted_answers)
        data["general_feedback"] = rat.general_feedback
        data["author"] = rat.author
        data["approvals"] = sorted(rat.approvals)
    return data


def rat_from_payload(payload: Mapping, rat_id: str = "") -> RAT:
    """Build a RAT value from an API payload; authorship and state are set by
    the authoring service."""
    try:
        kind = QuestionKind(payload["kind"])
        options = tuple(
            AnswerOption(
                id=o.get("id") or f"o{i}",
                text=o.get("text", ""),
                is_correct=o.get("is_correct"),
                truth_value=o.get("truth_value"),
                feedback=o.get("feedback", ""),
            )
            for i, o in enumerate(payload.get("options", []))
        )
        return RAT(
            id=rat_id,
            question=payload["question"],
            kind=kind,
            options=options,
            accepted_answers=tuple(payload.get("accepted_answers", [])),
            topics=frozenset(payload.get("topics", [])),
            concepts=frozenset(payload.get("concepts", [])),
            lectures=frozenset(payload.get("lectures", [])),
            criteria=frozenset(int(c) for c in payload.get("criteria", [])),
            is_cross_lecture=bool(payload.get("is_cross_lecture", False)),
            general_feedback=payload.get("general_feedback", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeMismatch(f"malformed RAT payload: {exc}") from None


def scaffold_json(scaffold: Scaffold, approval_threshold: int) -> dict:
    return {
        "id": scaffold.id,
        "rat_id": scaffold.rat_id,
        "kind": scaffold.kind.value,
        "body": scaffold.body,
        "mean_rating": scaffold.mean_rating(),
        "n_ratings": len(scaffold.ratings),
        "approvals": len(scaffold.approvals),
        "visible": scaffold.visible(approval_threshold),
        "suggested_by": scaffold.suggested_by,
    }


def levels_json(levels: Optional[Mapping[str, Optional[Fraction]]]) -> Optional[dict]:
    if levels is None:
        return None
    return {competence: fraction_json(level) for competence, level in levels.items()}


def graded_result_json(result: GradedResult) -> dict:
    return {
        "correct": result.correct,
        "evaluative": result.evaluative,
        "informative": [
            {"kind": b.kind, "text": b.text, "option_id": b.option_id}
            for b in result.informative
        ],
        "updated_levels": levels_json(result.updated_levels),
    }


def progression_json(series: Mapping[str, list[ProgressionPoint]]) -> dict:
    return {
        competence: [
            {"attempt_index": p.attempt_index, "level": fraction_json(p.level)}
            for p in points
        ]
        for competence, points in series.items()
    }


def student_stats_json(stats: StudentStats) -> dict:
    return {
        "n_attempts": stats.n_attempts,
        "n_graded": stats.n_graded,
        "n_correct": stats.n_correct,
        "percent_correct": fraction_json(stats.percent_correct),
        "percent_incorrect": fraction_json(stats.percent_incorrect),
        "per_week": dict(sorted(stats.per_week.items())),
    }


def error_report_json(report: ErrorCategoryReport) -> dict:
    return {
        "always_incorrect": sorted(report.always_incorrect),
        "often_incorrect": sorted(report.often_incorrect),
        "deceptive": [
            {"rat": rat_id, "option": option_id, "share": fraction_json(share)}
            for rat_id, option_id, share in report.deceptive
        ],
        "most_frequent_option": dict(sorted(report.most_frequent_option.items())),
        "per_rat": {
            rat_id: {
                "n": b.n,
                "n_correct": b.n_correct,
                "correct_fraction": fraction_json(b.correct_fraction),
                "option_counts": dict(b.option_counts),
            }
            for rat_id, b in sorted(report.per_rat.items())
        },
    }


def lecture_json(lecture: Mapping, include_code: bool) -> dict:
    data = {
        "id": lecture["id"],
        "name": lecture["name"],
        "audience": lecture["audience"],
        "term": lecture["term"],
        "appointment_dates": [d.isoformat() for d in lecture["appointment_dates"]],
        "lecturers": sorted(lecture["lecturers"]),
    }
    if include_code:
        data["join_code"] = lecture["join_code"]
    return data


def sheet_json(sheet: Mapping) -> dict:
    return {
        "id": sheet["id"],
        "lecture_id": sheet["lecture_id"],
        "name": sheet["name"],
        "rat_ids": list(sheet["rat_ids"]),
        "available_from": sheet["available_from"].isoformat(),
        "origin": sheet["origin"],
    }


def attempt_json(attempt) -> dict:
    return {
        "id": attempt.id,
        "student": attempt.student,
        "rat": attempt.rat,
        "lecture": attempt.lecture,
        "context": attempt.context.value,
        "response": attempt.response,
        "correct": attempt.correct,
        "submitted_at": attempt.submitted_at.isoformat(),
        "is_first_for_rat": attempt.is_first_for_rat,
    }

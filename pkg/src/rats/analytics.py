"""Dashboard aggregations: student statistics, lecturer error categories,
admin creation statistics, and lottery eligibility.

Everything here is a pure, read-only computation over attempt/RAT values, so
it can run concurrently with writers under snapshot reads.  The misconception
signals follow strict thresholds: "often incorrect" means correct fraction
strictly below 40%, "deceptive" means one incorrect option drew strictly more
than 30% of all answers to the item.  Fractions keep the boundary cases exact.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .model import Attempt, QuestionKind, RAT

OFTEN_INCORRECT_THRESHOLD = Fraction(40, 100)
DECEPTIVE_SHARE_THRESHOLD = Fraction(30, 100)
LOTTERY_MIN_LOGINS = 4
LOTTERY_MIN_GAP = timedelta(hours=24)


def iso_week(at: datetime) -> str:
    """ISO-8601 week key (Monday start), e.g. '2023-W05'."""
    year, week, _ = at.isocalendar()
    return f"{year}-W{week:02d}"


@dataclass(frozen=True)
class StudentStats:
    n_attempts: int
    n_graded: int
    n_correct: int
    percent_correct: Optional[Fraction]
    percent_incorrect: Optional[Fraction]
    per_week: Mapping[str, int]


def student_stats(attempts: Sequence[Attempt]) -> StudentStats:
    """Performance statistics over every attempt, repeats included.

    Ungraded attempts are excluded from the correct/incorrect percentages but
    still count in the weekly activity buckets.
    """
    graded = [a for a in attempts if a.graded]
    correct = sum(1 for a in graded if a.correct)
    per_week: dict[str, int] = {}
    for a in attempts:
        key = iso_week(a.submitted_at)
        per_week[key] = per_week.get(key, 0) + 1
    if graded:
        pct_correct = Fraction(correct, len(graded))
        pct_incorrect = 1 - pct_correct
    else:
        pct_correct = pct_incorrect = None
    return StudentStats(
        n_attempts=len(attempts),
        n_graded=len(graded),
        n_correct=correct,
        percent_correct=pct_correct,
        percent_incorrect=pct_incorrect,
        per_week=per_week,
    )


def first_graded(attempts: Iterable[Attempt]) -> list[Attempt]:
    """The earliest graded attempt per (student, RAT), in submission order.

    This is the stream that feeds both competence profiles and misconception
    statistics; later repeats only affect practice statistics.
    """
    ordered = sorted(attempts, key=lambda a: (a.submitted_at, a.id))
    seen: set[tuple[str, str]] = set()
    result = []
    for a in ordered:
        if not a.graded:
            continue
        key = (a.student, a.rat)
        if key in seen:
            continue
        seen.add(key)
        result.append(a)
    return result


@dataclass(frozen=True)
class RatBreakdown:
    n: int
    n_correct: int
    correct_fraction: Fraction
    option_counts: Mapping[str, int]  # chosen-option counts, MC items only


@dataclass(frozen=True)
class ErrorCategoryReport:
    always_incorrect: frozenset[str]
    often_incorrect: frozenset[str]
    deceptive: tuple[tuple[str, str, Fraction], ...]  # (rat, option, share)
    most_frequent_option: Mapping[str, str]
    per_rat: Mapping[str, RatBreakdown]


def classify_errors(
    attempts: Iterable[Attempt],
    rats: Mapping[str, RAT],
    min_answers: int = 5,
) -> ErrorCategoryReport:
    """Error categories over RATs with at least ``min_answers`` graded first
    attempts.

    The deceptive-answer share is counted against ALL answers to the item,
    not only the wrong ones.  Option-level categories (deceptive, most
    frequent option) apply to multiple-choice items, where a single chosen
    option exists per answer.
    """
    stream = first_graded(attempts)
    by_rat: dict[str, list[Attempt]] = {}
    for a in stream:
        by_rat.setdefault(a.rat, []).append(a)

    always: set[str] = set()
    often: set[str] = set()
    deceptive: list[tuple[str, str, Fraction]] = []
    most_frequent: dict[str, str] = {}
    per_rat: dict[str, RatBreakdown] = {}

    for rat_id, group in sorted(by_rat.items()):
        n = len(group)
        if n < min_answers:
            continue
        n_correct = sum(1 for a in group if a.correct)
        fraction = Fraction(n_correct, n)
        if n_correct == 0:
            always.add(rat_id)
        if fraction < OFTEN_INCORRECT_THRESHOLD:
            often.add(rat_id)

        rat = rats.get(rat_id)
        option_counts: dict[str, int] = {}
        if rat is not None and rat.kind is QuestionKind.MULTIPLE_CHOICE:
            for a in group:
                if isinstance(a.response, str):
                    option_counts[a.response] = option_counts.get(a.response, 0) + 1
            incorrect_ids = {o.id for o in rat.options if not o.is_correct}
            for option_id in sorted(option_counts):
                share = Fraction(option_counts[option_id], n)
                if option_id in incorrect_ids and share > DECEPTIVE_SHARE_THRESHOLD:
                    deceptive.append((rat_id, option_id, share))
            if option_counts:
                top = max(option_counts.values())
                most_frequent[rat_id] = min(k for k, v in option_counts.items() if v == top)

        per_rat[rat_id] = RatBreakdown(
            n=n, n_correct=n_correct, correct_fraction=fraction, option_counts=option_counts
        )

    return ErrorCategoryReport(
        always_incorrect=frozenset(always),
        often_incorrect=frozenset(often),
        deceptive=tuple(deceptive),
        most_frequent_option=most_frequent,
        per_rat=per_rat,
    )


def error_report_csv(report: ErrorCategoryReport) -> str:
    """CSV export of the error-category report for offline analysis."""
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(
        ["rat_id", "n", "correct_fraction", "always_incorrect", "often_incorrect",
         "deceptive", "top_option", "top_share"]
    )
    deceptive_by_rat: dict[str, tuple[str, Fraction]] = {}
    for rat_id, option_id, share in report.deceptive:
        current = deceptive_by_rat.get(rat_id)
        if current is None or share > current[1]:
            deceptive_by_rat[rat_id] = (option_id, share)
    for rat_id in sorted(report.per_rat):
        breakdown = report.per_rat[rat_id]
        top_option = report.most_frequent_option.get(rat_id, "")
        top_share = ""
        if top_option:
            top_share = f"{float(Fraction(breakdown.option_counts[top_option], breakdown.n)):.4f}"
        writer.writerow(
            [
                rat_id,
                breakdown.n,
                f"{float(breakdown.correct_fraction):.4f}",
                int(rat_id in report.always_incorrect),
                int(rat_id in report.often_incorrect),
                int(rat_id in deceptive_by_rat),
                top_option,
                top_share,
            ]
        )
    return out.getvalue()


def lottery_eligible(
    logins: Iterable[datetime],
    window: Optional[tuple[datetime, datetime]] = None,
    min_logins: int = LOTTERY_MIN_LOGINS,
    min_gap: timedelta = LOTTERY_MIN_GAP,
) -> bool:
    """True iff some subsequence of >= ``min_logins`` logins inside the window
    keeps at least ``min_gap`` between consecutive picks.

    Greedy works: always taking the earliest login that is far enough from the
    last pick leaves the most room for later picks, so it maximizes the number
    of picks (the standard interval-selection argument).
    """
    times = sorted(logins)
    if window is not None:
        start, end = window
        times = [t for t in times if start <= t <= end]
    picked = 0
    last: Optional[datetime] = None
    for t in times:
        if last is None or t - last >= min_gap:
            picked += 1
            last = t
            if picked >= min_logins:
                return True
    return False


@dataclass(frozen=True)
class CreationBucket:
    lecture: str
    week: str
    creators: Mapping[str, int]


def creation_stats(rats_list: Iterable[RAT]) -> list[CreationBucket]:
    """RATs created per lecture per ISO week, broken down by creator.

    A RAT linked to several lectures counts once per lecture; unlinked RATs
    land in the empty-lecture bucket.
    """
    buckets: dict[tuple[str, str], dict[str, int]] = {}
    for rat in rats_list:
        if rat.created_at is None:
            continue
        week = iso_week(rat.created_at)
        lecture_keys = sorted(rat.lectures) or [""]
        for lecture in lecture_keys:
            creators = buckets.setdefault((lecture, week), {})
            creators[rat.author] = creators.get(rat.author, 0) + 1
    return [
        CreationBucket(lecture=lecture, week=week, creators=dict(creators))
        for (lecture, week), creators in sorted(buckets.items())
    ]

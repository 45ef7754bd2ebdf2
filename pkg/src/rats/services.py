"""Store-backed assessment and analytics flows.

The assessment service records attempts, walks sheet sessions, serves
scaffolds during a RAT, and answers the competence queries that back the
student dashboard.  Competence profiles are not stored: they are folds over
the recorded first graded attempts, so retroactive manual grading of
open-ended answers is picked up automatically.
"""

from __future__ import annotations

import dataclasses
from datetime import date
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import analytics, competence
from .assessment import GradedResult, SheetSession, assemble_feedback, grade, order_scaffolds
from .competence import Competence, CriterionCatalog
from .config import Config
from .errors import (
    CursorConflict,
    EmptyBody,
    Forbidden,
    InvalidState,
    NotAnswered,
    NotAvailable,
    NotFound,
    NotMember,
    NotViewed,
    OutOfRange,
    RatNotPublished,
    SessionComplete,
)
from .model import (
    Attempt,
    AttemptContext,
    PublicationState,
    RAT,
    Response,
    Role,
    Scaffold,
    ScaffoldKind,
    check_access,
)
from .review import notify_thread
from .store import Stores, new_id


def profile_stream(attempts: Sequence[Attempt]) -> list[tuple[Mapping[str, int], bool]]:
    """(counts, correct) pairs of the earliest graded attempt per RAT, in
    submission order: the input to the competence fold."""
    return [(a.counts, bool(a.correct)) for a in analytics.first_graded(attempts)]


class AssessmentService:
    def __init__(self, stores: Stores, config: Config, catalog: CriterionCatalog):
        self.stores = stores
        self.config = config
        self.catalog = catalog

    # -- attempt recording -------------------------------------------------

    def record_answer(
        self,
        student: str,
        rat: RAT,
        response: Response,
        context: AttemptContext,
        lecture_id: Optional[str],
    ) -> tuple[Attempt, Optional[bool]]:
        """Grade and persist one response; returns the attempt and verdict."""
        verdict = grade(rat, response)
        attempt = self.record_pregraded(student, rat, response, verdict, context, lecture_id)
        return attempt, verdict

    def record_pregraded(
        self,
        student: str,
        rat: RAT,
        response: Response,
        verdict: Optional[bool],
        context: AttemptContext,
        lecture_id: Optional[str],
    ) -> Attempt:
        """Persist an already-graded response (the live path grades before it
        tallies, so grading must not run twice)."""
        counts = competence.criteria_counts(rat, self.catalog)
        with self.stores.lock:
            is_first = not self.stores.has_attempt(student, rat.id)
            attempt = Attempt(
                id=new_id(),
                student=student,
                rat=rat.id,
                lecture=lecture_id,
                context=context,
                response=response,
                correct=verdict,
                submitted_at=self.stores.clock(),
                is_first_for_rat=is_first,
                counts={k.value: v for k, v in counts.items()},
            )
            self.stores.record_attempt(attempt)
        return attempt

    # -- sheet sessions ------------------------------------------------------

    def begin_session(self, student: str, sheet_id: str, today: date) -> SheetSession:
        sheet = self.stores.get_sheet(sheet_id)
        if sheet is None:
            raise NotFound(f"sheet {sheet_id} does not exist")
        if not self.stores.is_member(sheet["lecture_id"], student):
            raise NotMember("join the lecture first")
        if sheet["available_from"] > today:
            raise NotAvailable(f"sheet opens on {sheet['available_from'].isoformat()}")
        session = SheetSession(id=new_id(), student=student, sheet=sheet_id)
        self.stores.put_session(session)
        return session

    def submit_answer(
        self, student: str, session_id: str, rat_id: str, response: Response
    ) -> GradedResult:
        session = self.stores.get_session(session_id)
        if session is None:
            raise NotFound(f"session {session_id} does not exist")
        if session.student != student:
            raise Forbidden("not your session")
        if session.completed:
            raise SessionComplete("all RATs of this sheet are answered")
        sheet = self.stores.get_sheet(session.sheet)
        expected = sheet["rat_ids"][session.cursor]
        if rat_id != expected:
            raise CursorConflict(f"session expects RAT {expected}")
        rat = self.stores.get_rat(rat_id)
        if rat is None:
            raise NotFound(f"RAT {rat_id} does not exist")
        if rat.state is not PublicationState.PUBLISHED:
            raise RatNotPublished(f"RAT {rat_id} is not published")

        attempt, verdict = self.record_answer(
            student, rat, response, AttemptContext.SHEET, sheet["lecture_id"]
        )
        advanced = dataclasses.replace(
            session,
            cursor=session.cursor + 1,
            completed=session.cursor + 1 == len(sheet["rat_ids"]),
        )
        self.stores.put_session(advanced)

        result = assemble_feedback(rat, response, verdict)
        if advanced.completed:
            # Finishing the sheet shows the now-updated competence levels.
            result = dataclasses.replace(
                result, updated_levels=self.levels(student, sheet["lecture_id"])
            )
        return result

    def ad_hoc_answer(
        self,
        student: str,
        role: Role,
        rat_id: str,
        response: Response,
        lecture_id: Optional[str] = None,
    ) -> GradedResult:
        """Answer outside a sheet session: an automatically selected RAT of a
        lecture, or a cross-lecture questionnaire item."""
        rat = self.stores.get_rat(rat_id)
        if rat is None:
            raise NotFound(f"RAT {rat_id} does not exist")
        if rat.state is not PublicationState.PUBLISHED:
            raise RatNotPublished(f"RAT {rat_id} is not published")
        if rat.is_cross_lecture:
            if role is not Role.STUDENT:
                raise Forbidden("cross-lecture items are available to students only")
            context, lecture_id = AttemptContext.CROSS_LECTURE, None
        else:
            if lecture_id is None:
                raise NotFound("lecture id required for lecture items")
            if lecture_id not in rat.lectures:
                raise NotFound(f"RAT {rat_id} is not linked to this lecture")
            if not self.stores.is_member(lecture_id, student):
                raise NotMember("join the lecture first")
            context = AttemptContext.AUTO_RATS
        _, verdict = self.record_answer(student, rat, response, context, lecture_id)
        result = assemble_feedback(rat, response, verdict)
        # A single RAT completes immediately, so the refreshed levels ride along.
        return dataclasses.replace(result, updated_levels=self.levels(student, lecture_id))

    # -- manual grading of open-ended answers -----------------------------------

    def grade_attempt(self, actor_role: Role, attempt_id: str, correct: bool) -> Attempt:
        if not check_access(actor_role, Role.LECTURER):
            raise Forbidden("manual grading requires the lecturer role")
        attempt = self.stores.get_attempt(attempt_id)
        if attempt is None:
            raise NotFound(f"attempt {attempt_id} does not exist")
        if attempt.graded:
            raise InvalidState("attempt already has a verdict")
        self.stores.set_attempt_verdict(attempt_id, correct)
        return self.stores.get_attempt(attempt_id)

    def ungraded_attempts(self, actor_role: Role) -> list[Attempt]:
        if not check_access(actor_role, Role.LECTURER):
            raise Forbidden("manual grading requires the lecturer role")
        return [a for a in self.stores.attempts_where() if not a.graded]

    # -- competence queries ---------------------------------------------------------

    def levels(
        self, student: str, lecture_id: Optional[str] = None
    ) -> dict[str, Optional[Fraction]]:
        """Relative competence levels; scoped to a lecture, or the aggregate
        over every attempt when no lecture is given."""
        attempts = self.stores.attempts_where(student=student, lecture=lecture_id)
        profile = competence.fold_attempts(profile_stream(attempts), student, lecture_id)
        return {
            c.value: competence.relative_level(profile, c) for c in competence.COMPETENCES
        }

    def progression(
        self, student: str, lecture_id: Optional[str] = None
    ) -> dict[str, list[competence.ProgressionPoint]]:
        attempts = self.stores.attempts_where(student=student, lecture=lecture_id)
        series = competence.progression_series(profile_stream(attempts))
        return {c.value: points for c, points in series.items()}

    # -- scaffolds during a RAT ---------------------------------------------------

    def scaffolds_for(self, actor: str, role: Role, rat_id: str) -> list[Scaffold]:
        """Approved scaffolds, best-rated first.  Fetching marks them viewed
        by the actor and logs the access event."""
        rat = self.stores.get_rat(rat_id)
        if rat is None:
            raise NotFound(f"RAT {rat_id} does not exist")
        ordered = order_scaffolds(
            self.stores.scaffolds_for_rat(rat_id), self.config.scaffold_approval_threshold
        )
        for scaffold in ordered:
            self.stores.mark_scaffold_viewed(scaffold.id, actor)
        self.stores.log("scaffold_access", user=actor, subject=rat_id)
        return ordered

    def rate_scaffold(self, actor: str, scaffold_id: str, stars: int) -> float:
        if not 1 <= stars <= 5:
            raise OutOfRange("rating must be between 1 and 5 stars")
        scaffold = self.stores.get_scaffold(scaffold_id)
        if scaffold is None:
            raise NotFound(f"scaffold {scaffold_id} does not exist")
        if not self.stores.has_viewed_scaffold(scaffold_id, actor):
            raise NotViewed("view the scaffold before rating it")
        self.stores.rate_scaffold(scaffold_id, actor, stars)
        return self.stores.get_scaffold(scaffold_id).mean_rating()

    # -- student reactions to a RAT --------------------------------------------------

    def _require_answered(self, student: str, rat_id: str) -> RAT:
        rat = self.stores.get_rat(rat_id)
        if rat is None:
            raise NotFound(f"RAT {rat_id} does not exist")
        if not self.stores.has_attempt(student, rat_id):
            raise NotAnswered("answer the RAT first")
        return rat

    def suggest_scaffold(
        self, student: str, rat_id: str, kind: ScaffoldKind, body: str
    ) -> Scaffold:
        rat = self._require_answered(student, rat_id)
        if not body.strip():
            raise EmptyBody("scaffold body must not be empty")
        scaffold = Scaffold(
            id=new_id(), rat_id=rat.id, kind=kind, body=body,
            suggested_by=student, created_at=self.stores.clock(),
        )
        self.stores.put_scaffold(scaffold)  # enters the review queue unapproved
        return scaffold

    def comment_on_rat(self, student: str, rat_id: str, body: str) -> dict:
        rat = self._require_answered(student, rat_id)
        if not body.strip():
            raise EmptyBody("comment body must not be empty")
        return notify_thread(self.stores, rat, student, body)

    def report_error(self, student: str, rat_id: str, body: str) -> dict:
        rat = self._require_answered(student, rat_id)
        if not body.strip():
            raise EmptyBody("report body must not be empty")
        report = self.stores.add_error_report(rat.id, student, body)
        author_account = self.stores.account(rat.author)
        if author_account is not None:
            self.stores.add_notification(
                to=author_account["email"],
                subject=f"Possible error reported on RAT {rat.id}",
                body=f"RAT {rat.id}: {body}",
            )
        return report


class AnalyticsService:
    def __init__(self, stores: Stores, config: Config):
        self.stores = stores
        self.config = config

    def student_stats(self, student: str, lecture_id: Optional[str] = None) -> analytics.StudentStats:
        attempts = self.stores.attempts_where(student=student, lecture=lecture_id)
        return analytics.student_stats(attempts)

    def lecture_error_report(self, lecture_id: str) -> analytics.ErrorCategoryReport:
        attempts = self.stores.attempts_where(lecture=lecture_id)
        rats = {rat.id: rat for rat in self.stores.list_rats()}
        return analytics.classify_errors(
            attempts, rats, self.config.min_answers_for_classification
        )

    def lottery_eligible(self, student: str, window=None) -> bool:
        return analytics.lottery_eligible(self.stores.login_times(student), window)

    def creation_stats(self) -> list[analytics.CreationBucket]:
        return analytics.creation_stats(self.stores.list_rats())

"""Dual persistent stores.

The content store holds everything the application operates on (RATs, sheets,
attempts, lectures, logs) keyed by pseudonymous user ids.  Personal user data
(email, password hash, demographics) lives only in the user store, which maps
real identity to pseudonym; deleting an account removes the user-store row
while attempts and log entries survive under the pseudonym.  The notification
outbox addresses real emails and therefore also lives in the user store.

Single-process service: writes are serialized by a re-entrant lock so that
multi-entity mutations (approval transitions, attempt recording) appear
atomic.  SQLite in-memory or file databases are the default backends.
"""

from __future__ import annotations

import json
import logging
import threading
import uuid
from datetime import date, datetime, timezone
from typing import Callable, Iterable, Optional, Sequence

import sqlalchemy as sa
from sqlalchemy.pool import StaticPool

# One JSON line per audit event; `rats serve` attaches a stream handler.
audit_log = logging.getLogger("rats.audit")

from . import model
from .model import (
    AnswerOption,
    Attempt,
    AttemptContext,
    PublicationState,
    QuestionKind,
    RAT,
    Role,
    Scaffold,
    ScaffoldKind,
)

CONTENT_METADATA = sa.MetaData()
USER_METADATA = sa.MetaData()

topics = sa.Table(
    "topics",
    CONTENT_METADATA,
    sa.Column("id", sa.Text, primary_key=True),
    sa.Column("name", sa.Text, nullable=False),
)

concepts = sa.Table(
    "concepts",
    CONTENT_METADATA,
    sa.Column("id", sa.Text, primary_key=True),
    sa.Column("topic_id", sa.Text, nullable=False),
    sa.Column("name", sa.Text, nullable=False),
)

lectures = sa.Table(
    "lectures",
    CONTENT_METADATA,
    sa.Column("id", sa.Text, primary_key=True),
    sa.Column("name", sa.Text, nullable=False),
    sa.Column("audience", sa.Text, nullable=False, default=""),
    sa.Column("term", sa.Text, nullable=False, default=""),
    sa.Column("join_code", sa.Text, nullable=False),
    sa.Column("appointment_dates", sa.JSON, nullable=False),
    sa.Column("lecturers", sa.JSON, nullable=False),
)

memberships = sa.Table(
    "memberships",
    CONTENT_METADATA,
    sa.Column("lecture_id", sa.Text, primary_key=True),
    sa.Column("student_id", sa.Text, primary_key=True),
)

rats = sa.Table(
    "rats",
    CONTENT_METADATA,
    sa.Column("id", sa.Text, primary_key=True),
    sa.Column("question", sa.Text, nullable=False),
    sa.Column("kind", sa.Text, nullable=False),
    sa.Column("options", sa.JSON, nullable=False),
    sa.Column("accepted_answers", sa.JSON, nullable=False),
    sa.Column("topics", sa.JSON, nullable=False),
    sa.Column("concepts", sa.JSON, nullable=False),
    sa.Column("lectures", sa.JSON, nullable=False),
    sa.Column("criteria", sa.JSON, nullable=False),
    sa.Column("is_cross_lecture", sa.Boolean, nullable=False),
    sa.Column("general_feedback", sa.Text, nullable=False),
    sa.Column("author_id", sa.Text, nullable=False),
    sa.Column("state", sa.Text, nullable=False),
    sa.Column("approvals", sa.JSON, nullable=False),
    sa.Column("created_at", sa.Text, nullable=False),
)

scaffolds = sa.Table(
    "scaffolds",
    CONTENT_METADATA,
    sa.Column("id", sa.Text, primary_key=True),
    sa.Column("rat_id", sa.Text, nullable=False, index=True),
    sa.Column("kind", sa.Text, nullable=False),
    sa.Column("body", sa.Text, nullable=False),
    sa.Column("approvals", sa.JSON, nullable=False),
    sa.Column("suggested_by", sa.Text, nullable=False),
    sa.Column("created_at", sa.Text, nullable=False),
)

scaffold_ratings = sa.Table(
    "scaffold_ratings",
    CONTENT_METADATA,
    sa.Column("scaffold_id", sa.Text, primary_key=True),
    sa.Column("user_id", sa.Text, primary_key=True),
    sa.Column("stars", sa.Integer, nullable=False),
)

scaffold_views = sa.Table(
    "scaffold_views",
    CONTENT_METADATA,
    sa.Column("scaffold_id", sa.Text, primary_key=True),
    sa.Column("user_id", sa.Text, primary_key=True),
    sa.Column("at", sa.Text, nullable=False),
)

syllabus_entries = sa.Table(
    "syllabus_entries",
    CONTENT_METADATA,
    sa.Column("lecture_id", sa.Text, primary_key=True),
    sa.Column("date", sa.Text, primary_key=True),
    sa.Column("topics", sa.JSON, nullable=False),
    sa.Column("concepts", sa.JSON, nullable=False),
)

sheets = sa.Table(
    "sheets",
    CONTENT_METADATA,
    sa.Column("id", sa.Text, primary_key=True),
    sa.Column("lecture_id", sa.Text, nullable=False, index=True),
    sa.Column("name", sa.Text, nullable=False),
    sa.Column("rat_ids", sa.JSON, nullable=False),
    sa.Column("available_from", sa.Text, nullable=False),
    sa.Column("origin", sa.Text, nullable=False),
    sa.Column("created_at", sa.Text, nullable=False),
)

sheet_sessions = sa.Table(
    "sheet_sessions",
    CONTENT_METADATA,
    sa.Column("id", sa.Text, primary_key=True),
    sa.Column("student_id", sa.Text, nullable=False, index=True),
    sa.Column("sheet_id", sa.Text, nullable=False, index=True),
    sa.Column("cursor", sa.Integer, nullable=False),
    sa.Column("completed", sa.Boolean, nullable=False),
    sa.Column("created_at", sa.Text, nullable=False),
)

attempts = sa.Table(
    "attempts",
    CONTENT_METADATA,
    sa.Column("id", sa.Text, primary_key=True),
    sa.Column("student_id", sa.Text, nullable=False, index=True),
    sa.Column("rat_id", sa.Text, nullable=False, index=True),
    sa.Column("lecture_id", sa.Text, nullable=True, index=True),
    sa.Column("context", sa.Text, nullable=False),
    sa.Column("response", sa.JSON, nullable=False),
    sa.Column("correct", sa.Boolean, nullable=True),
    sa.Column("counts", sa.JSON, nullable=False),
    sa.Column("is_first", sa.Boolean, nullable=False),
    sa.Column("submitted_at", sa.Text, nullable=False),
)

review_comments = sa.Table(
    "review_comments",
    CONTENT_METADATA,
    sa.Column("id", sa.Text, primary_key=True),
    sa.Column("rat_id", sa.Text, nullable=False, index=True),
    sa.Column("author_id", sa.Text, nullable=False),
    sa.Column("body", sa.Text, nullable=False),
    sa.Column("at", sa.Text, nullable=False),
)

review_subscribers = sa.Table(
    "review_subscribers",
    CONTENT_METADATA,
    sa.Column("rat_id", sa.Text, primary_key=True),
    sa.Column("user_id", sa.Text, primary_key=True),
)

error_reports = sa.Table(
    "error_reports",
    CONTENT_METADATA,
    sa.Column("id", sa.Text, primary_key=True),
    sa.Column("rat_id", sa.Text, nullable=False, index=True),
    sa.Column("author_id", sa.Text, nullable=False),
    sa.Column("body", sa.Text, nullable=False),
    sa.Column("at", sa.Text, nullable=False),
)

logs = sa.Table(
    "logs",
    CONTENT_METADATA,
    sa.Column("id", sa.Integer, primary_key=True, autoincrement=True),
    sa.Column("at", sa.Text, nullable=False),
    sa.Column("user_id", sa.Text, nullable=True, index=True),
    sa.Column("action", sa.Text, nullable=False),
    sa.Column("subject", sa.Text, nullable=True),
)

accounts = sa.Table(
    "accounts",
    USER_METADATA,
    sa.Column("pseudonym", sa.Text, primary_key=True),
    sa.Column("email", sa.Text, nullable=False, unique=True),
    sa.Column("password_hash", sa.LargeBinary, nullable=False),
    sa.Column("role", sa.Text, nullable=False),
    sa.Column("terms_accepted", sa.Boolean, nullable=False),
    sa.Column("email_verified", sa.Boolean, nullable=False),
    sa.Column("verify_token", sa.Text, nullable=True),
    sa.Column("age", sa.Integer, nullable=True),
    sa.Column("gender", sa.Text, nullable=True),
    sa.Column("preferences", sa.JSON, nullable=False),
    sa.Column("created_at", sa.Text, nullable=False),
)

tokens = sa.Table(
    "tokens",
    USER_METADATA,
    sa.Column("token", sa.Text, primary_key=True),
    sa.Column("pseudonym", sa.Text, nullable=False, index=True),
    sa.Column("issued_at", sa.Text, nullable=False),
)

outbox = sa.Table(
    "outbox",
    USER_METADATA,
    sa.Column("id", sa.Integer, primary_key=True, autoincrement=True),
    sa.Column("to", sa.Text, nullable=False),
    sa.Column("subject", sa.Text, nullable=False),
    sa.Column("body", sa.Text, nullable=False),
    sa.Column("created_at", sa.Text, nullable=False),
)


def _make_engine(url: str) -> sa.Engine:
    if url.startswith("sqlite"):
        # One shared connection so :memory: databases survive across sessions
        # and threads; our store lock serializes writes anyway.
        return sa.create_engine(
            url, poolclass=StaticPool, connect_args={"check_same_thread": False}
        )
    return sa.create_engine(url)


def _iso(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.isoformat()


def _from_iso(text: str) -> datetime:
    return datetime.fromisoformat(text)


def new_id() -> str:
    return uuid.uuid4().hex


def _rat_to_row(rat: RAT) -> dict:
    return {
        "id": rat.id,
        "question": rat.question,
        "kind": rat.kind.value,
        "options": [
            {
                "id": o.id,
                "text": o.text,
                "is_correct": o.is_correct,
                "truth_value": o.truth_value,
                "feedback": o.feedback,
            }
            for o in rat.options
        ],
        "accepted_answers": list(rat.accepted_answers),
        "topics": sorted(rat.topics),
        "concepts": sorted(rat.concepts),
        "lectures": sorted(rat.lectures),
        "criteria": sorted(rat.criteria),
        "is_cross_lecture": rat.is_cross_lecture,
        "general_feedback": rat.general_feedback,
        "author_id": rat.author,
        "state": rat.state.value,
        "approvals": sorted(rat.approvals),
        "created_at": _iso(rat.created_at or model.utcnow()),
    }


def _rat_from_row(row) -> RAT:
    return RAT(
        id=row.id,
        question=row.question,
        kind=QuestionKind(row.kind),
        options=tuple(
            AnswerOption(
                id=o["id"],
                text=o["text"],
                is_correct=o["is_correct"],
                truth_value=o["truth_value"],
                feedback=o["feedback"],
            )
            for o in row.options
        ),
        accepted_answers=tuple(row.accepted_answers),
        topics=frozenset(row.topics),
        concepts=frozenset(row.concepts),
        lectures=frozenset(row.lectures),
        criteria=frozenset(row.criteria),
        is_cross_lecture=row.is_cross_lecture,
        general_feedback=row.general_feedback,
        author=row.author_id,
        state=PublicationState(row.state),
        approvals=frozenset(row.approvals),
        created_at=_from_iso(row.created_at),
    )


def _attempt_to_row(attempt: Attempt) -> dict:
    return {
        "id": attempt.id,
        "student_id": attempt.student,
        "rat_id": attempt.rat,
        "lecture_id": attempt.lecture,
        "context": attempt.context.value,
        "response": attempt.response if not isinstance(attempt.response, str) else attempt.response,
        "correct": attempt.correct,
        "counts": {str(k): v for k, v in attempt.counts.items()},
        "is_first": attempt.is_first_for_rat,
        "submitted_at": _iso(attempt.submitted_at),
    }


def _attempt_from_row(row) -> Attempt:
    return Attempt(
        id=row.id,
        student=row.student_id,
        rat=row.rat_id,
        lecture=row.lecture_id,
        context=AttemptContext(row.context),
        response=row.response,
        correct=row.correct,
        submitted_at=_from_iso(row.submitted_at),
        is_first_for_rat=row.is_first,
        counts=dict(row.counts),
    )


class Stores:
    """Facade over the content and user databases."""

    def __init__(
        self,
        content_url: str = "sqlite:///:memory:",
        user_url: str = "sqlite:///:memory:",
        clock: Callable[[], datetime] = model.utcnow,
    ):
        self.content = _make_engine(content_url)
        self.users = _make_engine(user_url)
        self.clock = clock
        self.lock = threading.RLock()

    def migrate(self) -> None:
        CONTENT_METADATA.create_all(self.content)
        USER_METADATA.create_all(self.users)

    # -- generic helpers ---------------------------------------------------

    def _upsert(self, conn, table: sa.Table, pk: dict, values: dict) -> None:
        conds = [table.c[k] == v for k, v in pk.items()]
        existing = conn.execute(sa.select(table).where(*conds)).first()
        if existing is None:
            conn.execute(sa.insert(table).values(**pk, **values))
        elif values:
            conn.execute(sa.update(table).where(*conds).values(**values))

    # -- topics / concepts ---------------------------------------------------

    def put_topic(self, topic_id: str, name: str) -> None:
        with self.lock, self.content.begin() as conn:
            self._upsert(conn, topics, {"id": topic_id}, {"name": name})

    def put_concept(self, concept_id: str, topic_id: str, name: str) -> None:
        with self.lock, self.content.begin() as conn:
            self._upsert(conn, concepts, {"id": concept_id}, {"topic_id": topic_id, "name": name})

    def concept_topics(self) -> dict[str, str]:
        with self.content.connect() as conn:
            rows = conn.execute(sa.select(concepts.c.id, concepts.c.topic_id)).all()
        return {r.id: r.topic_id for r in rows}

    def list_topics(self) -> list[dict]:
        with self.content.connect() as conn:
            rows = conn.execute(sa.select(topics)).all()
        return [{"id": r.id, "name": r.name} for r in rows]

    def list_concepts(self) -> list[dict]:
        with self.content.connect() as conn:
            rows = conn.execute(sa.select(concepts)).all()
        return [{"id": r.id, "topic_id": r.topic_id, "name": r.name} for r in rows]

    # -- lectures ------------------------------------------------------------

    def put_lecture(
        self,
        lecture_id: str,
        name: str,
        audience: str,
        term: str,
        join_code: str,
        appointment_dates: Sequence[date],
        lecturer_ids: Iterable[str],
    ) -> None:
        values = {
            "name": name,
            "audience": audience,
            "term": term,
            "join_code": join_code,
            "appointment_dates": [d.isoformat() for d in appointment_dates],
            "lecturers": sorted(set(lecturer_ids)),
        }
        with self.lock, self.content.begin() as conn:
            self._upsert(conn, lectures, {"id": lecture_id}, values)

    def get_lecture(self, lecture_id: str) -> Optional[dict]:
        with self.content.connect() as conn:
            row = conn.execute(sa.select(lectures).where(lectures.c.id == lecture_id)).first()
        return None if row is None else self._lecture_dict(row)

    def list_lectures(self) -> list[dict]:
        with self.content.connect() as conn:
            rows = conn.execute(sa.select(lectures)).all()
        return [self._lecture_dict(r) for r in rows]

    @staticmethod
    def _lecture_dict(row) -> dict:
        return {
            "id": row.id,
            "name": row.name,
            "audience": row.audience,
            "term": row.term,
            "join_code": row.join_code,
            "appointment_dates": [date.fromisoformat(d) for d in row.appointment_dates],
            "lecturers": set(row.lecturers),
        }

    def add_member(self, lecture_id: str, student_id: str) -> None:
        with self.lock, self.content.begin() as conn:
            self._upsert(conn, memberships, {"lecture_id": lecture_id, "student_id": student_id}, {})

    def is_member(self, lecture_id: str, student_id: str) -> bool:
        with self.content.connect() as conn:
            row = conn.execute(
                sa.select(memberships).where(
                    memberships.c.lecture_id == lecture_id,
                    memberships.c.student_id == student_id,
                )
            ).first()
        return row is not None

    def members(self, lecture_id: str) -> set[str]:
        with self.content.connect() as conn:
            rows = conn.execute(
                sa.select(memberships.c.student_id).where(memberships.c.lecture_id == lecture_id)
            ).all()
        return {r.student_id for r in rows}

    def memberships_of(self, student_id: str) -> set[str]:
        with self.content.connect() as conn:
            rows = conn.execute(
                sa.select(memberships.c.lecture_id).where(memberships.c.student_id == student_id)
            ).all()
        return {r.lecture_id for r in rows}

    # -- syllabus --------------------------------------------------------------

    def set_syllabus(self, lecture_id: str, entries: Sequence[dict]) -> None:
        """Replace the whole syllabus of a lecture.  Entries are dicts with
        date (datetime.date), topics (set), concepts (set)."""
        with self.lock, self.content.begin() as conn:
            conn.execute(sa.delete(syllabus_entries).where(syllabus_entries.c.lecture_id == lecture_id))
            for entry in entries:
                conn.execute(
                    sa.insert(syllabus_entries).values(
                        lecture_id=lecture_id,
                        date=entry["date"].isoformat(),
                        topics=sorted(entry["topics"]),
                        concepts=sorted(entry["concepts"]),
                    )
                )

    def syllabus(self, lecture_id: str) -> list[dict]:
        with self.content.connect() as conn:
            rows = conn.execute(
                sa.select(syllabus_entries).where(syllabus_entries.c.lecture_id == lecture_id)
            ).all()
        return [
            {
                "lecture_id": r.lecture_id,
                "date": date.fromisoformat(r.date),
                "topics": set(r.topics),
                "concepts": set(r.concepts),
            }
            for r in rows
        ]

    # -- RATs -------------------------------------------------------------------

    def put_rat(self, rat: RAT) -> None:
        row = _rat_to_row(rat)
        pk = {"id": row.pop("id")}
        with self.lock, self.content.begin() as conn:
            self._upsert(conn, rats, pk, row)

    def get_rat(self, rat_id: str) -> Optional[RAT]:
        with self.content.connect() as conn:
            row = conn.execute(sa.select(rats).where(rats.c.id == rat_id)).first()
        return None if row is None else _rat_from_row(row)

    def list_rats(self) -> list[RAT]:
        with self.content.connect() as conn:
            rows = conn.execute(sa.select(rats)).all()
        return [_rat_from_row(r) for r in rows]

    # -- scaffolds ----------------------------------------------------------------

    def put_scaffold(self, scaffold: Scaffold) -> None:
        values = {
            "rat_id": scaffold.rat_id,
            "kind": scaffold.kind.value,
            "body": scaffold.body,
            "approvals": sorted(scaffold.approvals),
            "suggested_by": scaffold.suggested_by,
            "created_at": _iso(scaffold.created_at or self.clock()),
        }
        with self.lock, self.content.begin() as conn:
            self._upsert(conn, scaffolds, {"id": scaffold.id}, values)

    def get_scaffold(self, scaffold_id: str) -> Optional[Scaffold]:
        with self.content.connect() as conn:
            row = conn.execute(sa.select(scaffolds).where(scaffolds.c.id == scaffold_id)).first()
            if row is None:
                return None
            ratings = conn.execute(
                sa.select(scaffold_ratings).where(scaffold_ratings.c.scaffold_id == scaffold_id)
            ).all()
        return self._scaffold_from(row, ratings)

    def scaffolds_for_rat(self, rat_id: str) -> list[Scaffold]:
        with self.content.connect() as conn:
            rows = conn.execute(sa.select(scaffolds).where(scaffolds.c.rat_id == rat_id)).all()
            ids = [r.id for r in rows]
            ratings = conn.execute(
                sa.select(scaffold_ratings).where(scaffold_ratings.c.scaffold_id.in_(ids))
            ).all() if ids else []
        by_scaffold: dict[str, list] = {}
        for rating in ratings:
            by_scaffold.setdefault(rating.scaffold_id, []).append(rating)
        return [self._scaffold_from(r, by_scaffold.get(r.id, [])) for r in rows]

    @staticmethod
    def _scaffold_from(row, rating_rows) -> Scaffold:
        return Scaffold(
            id=row.id,
            rat_id=row.rat_id,
            kind=ScaffoldKind(row.kind),
            body=row.body,
            approvals=frozenset(row.approvals),
            ratings=tuple(sorted((r.user_id, r.stars) for r in rating_rows)),
            suggested_by=row.suggested_by,
            created_at=_from_iso(row.created_at),
        )

    def rate_scaffold(self, scaffold_id: str, user_id: str, stars: int) -> None:
        with self.lock, self.content.begin() as conn:
            self._upsert(
                conn,
                scaffold_ratings,
                {"scaffold_id": scaffold_id, "user_id": user_id},
                {"stars": stars},
            )

    def mark_scaffold_viewed(self, scaffold_id: str, user_id: str) -> None:
        with self.lock, self.content.begin() as conn:
            self._upsert(
                conn,
                scaffold_views,
                {"scaffold_id": scaffold_id, "user_id": user_id},
                {"at": _iso(self.clock())},
            )

    def has_viewed_scaffold(self, scaffold_id: str, user_id: str) -> bool:
        with self.content.connect() as conn:
            row = conn.execute(
                sa.select(scaffold_views).where(
                    scaffold_views.c.scaffold_id == scaffold_id,
                    scaffold_views.c.user_id == user_id,
                )
            ).first()
        return row is not None

    # -- sheets and sessions ----------------------------------------------------

    def put_sheet(self, sheet: dict) -> None:
        values = {
            "lecture_id": sheet["lecture_id"],
            "name": sheet["name"],
            "rat_ids": list(sheet["rat_ids"]),
            "available_from": sheet["available_from"].isoformat(),
            "origin": sheet["origin"],
            "created_at": _iso(sheet.get("created_at") or self.clock()),
        }
        with self.lock, self.content.begin() as conn:
            self._upsert(conn, sheets, {"id": sheet["id"]}, values)

    def get_sheet(self, sheet_id: str) -> Optional[dict]:
        with self.content.connect() as conn:
            row = conn.execute(sa.select(sheets).where(sheets.c.id == sheet_id)).first()
        return None if row is None else self._sheet_dict(row)

    def sheets_for_lecture(self, lecture_id: str) -> list[dict]:
        with self.content.connect() as conn:
            rows = conn.execute(sa.select(sheets).where(sheets.c.lecture_id == lecture_id)).all()
        return [self._sheet_dict(r) for r in rows]

    @staticmethod
    def _sheet_dict(row) -> dict:
        return {
            "id": row.id,
            "lecture_id": row.lecture_id,
            "name": row.name,
            "rat_ids": list(row.rat_ids),
            "available_from": date.fromisoformat(row.available_from),
            "origin": row.origin,
        }

    def put_session(self, session) -> None:
        values = {
            "student_id": session.student,
            "sheet_id": session.sheet,
            "cursor": session.cursor,
            "completed": session.completed,
            "created_at": _iso(self.clock()),
        }
        with self.lock, self.content.begin() as conn:
            self._upsert(conn, sheet_sessions, {"id": session.id}, values)

    def get_session(self, session_id: str):
        from .assessment import SheetSession

        with self.content.connect() as conn:
            row = conn.execute(sa.select(sheet_sessions).where(sheet_sessions.c.id == session_id)).first()
        if row is None:
            return None
        return SheetSession(
            id=row.id, student=row.student_id, sheet=row.sheet_id,
            cursor=row.cursor, completed=row.completed,
        )

    # -- attempts -----------------------------------------------------------------

    def record_attempt(self, attempt: Attempt) -> None:
        with self.lock, self.content.begin() as conn:
            conn.execute(sa.insert(attempts).values(**_attempt_to_row(attempt)))

    def set_attempt_verdict(self, attempt_id: str, correct: bool) -> None:
        with self.lock, self.content.begin() as conn:
            conn.execute(
                sa.update(attempts).where(attempts.c.id == attempt_id).values(correct=correct)
            )

    def get_attempt(self, attempt_id: str) -> Optional[Attempt]:
        with self.content.connect() as conn:
            row = conn.execute(sa.select(attempts).where(attempts.c.id == attempt_id)).first()
        return None if row is None else _attempt_from_row(row)

    def attempts_where(
        self,
        student: Optional[str] = None,
        rat: Optional[str] = None,
        lecture: Optional[str] = None,
    ) -> list[Attempt]:
        query = sa.select(attempts)
        if student is not None:
            query = query.where(attempts.c.student_id == student)
        if rat is not None:
            query = query.where(attempts.c.rat_id == rat)
        if lecture is not None:
            query = query.where(attempts.c.lecture_id == lecture)
        query = query.order_by(attempts.c.submitted_at, attempts.c.id)
        with self.content.connect() as conn:
            rows = conn.execute(query).all()
        return [_attempt_from_row(r) for r in rows]

    def has_attempt(self, student: str, rat: str) -> bool:
        with self.content.connect() as conn:
            row = conn.execute(
                sa.select(attempts.c.id).where(
                    attempts.c.student_id == student, attempts.c.rat_id == rat
                )
            ).first()
        return row is not None

    def answered_rat_ids(self, student: str) -> set[str]:
        with self.content.connect() as conn:
            rows = conn.execute(
                sa.select(attempts.c.rat_id).where(attempts.c.student_id == student).distinct()
            ).all()
        return {r.rat_id for r in rows}

    # -- review threads -------------------------------------------------------------

    def add_comment(self, rat_id: str, author_id: str, body: str) -> dict:
        comment = {
            "id": new_id(),
            "rat_id": rat_id,
            "author_id": author_id,
            "body": body,
            "at": _iso(self.clock()),
        }
        with self.lock, self.content.begin() as conn:
            conn.execute(sa.insert(review_comments).values(**comment))
        return comment

    def comments_for(self, rat_id: str) -> list[dict]:
        with self.content.connect() as conn:
            rows = conn.execute(
                sa.select(review_comments)
                .where(review_comments.c.rat_id == rat_id)
                .order_by(review_comments.c.at, review_comments.c.id)
            ).all()
        return [dict(r._mapping) for r in rows]

    def subscribers(self, rat_id: str) -> set[str]:
        with self.content.connect() as conn:
            rows = conn.execute(
                sa.select(review_subscribers.c.user_id).where(review_subscribers.c.rat_id == rat_id)
            ).all()
        return {r.user_id for r in rows}

    def subscribe(self, rat_id: str, user_id: str) -> None:
        with self.lock, self.content.begin() as conn:
            self._upsert(conn, review_subscribers, {"rat_id": rat_id, "user_id": user_id}, {})

    def add_error_report(self, rat_id: str, author_id: str, body: str) -> dict:
        report = {
            "id": new_id(),
            "rat_id": rat_id,
            "author_id": author_id,
            "body": body,
            "at": _iso(self.clock()),
        }
        with self.lock, self.content.begin() as conn:
            conn.execute(sa.insert(error_reports).values(**report))
        return report

    # -- logs ---------------------------------------------------------------------

    def log(self, action: str, user: Optional[str] = None, subject: Optional[str] = None) -> None:
        at = _iso(self.clock())
        with self.lock, self.content.begin() as conn:
            conn.execute(
                sa.insert(logs).values(at=at, user_id=user, action=action, subject=subject)
            )
        audit_log.info(
            json.dumps({"at": at, "user": user, "action": action, "subject": subject})
        )

    def log_entries(
        self,
        user: Optional[str] = None,
        action: Optional[str] = None,
        since: Optional[datetime] = None,
        until: Optional[datetime] = None,
    ) -> list[dict]:
        query = sa.select(logs)
        if user is not None:
            query = query.where(logs.c.user_id == user)
        if action is not None:
            query = query.where(logs.c.action == action)
        if since is not None:
            query = query.where(logs.c.at >= _iso(since))
        if until is not None:
            query = query.where(logs.c.at <= _iso(until))
        query = query.order_by(logs.c.at, logs.c.id)
        with self.content.connect() as conn:
            rows = conn.execute(query).all()
        return [
            {"at": _from_iso(r.at), "user": r.user_id, "action": r.action, "subject": r.subject}
            for r in rows
        ]

    def count_logs(self) -> int:
        with self.content.connect() as conn:
            return conn.execute(sa.select(sa.func.count()).select_from(logs)).scalar_one()

    def login_times(self, user: str) -> list[datetime]:
        return [e["at"] for e in self.log_entries(user=user, action="login")]

    # -- accounts (user store) -------------------------------------------------------

    def create_account(
        self,
        email: str,
        password_hash: bytes,
        role: Role,
        terms_accepted: bool,
        verify_token: Optional[str],
        age: Optional[int] = None,
        gender: Optional[str] = None,
    ) -> str:
        pseudonym = new_id()
        with self.lock, self.users.begin() as conn:
            conn.execute(
                sa.insert(accounts).values(
                    pseudonym=pseudonym,
                    email=email,
                    password_hash=password_hash,
                    role=role.name,
                    terms_accepted=terms_accepted,
                    email_verified=False,
                    verify_token=verify_token,
                    age=age,
                    gender=gender,
                    preferences={},
                    created_at=_iso(self.clock()),
                )
            )
        return pseudonym

    def account_by_email(self, email: str) -> Optional[dict]:
        with self.users.connect() as conn:
            row = conn.execute(sa.select(accounts).where(accounts.c.email == email)).first()
        return None if row is None else self._account_dict(row)

    def account(self, pseudonym: str) -> Optional[dict]:
        with self.users.connect() as conn:
            row = conn.execute(sa.select(accounts).where(accounts.c.pseudonym == pseudonym)).first()
        return None if row is None else self._account_dict(row)

    def account_by_verify_token(self, token: str) -> Optional[dict]:
        with self.users.connect() as conn:
            row = conn.execute(sa.select(accounts).where(accounts.c.verify_token == token)).first()
        return None if row is None else self._account_dict(row)

    @staticmethod
    def _account_dict(row) -> dict:
        return {
            "pseudonym": row.pseudonym,
            "email": row.email,
            "password_hash": row.password_hash,
            "role": Role[row.role],
            "terms_accepted": row.terms_accepted,
            "email_verified": row.email_verified,
            "verify_token": row.verify_token,
            "age": row.age,
            "gender": row.gender,
            "preferences": dict(row.preferences),
            "created_at": _from_iso(row.created_at),
        }

    def update_account(self, pseudonym: str, **values) -> None:
        if "role" in values and isinstance(values["role"], Role):
            values["role"] = values["role"].name
        with self.lock, self.users.begin() as conn:
            conn.execute(sa.update(accounts).where(accounts.c.pseudonym == pseudonym).values(**values))

    def delete_account(self, pseudonym: str) -> None:
        """Remove real identity; content rows keyed by the pseudonym survive."""
        with self.lock, self.users.begin() as conn:
            conn.execute(sa.delete(tokens).where(tokens.c.pseudonym == pseudonym))
            conn.execute(sa.delete(accounts).where(accounts.c.pseudonym == pseudonym))

    # -- tokens ------------------------------------------------------------------------

    def save_token(self, token: str, pseudonym: str) -> None:
        with self.lock, self.users.begin() as conn:
            conn.execute(
                sa.insert(tokens).values(token=token, pseudonym=pseudonym, issued_at=_iso(self.clock()))
            )

    def pseudonym_for_token(self, token: str) -> Optional[str]:
        with self.users.connect() as conn:
            row = conn.execute(sa.select(tokens).where(tokens.c.token == token)).first()
        return None if row is None else row.pseudonym

    def revoke_tokens(self, pseudonym: str) -> None:
        with self.lock, self.users.begin() as conn:
            conn.execute(sa.delete(tokens).where(tokens.c.pseudonym == pseudonym))

    # -- outbox ------------------------------------------------------------------------

    def add_notification(self, to: str, subject: str, body: str) -> None:
        with self.lock, self.users.begin() as conn:
            conn.execute(
                sa.insert(outbox).values(
                    **{"to": to, "subject": subject, "body": body, "created_at": _iso(self.clock())}
                )
            )

    def notifications(self, to: Optional[str] = None) -> list[dict]:
        query = sa.select(outbox).order_by(outbox.c.id)
        if to is not None:
            query = query.where(outbox.c.to == to)
        with self.users.connect() as conn:
            rows = conn.execute(query).all()
        return [
            {"to": r.to, "subject": r.subject, "body": r.body, "created_at": _from_iso(r.created_at)}
            for r in rows
        ]

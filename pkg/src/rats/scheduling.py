"""Lectures, syllabi, sheet generation, cross-lecture pools, live sessions.

Sheet generation is gated by the syllabus: a RAT qualifies for a lecture's
sheet on a date only when every topic and concept it needs has been taught on
or before that date.  Cross-lecture items never appear in regular sheets.

Live sessions are the one hot shared structure; their tallies live in memory
behind a single lock so concurrent submissions from a classroom stay atomic,
and closing the session freezes the numbers.
"""

from __future__ import annotations

import dataclasses
import threading
from dataclasses import dataclass, field
from datetime import date
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .config import Config
from .errors import (
    AlreadyAnswered,
    AlreadyOpen,
    BadCode,
    Forbidden,
    InvalidMember,
    NameTaken,
    NoSyllabus,
    NotFound,
    NotMember,
    SessionClosed,
)
from .model import PublicationState, RAT, Role, check_access
from .store import Stores, new_id


def taught_by(entries: Iterable[Mapping], on: date) -> tuple[frozenset[str], frozenset[str]]:
    """Union of topics and concepts covered on or before ``on`` (inclusive)."""
    topics: set[str] = set()
    concepts: set[str] = set()
    for entry in entries:
        if entry["date"] <= on:
            topics |= entry["topics"]
            concepts |= entry["concepts"]
    return frozenset(topics), frozenset(concepts)


def sheet_pool(
    rats: Iterable[RAT],
    lecture_id: str,
    taught_topics: frozenset[str],
    taught_concepts: frozenset[str],
) -> list[RAT]:
    """All published, non-cross-lecture RATs of the lecture whose topics and
    concepts have all been taught."""
    pool = [
        rat
        for rat in rats
        if rat.state is PublicationState.PUBLISHED
        and not rat.is_cross_lecture
        and lecture_id in rat.lectures
        and rat.topics <= taught_topics
        and rat.concepts <= taught_concepts
    ]
    return sorted(pool, key=lambda r: r.id)


@dataclass
class _LiveRatTally:
    counts: dict[str, int] = field(default_factory=dict)
    n: int = 0
    n_graded: int = 0
    n_correct: int = 0


@dataclass
class _LiveSession:
    id: str
    sheet_id: str
    lecture_id: str
    rat_ids: tuple[str, ...]
    open: bool = True
    tallies: dict[str, _LiveRatTally] = field(default_factory=dict)
    answered: set[tuple[str, str]] = field(default_factory=set)
    participants: set[str] = field(default_factory=set)


class LiveSessionManager:
    """In-memory tallies for running live sessions.

    ``submit`` records one student's first answer per RAT under the manager
    lock, so after N concurrent distinct submissions the totals equal exactly
    the submission multiset.  Duplicate submissions are rejected and leave the
    tallies untouched.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._sessions: dict[str, _LiveSession] = {}

    def open(self, sheet_id: str, lecture_id: str, rat_ids: Sequence[str]) -> str:
        with self._lock:
            for session in self._sessions.values():
                if session.sheet_id == sheet_id and session.open:
                    raise AlreadyOpen(f"sheet {sheet_id} already has an open live session")
            session_id = new_id()
            self._sessions[session_id] = _LiveSession(
                id=session_id,
                sheet_id=sheet_id,
                lecture_id=lecture_id,
                rat_ids=tuple(rat_ids),
                tallies={rat_id: _LiveRatTally() for rat_id in rat_ids},
            )
            return session_id

    def _require(self, session_id: str) -> _LiveSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise NotFound(f"live session {session_id} does not exist")
        return session

    def lecture_of(self, session_id: str) -> str:
        with self._lock:
            return self._require(session_id).lecture_id

    def sheet_of(self, session_id: str) -> str:
        with self._lock:
            return self._require(session_id).sheet_id

    def is_open(self, session_id: str) -> bool:
        with self._lock:
            return self._require(session_id).open

    def submit(
        self, session_id: str, student: str, rat_id: str, key: str, correct: Optional[bool]
    ) -> None:
        """Tally one answer under ``key`` (the chosen option id for multiple
        choice, the verdict for other kinds)."""
        with self._lock:
            session = self._require(session_id)
            if not session.open:
                raise SessionClosed("live session is closed")
            if rat_id not in session.tallies:
                raise NotFound(f"RAT {rat_id} is not part of this live session")
            if (student, rat_id) in session.answered:
                raise AlreadyAnswered("this RAT was already answered in the live session")
            session.answered.add((student, rat_id))
            session.participants.add(student)
            tally = session.tallies[rat_id]
            tally.counts[key] = tally.counts.get(key, 0) + 1
            tally.n += 1
            if correct is not None:
                tally.n_graded += 1
                if correct:
                    tally.n_correct += 1

    def stats(self, session_id: str) -> dict:
        """Per-RAT tallies and correct fractions plus the whole-sheet aggregate."""
        with self._lock:
            session = self._require(session_id)
            per_rat = []
            total = graded = correct = 0
            for rat_id in session.rat_ids:
                tally = session.tallies[rat_id]
                fraction = (
                    tally.n_correct / tally.n_graded if tally.n_graded else None
                )
                per_rat.append(
                    {
                        "rat": rat_id,
                        "tally": dict(tally.counts),
                        "correct_fraction": fraction,
                        "n": tally.n,
                    }
                )
                total += tally.n
                graded += tally.n_graded
                correct += tally.n_correct
            return {
                "type": "stats",
                "session": session_id,
                "open": session.open,
                "per_rat": per_rat,
                "sheet": {
                    "n_answers": total,
                    "correct_fraction": correct / graded if graded else None,
                },
            }

    def close(self, session_id: str) -> dict:
        with self._lock:
            session = self._require(session_id)
            session.open = False
        return self.stats(session_id)


class SchedulingService:
    def __init__(self, stores: Stores, config: Config):
        self.stores = stores
        self.config = config
        self.live = LiveSessionManager()

    # -- lectures ------------------------------------------------------------

    def create_lecture(
        self,
        actor: str,
        role: Role,
        name: str,
        audience: str,
        term: str,
        join_code: str,
        appointment_dates: Sequence[date],
    ) -> dict:
        if not check_access(role, Role.LECTURER):
            raise Forbidden("creating lectures requires the lecturer role")
        if not join_code:
            raise BadCode("join code must not be empty")
        dates = list(appointment_dates)
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise ValueError("appointment dates must be strictly increasing")
        lecture_id = new_id()
        self.stores.put_lecture(lecture_id, name, audience, term, join_code, dates, [actor])
        return self._require_lecture(lecture_id)

    def _require_lecture(self, lecture_id: str) -> dict:
        lecture = self.stores.get_lecture(lecture_id)
        if lecture is None:
            raise NotFound(f"lecture {lecture_id} does not exist")
        return lecture

    def _require_owner(self, actor: str, role: Role, lecture: dict) -> None:
        if role is Role.ADMINISTRATOR:
            return
        if actor not in lecture["lecturers"]:
            raise Forbidden("not a lecturer of this lecture")

    def join_lecture(self, actor: str, lecture_id: str, code: str) -> dict:
        lecture = self._require_lecture(lecture_id)
        if code != lecture["join_code"]:
            raise BadCode("wrong join code")
        self.stores.add_member(lecture_id, actor)  # idempotent
        return lecture

    def require_member(self, actor: str, lecture_id: str) -> None:
        if not self.stores.is_member(lecture_id, actor):
            raise NotMember("join the lecture first")

    # -- syllabus -------------------------------------------------------------

    def set_syllabus(self, actor: str, role: Role, lecture_id: str, entries: Sequence[dict]) -> list[dict]:
        lecture = self._require_lecture(lecture_id)
        self._require_owner(actor, role, lecture)
        allowed = set(lecture["appointment_dates"])
        seen: set[date] = set()
        for entry in entries:
            on = entry["date"]
            if on not in allowed:
                raise ValueError(f"{on.isoformat()} is not an appointment date of the lecture")
            if on in seen:
                raise ValueError(f"duplicate syllabus entry for {on.isoformat()}")
            seen.add(on)
        self.stores.set_syllabus(lecture_id, entries)
        return self.stores.syllabus(lecture_id)

    def taught_by(self, lecture_id: str, on: date) -> tuple[frozenset[str], frozenset[str]]:
        self._require_lecture(lecture_id)
        return taught_by(self.stores.syllabus(lecture_id), on)

    # -- sheet generation ---------------------------------------------------------

    def auto_pool(self, actor: str, role: Role, lecture_id: str, on: date) -> list[RAT]:
        lecture = self._require_lecture(lecture_id)
        self._require_owner(actor, role, lecture)
        entries = self.stores.syllabus(lecture_id)
        if not entries:
            raise NoSyllabus(f"lecture {lecture_id} has no syllabus")
        topics, concepts = taught_by(entries, on)
        return sheet_pool(self.stores.list_rats(), lecture_id, topics, concepts)

    def student_pool(
        self, actor: str, lecture_id: str, on: date, topic: Optional[str] = None
    ) -> list[RAT]:
        """Automatically selected RATs for a student, optionally limited by
        topic.  An empty syllabus simply yields an empty pool here."""
        self._require_lecture(lecture_id)
        self.require_member(actor, lecture_id)
        entries = self.stores.syllabus(lecture_id)
        topics, concepts = taught_by(entries, on)
        pool = sheet_pool(self.stores.list_rats(), lecture_id, topics, concepts)
        if topic is not None:
            pool = [rat for rat in pool if topic in rat.topics]
        return pool

    def _check_sheet_name(self, lecture_id: str, name: str) -> None:
        if not name.strip():
            raise ValueError("sheet name must not be empty")
        for sheet in self.stores.sheets_for_lecture(lecture_id):
            if sheet["name"] == name:
                raise NameTaken(f"sheet name {name!r} already used in this lecture")

    def _check_member_rat(self, lecture_id: str, rat_id: str) -> RAT:
        rat = self.stores.get_rat(rat_id)
        if rat is None:
            raise InvalidMember(rat_id, "Unknown")
        if rat.is_cross_lecture:
            raise InvalidMember(rat_id, "CrossLecture")
        if rat.state is not PublicationState.PUBLISHED:
            raise InvalidMember(rat_id, "NotPublished")
        if lecture_id not in rat.lectures:
            raise InvalidMember(rat_id, "NotLinked")
        return rat

    def create_manual_sheet(
        self,
        actor: str,
        role: Role,
        lecture_id: str,
        name: str,
        rat_ids: Sequence[str],
        available_from: date,
    ) -> dict:
        lecture = self._require_lecture(lecture_id)
        self._require_owner(actor, role, lecture)
        self._check_sheet_name(lecture_id, name)
        for rat_id in rat_ids:
            self._check_member_rat(lecture_id, rat_id)
        sheet = {
            "id": new_id(),
            "lecture_id": lecture_id,
            "name": name,
            "rat_ids": list(rat_ids),  # order is exactly what students see
            "available_from": available_from,
            "origin": "manual",
        }
        self.stores.put_sheet(sheet)
        return sheet

    def create_auto_sheet(
        self,
        actor: str,
        role: Role,
        lecture_id: str,
        name: str,
        on: date,
        exclude: Iterable[str] = (),
    ) -> dict:
        """Commit an automatically generated sheet: the eligible pool on the
        date, minus the RATs the lecturer pruned."""
        pool = self.auto_pool(actor, role, lecture_id, on)
        self._check_sheet_name(lecture_id, name)
        excluded = set(exclude)
        rat_ids = [rat.id for rat in pool if rat.id not in excluded]
        sheet = {
            "id": new_id(),
            "lecture_id": lecture_id,
            "name": name,
            "rat_ids": rat_ids,
            "available_from": on,
            "origin": "auto",
        }
        self.stores.put_sheet(sheet)
        return sheet

    def get_sheet(self, sheet_id: str) -> dict:
        sheet = self.stores.get_sheet(sheet_id)
        if sheet is None:
            raise NotFound(f"sheet {sheet_id} does not exist")
        return sheet

    def list_sheets(self, actor: str, role: Role, lecture_id: str, today: date) -> list[dict]:
        lecture = self._require_lecture(lecture_id)
        sheets = sorted(self.stores.sheets_for_lecture(lecture_id), key=lambda s: s["name"])
        is_owner = role is Role.ADMINISTRATOR or actor in lecture["lecturers"]
        if is_owner:
            return sheets
        self.require_member(actor, lecture_id)
        return [s for s in sheets if s["available_from"] <= today]

    # -- live sessions ---------------------------------------------------------------

    def open_live(self, actor: str, role: Role, sheet_id: str) -> str:
        sheet = self.get_sheet(sheet_id)
        lecture = self._require_lecture(sheet["lecture_id"])
        self._require_owner(actor, role, lecture)
        return self.live.open(sheet_id, sheet["lecture_id"], sheet["rat_ids"])

    def close_live(self, actor: str, role: Role, session_id: str) -> dict:
        lecture = self._require_lecture(self.live.lecture_of(session_id))
        self._require_owner(actor, role, lecture)
        return self.live.close(session_id)

    def live_stats(self, actor: str, role: Role, session_id: str) -> dict:
        lecture = self._require_lecture(self.live.lecture_of(session_id))
        self._require_owner(actor, role, lecture)
        return self.live.stats(session_id)

    # -- cross-lecture pool -------------------------------------------------------------

    def cross_lecture_pool(self, actor: str, role: Role) -> list[RAT]:
        if role is not Role.STUDENT:
            # Deliberately not inherited upward: this pool exists for students
            # only.
            raise Forbidden("the cross-lecture questionnaire is available to students only")
        answered = self.stores.answered_rat_ids(actor)
        pool = [
            rat
            for rat in self.stores.list_rats()
            if rat.is_cross_lecture
            and rat.state is PublicationState.PUBLISHED
            and rat.id not in answered
        ]
        return sorted(pool, key=lambda r: r.id)

"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

from datetime import datetime, timezone

import pytest

from rats.competence import load_catalog
from rats.config import Config
from rats.model import AnswerOption, PublicationState, QuestionKind, RAT
from rats.store import Stores


def ts(day: int = 1, hour: int = 12, minute: int = 0, year: int = 2023, month: int = 1) -> datetime:
    return datetime(year, month, day, hour, minute, tzinfo=timezone.utc)


def make_mc(
    rat_id: str = "rat-1",
    n_options: int = 4,
    correct: int = 0,
    author: str = "creator",
    state: PublicationState = PublicationState.DRAFT,
    **overrides,
) -> RAT:
    options = tuple(
        AnswerOption(
            id=f"{rat_id}-o{i}",
            text=f"option {i}",
            is_correct=(i == correct),
            feedback="" if i == correct else f"why option {i} is wrong",
        )
        for i in range(n_options)
    )
    defaults = dict(
        id=rat_id,
        question="What is $x$?",
        kind=QuestionKind.MULTIPLE_CHOICE,
        options=options,
        author=author,
        state=state,
        general_feedback="see lecture notes",
        created_at=ts(),
    )
    defaults.update(overrides)
    return RAT(**defaults)


def make_tf(rat_id: str = "rat-tf", truths: tuple[bool, ...] = (True, False, True), **overrides) -> RAT:
    options = tuple(
        AnswerOption(
            id=f"{rat_id}-s{i}",
            text=f"statement {i}",
            truth_value=truth,
            feedback=f"statement {i} explained",
        )
        for i, truth in enumerate(truths)
    )
    defaults = dict(
        id=rat_id,
        question="Mark each statement",
        kind=QuestionKind.MULTI_TRUE_FALSE,
        options=options,
        author="creator",
        created_at=ts(),
    )
    defaults.update(overrides)
    return RAT(**defaults)


def make_open(rat_id: str = "rat-open", accepted: tuple[str, ...] = ("42",), **overrides) -> RAT:
    defaults = dict(
        id=rat_id,
        question="Give the answer",
        kind=QuestionKind.OPEN_ENDED,
        accepted_answers=accepted,
        author="creator",
        general_feedback="think harder",
        created_at=ts(),
    )
    defaults.update(overrides)
    return RAT(**defaults)


@pytest.fixture(autouse=True)
def fast_password_hashing(monkeypatch):
    # scrypt at production cost dominates suite runtime; the tests only care
    # about hash/verify correctness, not KDF hardness.
    from rats import auth

    monkeypatch.setattr(auth, "_SCRYPT", {"n": 2**4, "r": 8, "p": 1})


@pytest.fixture
def catalog():
    return load_catalog()


@pytest.fixture
def config():
    return Config(
        allowed_email_domains=["example.edu"],
        content_store_url="sqlite:///:memory:",
        user_store_url="sqlite:///:memory:",
    )


@pytest.fixture
def stores(config):
    s = Stores(config.content_store_url, config.user_store_url)
    s.migrate()
    return s

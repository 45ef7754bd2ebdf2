"""Round-trip and query tests for the dual stores."""

from datetime import date, datetime, timezone

import pytest

from rats.auth import AuthService, check_password, hash_password
from rats.config import Config, load_config
from rats.errors import BadCredentials, DomainNotAllowed, EmailTaken, TermsNotAccepted, Unverified, WeakPassword
from rats.model import Attempt, AttemptContext, Role, Scaffold, ScaffoldKind

from conftest import make_mc, make_open, ts


def test_rat_roundtrip(stores):
    rat = make_mc(
        topics=frozenset({"t1", "t2"}),
        concepts=frozenset({"c1"}),
        lectures=frozenset({"lec"}),
        criteria=frozenset({1, 7, 21}),
    )
    stores.put_rat(rat)
    loaded = stores.get_rat(rat.id)
    assert loaded == rat


def test_open_rat_roundtrip(stores):
    rat = make_open()
    stores.put_rat(rat)
    assert stores.get_rat(rat.id) == rat


def test_put_rat_upserts(stores):
    rat = make_mc()
    stores.put_rat(rat)
    edited = make_mc(question="v2")
    stores.put_rat(edited)
    assert stores.get_rat(rat.id).question == "v2"
    assert len(stores.list_rats()) == 1


def test_attempt_roundtrip_and_filters(stores):
    a1 = Attempt(
        id="a1", student="s1", rat="r1", lecture="lec", context=AttemptContext.SHEET,
        response="r1-o0", correct=True, submitted_at=ts(day=1), is_first_for_rat=True,
        counts={"data_literacy": 2},
    )
    a2 = Attempt(
        id="a2", student="s1", rat="r2", lecture=None, context=AttemptContext.CROSS_LECTURE,
        response={"x": True}, correct=None, submitted_at=ts(day=2), is_first_for_rat=True,
    )
    stores.record_attempt(a1)
    stores.record_attempt(a2)
    assert stores.attempts_where(student="s1") == [a1, a2]
    assert stores.attempts_where(lecture="lec") == [a1]
    assert stores.attempts_where(rat="r2") == [a2]
    assert stores.has_attempt("s1", "r1") is True
    assert stores.has_attempt("s2", "r1") is False
    assert stores.answered_rat_ids("s1") == {"r1", "r2"}


def test_attempt_verdict_update(stores):
    attempt = Attempt(
        id="a1", student="s1", rat="r1", lecture=None, context=AttemptContext.AUTO_RATS,
        response="x", correct=None, submitted_at=ts(), is_first_for_rat=True,
    )
    stores.record_attempt(attempt)
    stores.set_attempt_verdict("a1", True)
    assert stores.get_attempt("a1").correct is True


def test_scaffold_roundtrip_with_ratings(stores):
    scaffold = Scaffold(
        id="sc1", rat_id="r1", kind=ScaffoldKind.BOOK_REFERENCE, body="Halliday ch. 2",
        approvals=frozenset({"rev"}), suggested_by="s1", created_at=ts(),
    )
    stores.put_scaffold(scaffold)
    stores.rate_scaffold("sc1", "u1", 5)
    stores.rate_scaffold("sc1", "u2", 3)
    stores.rate_scaffold("sc1", "u1", 4)  # overwrite
    loaded = stores.get_scaffold("sc1")
    assert loaded.ratings == (("u1", 4), ("u2", 3))
    assert loaded.mean_rating() == 3.5


def test_lecture_and_syllabus_roundtrip(stores):
    dates = [date(2023, 10, 16), date(2023, 10, 23)]
    stores.put_lecture("lec", "Mechanics", "BSc", "2023W", "code", dates, ["prof"])
    lecture = stores.get_lecture("lec")
    assert lecture["appointment_dates"] == dates
    assert lecture["lecturers"] == {"prof"}
    stores.set_syllabus(
        "lec",
        [{"date": dates[0], "topics": {"t1"}, "concepts": {"c1"}}],
    )
    entries = stores.syllabus("lec")
    assert entries[0]["topics"] == {"t1"}
    # replacing is total
    stores.set_syllabus("lec", [])
    assert stores.syllabus("lec") == []


def test_membership(stores):
    stores.put_lecture("lec", "L", "", "", "c", [], [])
    stores.add_member("lec", "s1")
    stores.add_member("lec", "s1")
    assert stores.members("lec") == {"s1"}
    assert stores.memberships_of("s1") == {"lec"}


def test_log_entries_filtering(stores):
    stores.log("login", user="u1")
    stores.log("login", user="u2")
    stores.log("create_rat", user="u1", subject="r1")
    assert len(stores.log_entries(user="u1")) == 2
    assert len(stores.log_entries(action="login")) == 2
    assert stores.login_times("u1") != []


def test_log_emits_structured_json_line(stores, caplog):
    import json as json_mod
    import logging

    with caplog.at_level(logging.INFO, logger="rats.audit"):
        stores.log("login", user="u1", subject=None)
    record = json_mod.loads(caplog.records[-1].message)
    assert record["action"] == "login"
    assert record["user"] == "u1"
    assert "at" in record


def test_outbox_order_and_filter(stores):
    stores.add_notification("a@x", "s1", "b1")
    stores.add_notification("b@x", "s2", "b2")
    stores.add_notification("a@x", "s3", "b3")
    assert [n["subject"] for n in stores.notifications()] == ["s1", "s2", "s3"]
    assert [n["subject"] for n in stores.notifications(to="a@x")] == ["s1", "s3"]


def test_account_lifecycle(stores):
    pseudonym = stores.create_account("max@example.edu", b"hash", Role.STUDENT, True, "tok")
    assert stores.account_by_email("max@example.edu")["pseudonym"] == pseudonym
    assert stores.account_by_verify_token("tok")["pseudonym"] == pseudonym
    stores.update_account(pseudonym, email_verified=True, verify_token=None)
    assert stores.account(pseudonym)["email_verified"] is True
    stores.save_token("t1", pseudonym)
    assert stores.pseudonym_for_token("t1") == pseudonym
    stores.delete_account(pseudonym)
    assert stores.account(pseudonym) is None
    assert stores.pseudonym_for_token("t1") is None


def test_password_hash_roundtrip():
    stored = hash_password("correct horse battery")
    assert check_password("correct horse battery", stored)
    assert not check_password("wrong", stored)
    assert hash_password("x" * 12) != hash_password("x" * 12)  # salted


def test_auth_service_flow(stores):
    auth = AuthService(stores, Config())
    with pytest.raises(DomainNotAllowed):
        auth.signup("a@elsewhere.org", "longpassword1", accept_terms=True)
    with pytest.raises(WeakPassword):
        auth.signup("a@example.edu", "short", accept_terms=True)
    with pytest.raises(TermsNotAccepted):
        auth.signup("a@example.edu", "longpassword1")

    pseudonym = auth.signup("a@example.edu", "longpassword1", accept_terms=True)
    with pytest.raises(Unverified):
        auth.login("a@example.edu", "longpassword1")
    note = stores.notifications(to="a@example.edu")[0]
    token = note["body"].rsplit(": ", 1)[1]
    assert auth.verify_email(token) == pseudonym

    with pytest.raises(EmailTaken):
        auth.signup("a@example.edu", "longpassword1", accept_terms=True)

    bearer, ctx = auth.login("a@example.edu", "longpassword1")
    assert ctx.pseudonym == pseudonym
    assert auth.resolve(bearer).pseudonym == pseudonym
    with pytest.raises(BadCredentials):
        auth.login("a@example.edu", "nope-nope-nope")

    fresh = auth.change_password(pseudonym, "longpassword1", "longerpassword2")
    from rats.errors import Unauthenticated

    with pytest.raises(Unauthenticated):
        auth.resolve(bearer)  # revoked
    assert auth.resolve(fresh).pseudonym == pseudonym


def test_config_validation():
    with pytest.raises(ValueError):
        Config(rat_approval_threshold=0).validate()
    with pytest.raises(ValueError):
        Config(
            content_store_url="sqlite:///same.db", user_store_url="sqlite:///same.db"
        ).validate()
    Config().validate()  # defaults are fine


def test_config_env_overrides(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"rat_approval_threshold": 3, "allowed_email_domains": ["uni.edu"]}')
    config = load_config(
        str(path),
        env={
            "RATS_RAT_APPROVAL_THRESHOLD": "1",
            "RATS_ALLOWED_EMAIL_DOMAINS": "a.edu, b.edu",
            "RATS_LISTEN_PORT": "9000",
        },
    )
    assert config.rat_approval_threshold == 1  # env wins over file
    assert config.allowed_email_domains == ["a.edu", "b.edu"]
    assert config.listen_port == 9000


def test_config_unknown_key_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"rat_approval_treshold": 3}')
    with pytest.raises(ValueError):
        load_config(str(path))

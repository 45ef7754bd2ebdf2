import random
from datetime import datetime, timedelta, timezone
from fractions import Fraction

from rats.analytics import (
    classify_errors,
    creation_stats,
    error_report_csv,
    first_graded,
    iso_week,
    lottery_eligible,
    student_stats,
)
from rats.model import Attempt, AttemptContext

from conftest import make_mc, make_tf, ts


def attempt(student="s1", rat="r1", correct=True, at=None, response="x", aid=None):
    at = at or ts()
    return Attempt(
        id=aid or f"{student}-{rat}-{at.isoformat()}",
        student=student,
        rat=rat,
        lecture="lec",
        context=AttemptContext.SHEET,
        response=response,
        correct=correct,
        submitted_at=at,
        is_first_for_rat=True,
    )


def test_student_stats_empty():
    stats = student_stats([])
    assert stats.percent_correct is None
    assert stats.percent_incorrect is None
    assert stats.per_week == {}


def test_student_stats_seven_of_ten():
    attempts = [attempt(rat=f"r{i}", correct=i < 7, at=ts(day=i + 1)) for i in range(10)]
    stats = student_stats(attempts)
    assert stats.percent_correct == Fraction(7, 10)
    assert stats.percent_incorrect == Fraction(3, 10)


def test_student_stats_ungraded_excluded_from_percentages():
    attempts = [
        attempt(rat="r1", correct=True, at=ts(day=2)),
        attempt(rat="r2", correct=None, at=ts(day=3)),
    ]
    stats = student_stats(attempts)
    assert stats.percent_correct == Fraction(1)
    assert stats.n_attempts == 2
    assert sum(stats.per_week.values()) == 2  # ungraded still counts per week


def test_week_bucketing_monday_tuesday_next_monday():
    # 2023-01-02 is a Monday.
    attempts = [
        attempt(rat="r1", at=ts(day=2)),
        attempt(rat="r2", at=ts(day=3)),
        attempt(rat="r3", at=ts(day=9)),
    ]
    stats = student_stats(attempts)
    assert stats.per_week == {"2023-W01": 2, "2023-W02": 1}


def test_week_boundary_sunday_midnight():
    sunday = datetime(2023, 1, 8, 23, 59, tzinfo=timezone.utc)
    monday = datetime(2023, 1, 9, 0, 0, tzinfo=timezone.utc)
    assert iso_week(sunday) != iso_week(monday)


def test_first_graded_keeps_earliest_graded_per_student_rat():
    attempts = [
        attempt(student="s1", rat="r1", correct=None, at=ts(day=1), aid="a1"),
        attempt(student="s1", rat="r1", correct=False, at=ts(day=2), aid="a2"),
        attempt(student="s1", rat="r1", correct=True, at=ts(day=3), aid="a3"),
        attempt(student="s2", rat="r1", correct=True, at=ts(day=1), aid="a4"),
    ]
    chosen = first_graded(attempts)
    assert [a.id for a in chosen] == ["a4", "a2"]


def mc_attempt(student, rat, option_index, rat_obj, at=None):
    option = rat_obj.options[option_index]
    return Attempt(
        id=f"{student}-{rat}",
        student=student,
        rat=rat,
        lecture="lec",
        context=AttemptContext.SHEET,
        response=option.id,
        correct=bool(option.is_correct),
        submitted_at=at or ts(),
        is_first_for_rat=True,
    )


def test_classifier_always_and_often_incorrect():
    rat = make_mc("r1", correct=0)
    attempts = [mc_attempt(f"s{i}", "r1", 1, rat) for i in range(5)]  # 0 correct of 5
    report = classify_errors(attempts, {"r1": rat}, min_answers=5)
    assert "r1" in report.always_incorrect
    assert "r1" in report.often_incorrect  # 0 < 0.40


def test_classifier_forty_percent_boundary_is_strict():
    rat = make_mc("r1", correct=0)
    attempts = [mc_attempt(f"s{i}", "r1", 0 if i < 4 else 1, rat) for i in range(10)]
    report = classify_errors(attempts, {"r1": rat}, min_answers=5)
    assert "r1" not in report.often_incorrect  # exactly 0.40 is not < 0.40
    assert "r1" not in report.always_incorrect


def test_classifier_just_below_forty_percent_included():
    rat = make_mc("r1", correct=0)
    # 39 of 100 correct: strictly below the 40% line.
    attempts = [mc_attempt(f"s{i}", "r1", 0 if i < 39 else 1, rat) for i in range(100)]
    report = classify_errors(attempts, {"r1": rat}, min_answers=5)
    assert "r1" in report.often_incorrect


def test_classifier_deceptive_share_of_all_answers():
    rat = make_mc("r1", correct=0)
    # 10 answers, 4 on wrong option 2 -> share 0.4 of ALL answers.
    choices = [0] * 6 + [2] * 4
    attempts = [mc_attempt(f"s{i}", "r1", c, rat) for i, c in enumerate(choices)]
    report = classify_errors(attempts, {"r1": rat}, min_answers=5)
    assert ("r1", "r1-o2", Fraction(2, 5)) in report.deceptive


def test_classifier_thirty_percent_boundary_is_strict():
    rat = make_mc("r1", correct=0)
    choices = [0] * 70 + [2] * 30  # exactly 0.30
    attempts = [mc_attempt(f"s{i}", "r1", c, rat) for i, c in enumerate(choices)]
    report = classify_errors(attempts, {"r1": rat}, min_answers=5)
    assert not report.deceptive
    choices = [0] * 69 + [2] * 31  # 0.31
    attempts = [mc_attempt(f"s{i}", "r1", c, rat) for i, c in enumerate(choices)]
    report = classify_errors(attempts, {"r1": rat}, min_answers=5)
    assert [d[:2] for d in report.deceptive] == [("r1", "r1-o2")]


def test_classifier_share_denominator_is_all_answers_not_wrong_answers():
    rat = make_mc("r1", correct=0)
    # 2 of 10 answers on wrong option 2: would be 100% of wrong answers, but
    # only 20% of all answers, so not deceptive.
    choices = [0] * 8 + [2] * 2
    attempts = [mc_attempt(f"s{i}", "r1", c, rat) for i, c in enumerate(choices)]
    report = classify_errors(attempts, {"r1": rat}, min_answers=5)
    assert not report.deceptive


def test_classifier_most_frequent_option_with_tie():
    rat = make_mc("r1", correct=0)
    choices = [1] * 3 + [2] * 3 + [0] * 2
    attempts = [mc_attempt(f"s{i}", "r1", c, rat) for i, c in enumerate(choices)]
    report = classify_errors(attempts, {"r1": rat}, min_answers=5)
    assert report.most_frequent_option["r1"] == "r1-o1"  # tie broken by lower id


def test_classifier_ignores_rats_below_min_answers():
    rat = make_mc("r1", correct=0)
    attempts = [mc_attempt(f"s{i}", "r1", 1, rat) for i in range(4)]
    report = classify_errors(attempts, {"r1": rat}, min_answers=5)
    assert report.per_rat == {}


def test_classifier_counts_first_attempts_only():
    rat = make_mc("r1", correct=0)
    attempts = []
    for i in range(5):
        attempts.append(mc_attempt(f"s{i}", "r1", 1, rat, at=ts(day=1)))
    # The same five students then answer correctly on a retry; repeats must
    # not dilute the misconception signal.
    for i in range(5):
        retry = mc_attempt(f"s{i}", "r1", 0, rat, at=ts(day=2))
        attempts.append(
            Attempt(**{**retry.__dict__, "id": f"retry-{i}", "is_first_for_rat": False})
        )
    report = classify_errors(attempts, {"r1": rat}, min_answers=5)
    assert "r1" in report.always_incorrect


def brute_force_classify(attempts, rats, min_answers):
    """Independent re-scan of the attempt table, written from the category
    definitions with no shared code."""
    firsts = {}
    for a in sorted(attempts, key=lambda a: (a.submitted_at, a.id)):
        if a.correct is None:
            continue
        firsts.setdefault((a.student, a.rat), a)
    rows = list(firsts.values())
    rat_ids = {a.rat for a in rows}
    always, often, deceptive = set(), set(), set()
    for rid in rat_ids:
        group = [a for a in rows if a.rat == rid]
        if len(group) < min_answers:
            continue
        n_correct = len([a for a in group if a.correct])
        if n_correct == 0:
            always.add(rid)
        if Fraction(n_correct, len(group)) < Fraction(2, 5):
            often.add(rid)
        rat = rats[rid]
        if rat.kind.value == "multiple_choice":
            for option in rat.options:
                if option.is_correct:
                    continue
                chosen = len([a for a in group if a.response == option.id])
                if Fraction(chosen, len(group)) > Fraction(3, 10):
                    deceptive.add((rid, option.id, Fraction(chosen, len(group))))
    return always, often, deceptive


def test_classifier_matches_brute_force_on_random_fixtures():
    rng = random.Random(2024)
    for _ in range(100):
        rats = {f"r{k}": make_mc(f"r{k}", correct=rng.randrange(4)) for k in range(4)}
        attempts = []
        for i in range(rng.randint(0, 60)):
            rid = f"r{rng.randrange(4)}"
            rat = rats[rid]
            option = rng.randrange(4)
            attempts.append(
                mc_attempt(f"s{rng.randrange(12)}", rid, option, rat, at=ts(day=rng.randint(1, 28), hour=rng.randrange(24)))
            )
        report = classify_errors(attempts, rats, min_answers=3)
        always, often, deceptive = brute_force_classify(attempts, rats, 3)
        assert report.always_incorrect == always
        assert report.often_incorrect == often
        assert set(report.deceptive) == deceptive


def test_error_report_csv_roundtrip():
    rat = make_mc("r1", correct=0)
    choices = [0] * 6 + [2] * 4
    attempts = [mc_attempt(f"s{i}", "r1", c, rat) for i, c in enumerate(choices)]
    report = classify_errors(attempts, {"r1": rat}, min_answers=5)
    text = error_report_csv(report)
    lines = text.strip().splitlines()
    assert lines[0].startswith("rat_id,n,correct_fraction")
    assert lines[1].startswith("r1,10,0.6000")
    assert ",1," in lines[1]  # deceptive flag set


def hours(h):
    return ts(day=1) + timedelta(hours=h)


def test_lottery_exact_spacing_qualifies():
    logins = [hours(0), hours(24), hours(48), hours(72)]
    assert lottery_eligible(logins) is True


def test_lottery_same_day_logins_do_not_qualify():
    logins = [hours(i) for i in range(10)]
    assert lottery_eligible(logins) is False


def test_lottery_spec_fixture():
    logins = [hours(0), hours(23), hours(25), hours(50), hours(74), hours(100)]
    assert lottery_eligible(logins) is True


def test_lottery_window_filter():
    logins = [hours(0), hours(24), hours(48), hours(72)]
    window = (hours(10), hours(200))
    assert lottery_eligible(logins, window=window) is False  # only 3 inside


def brute_force_eligible(logins, min_logins=4, min_gap=timedelta(hours=24)):
    from itertools import combinations

    times = sorted(logins)
    for combo in combinations(times, min_logins):
        if all(b - a >= min_gap for a, b in zip(combo, combo[1:])):
            return True
    return False


def test_lottery_greedy_matches_exhaustive_search():
    rng = random.Random(77)
    for _ in range(300):
        logins = [hours(rng.uniform(0, 24 * 10)) for _ in range(rng.randint(0, 12))]
        assert lottery_eligible(logins) == brute_force_eligible(logins), sorted(logins)


def test_creation_stats_counts_per_lecture_week_creator():
    rats = [
        make_mc("r1", author="alice", lectures=frozenset({"lec1"}), created_at=ts(day=2)),
        make_mc("r2", author="alice", lectures=frozenset({"lec1"}), created_at=ts(day=3)),
        make_mc("r3", author="bob", lectures=frozenset({"lec1", "lec2"}), created_at=ts(day=9)),
    ]
    buckets = creation_stats(rats)
    as_map = {(b.lecture, b.week): b.creators for b in buckets}
    assert as_map[("lec1", "2023-W01")] == {"alice": 2}
    assert as_map[("lec1", "2023-W02")] == {"bob": 1}
    assert as_map[("lec2", "2023-W02")] == {"bob": 1}


def test_creation_stats_empty():
    assert creation_stats([]) == []

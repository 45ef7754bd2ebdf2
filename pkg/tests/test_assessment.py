import itertools

import pytest

from rats.assessment import assemble_feedback, grade, order_scaffolds, wrong_choices
from rats.errors import ShapeMismatch
from rats.model import Scaffold, ScaffoldKind

from conftest import make_mc, make_open, make_tf, ts


def test_mc_correct_choice():
    rat = make_mc(correct=2)
    assert grade(rat, "rat-1-o2") is True
    assert grade(rat, "rat-1-o0") is False


def test_mc_unknown_option_is_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        grade(make_mc(), "nope")


def test_mc_wrong_response_type():
    with pytest.raises(ShapeMismatch):
        grade(make_mc(), {"rat-1-o0": True})


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_tf_exactly_one_pattern_is_true(n):
    truths = tuple(bool(i % 2) for i in range(n))
    rat = make_tf(truths=truths)
    ids = [o.id for o in rat.options]
    true_patterns = 0
    for pattern in itertools.product([True, False], repeat=n):
        verdict = grade(rat, dict(zip(ids, pattern)))
        assert verdict in (True, False)
        if verdict:
            true_patterns += 1
            assert pattern == truths
    assert true_patterns == 1


def test_tf_partial_match_is_false():
    rat = make_tf(truths=(True, False, True))
    ids = [o.id for o in rat.options]
    assert grade(rat, dict(zip(ids, (True, False, False)))) is False


def test_tf_missing_statement_is_shape_mismatch():
    rat = make_tf(truths=(True, False))
    with pytest.raises(ShapeMismatch):
        grade(rat, {rat.options[0].id: True})


def test_open_ended_normalization():
    rat = make_open(accepted=("42",))
    assert grade(rat, "  42 ") is True
    assert grade(rat, "42") is True


def test_open_ended_unmatched_is_ungraded():
    rat = make_open(accepted=("42",))
    assert grade(rat, "forty-two") is None


def test_open_ended_casefold():
    rat = make_open(accepted=("Kinetic Energy",))
    assert grade(rat, "kinetic   energy") is True


def test_wrong_choices_mc():
    rat = make_mc(correct=0)
    assert wrong_choices(rat, "rat-1-o0") == []
    assert [o.id for o in wrong_choices(rat, "rat-1-o2")] == ["rat-1-o2"]


def test_wrong_choices_tf():
    rat = make_tf(truths=(True, False, True))
    ids = [o.id for o in rat.options]
    response = dict(zip(ids, (False, False, False)))
    assert [o.id for o in wrong_choices(rat, response)] == [ids[0], ids[2]]


def test_feedback_incorrect_mc_contains_option_feedback_verbatim():
    rat = make_mc(correct=0)
    result = assemble_feedback(rat, "rat-1-o2", False)
    assert result.evaluative == "incorrect"
    texts = [b.text for b in result.informative]
    assert texts[0] == "why option 2 is wrong"
    assert texts[-1] == "see lecture notes"  # general feedback comes last
    assert result.informative[0].option_id == "rat-1-o2"


def test_feedback_correct_without_general_is_empty():
    rat = make_mc(correct=0, general_feedback="")
    result = assemble_feedback(rat, "rat-1-o0", True)
    assert result.evaluative == "correct"
    assert result.informative == ()


def test_feedback_correct_with_general():
    rat = make_mc(correct=0)
    result = assemble_feedback(rat, "rat-1-o0", True)
    assert [b.kind for b in result.informative] == ["general"]


def test_feedback_ungraded():
    rat = make_open()
    result = assemble_feedback(rat, "??", None)
    assert result.evaluative == "ungraded"
    assert result.correct is None


def test_feedback_never_empty_when_incorrect():
    # The authoring rule guarantees feedback text on incorrect options, so an
    # incorrect verdict always produces informative content.
    rat = make_mc(correct=0, general_feedback="")
    result = assemble_feedback(rat, "rat-1-o1", False)
    assert result.informative


def scaffold(sid, approvals=("rev1",), ratings=()):
    return Scaffold(
        id=sid,
        rat_id="rat-1",
        kind=ScaffoldKind.TEXT,
        body="hint",
        approvals=frozenset(approvals),
        ratings=tuple(ratings),
        created_at=ts(),
    )


def test_order_scaffolds_by_mean_rating_then_id():
    a = scaffold("a", ratings=(("s1", 3), ("s2", 3)))
    b = scaffold("b", ratings=(("s1", 4), ("s2", 5)))
    c = scaffold("c", ratings=())
    d = scaffold("d", ratings=())
    ordered = order_scaffolds([d, c, a, b], approval_threshold=1)
    assert [s.id for s in ordered] == ["b", "a", "c", "d"]


def test_order_scaffolds_excludes_unapproved():
    approved = scaffold("a")
    pending = scaffold("b", approvals=())
    assert order_scaffolds([approved, pending], approval_threshold=1) == [approved]

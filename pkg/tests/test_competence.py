import random
from fractions import Fraction

import pytest

from rats.competence import (
    COMPETENCES,
    Competence,
    criteria_counts,
    fold_attempts,
    fresh_profile,
    load_catalog,
    progression_series,
    relative_level,
    update_profile,
)
from rats.errors import UnknownCriterion

DL = Competence.DATA_LITERACY
RC = Competence.REPRESENTATIONAL
ML = Competence.MATHEMATICAL


def brute_force_level(attempts, comp):
    """Independent oracle: earned-over-attempted criterion sums, recomputed
    from scratch with plain list arithmetic."""
    total = sum(counts.get(comp, 0) for counts, _ in attempts)
    earned = sum(counts.get(comp, 0) for counts, correct in attempts if correct)
    return None if total == 0 else Fraction(earned, total)


def random_attempts(rng, length, catalog):
    out = []
    for _ in range(length):
        flags = rng.sample(sorted(catalog.ids), k=rng.randint(0, 6))
        counts = criteria_counts(flags, catalog)
        out.append((counts, rng.random() < 0.5))
    return out


def test_catalog_shape(catalog):
    assert len(catalog.entries) == 21
    per_comp = {c: 0 for c in COMPETENCES}
    for criterion in catalog.entries:
        for comp in criterion.competencies:
            per_comp[comp] += 1
    assert per_comp == {DL: 8, RC: 9, ML: 9}
    assert catalog[7].competencies == frozenset({DL, RC, ML})


def test_catalog_multi_competence_entries(catalog):
    multi = sorted(c.id for c in catalog.entries if len(c.competencies) > 1)
    assert multi == [3, 7, 12, 13]


def test_counts_empty(catalog):
    assert criteria_counts(frozenset(), catalog) == {DL: 0, RC: 0, ML: 0}


def test_counts_criterion_7(catalog):
    assert criteria_counts({7}, catalog) == {DL: 1, RC: 1, ML: 1}


def test_counts_1_2_15(catalog):
    # Rows 1 and 2 are data-literacy criteria, row 15 representational.
    assert criteria_counts({1, 2, 15}, catalog) == {DL: 2, RC: 1, ML: 0}


def test_counts_unknown_criterion(catalog):
    with pytest.raises(UnknownCriterion):
        criteria_counts({22}, catalog)
    with pytest.raises(UnknownCriterion):
        criteria_counts({0}, catalog)


def test_update_profile_correct_attempt():
    profile = update_profile(fresh_profile(), {DL: 2, RC: 0, ML: 1}, correct=True)
    assert profile.current[DL] == 2 and profile.maximum[DL] == 2
    assert profile.current[ML] == 1 and profile.maximum[ML] == 1
    assert RC not in profile.maximum


def test_update_profile_zero_counts_is_identity():
    profile = update_profile(fresh_profile(), {DL: 1}, correct=True)
    assert update_profile(profile, {DL: 0, RC: 0, ML: 0}, correct=True) == profile
    assert update_profile(profile, {}, correct=False) == profile


def test_update_profile_incorrect_grows_max_only():
    profile = update_profile(fresh_profile(), {DL: 2}, correct=True)
    profile = update_profile(profile, {DL: 3}, correct=False)
    assert profile.current[DL] == 2 and profile.maximum[DL] == 5
    assert relative_level(profile, DL) == Fraction(2, 5)


def test_relative_level_fresh_profile_is_no_data():
    assert relative_level(fresh_profile(), DL) is None


def test_relative_level_all_correct_is_one(catalog):
    rng = random.Random(7)
    attempts = [(counts, True) for counts, _ in random_attempts(rng, 30, catalog)]
    profile = fold_attempts(attempts)
    for comp in COMPETENCES:
        level = relative_level(profile, comp)
        assert level is None or level == 1


def test_progression_empty():
    assert progression_series([]) == {DL: [], RC: [], ML: []}


def test_progression_two_attempts():
    series = progression_series([({ML: 1}, True), ({ML: 1}, False)])
    levels = [p.level for p in series[ML]]
    assert levels == [Fraction(1), Fraction(1, 2)]
    assert [p.attempt_index for p in series[ML]] == [1, 2]


def test_progression_prefix_property(catalog):
    rng = random.Random(11)
    attempts = random_attempts(rng, 12, catalog)
    full = progression_series(attempts)
    for cut in range(len(attempts) + 1):
        partial = progression_series(attempts[:cut])
        for comp in COMPETENCES:
            assert full[comp][:cut] == partial[comp]


def test_fold_matches_brute_force_oracle(catalog):
    rng = random.Random(1234)
    for _ in range(150):
        attempts = random_attempts(rng, rng.randint(0, 60), catalog)
        profile = fold_attempts(attempts)
        for comp in COMPETENCES:
            assert relative_level(profile, comp) == brute_force_level(attempts, comp)


def test_final_level_is_order_independent(catalog):
    rng = random.Random(99)
    for _ in range(30):
        attempts = random_attempts(rng, rng.randint(2, 40), catalog)
        base = fold_attempts(attempts)
        shuffled = attempts[:]
        rng.shuffle(shuffled)
        other = fold_attempts(shuffled)
        for comp in COMPETENCES:
            assert relative_level(base, comp) == relative_level(other, comp)


def test_max_score_is_monotone(catalog):
    rng = random.Random(5)
    attempts = random_attempts(rng, 40, catalog)
    profile = fresh_profile()
    for counts, correct in attempts:
        before = dict(profile.maximum)
        profile = update_profile(profile, counts, correct)
        for comp in COMPETENCES:
            assert profile.maximum.get(comp, 0) >= before.get(comp, 0)


def test_profile_rejects_current_above_max():
    from rats.competence import CompetenceProfile

    with pytest.raises(ValueError):
        CompetenceProfile(current={DL: 3}, maximum={DL: 2})

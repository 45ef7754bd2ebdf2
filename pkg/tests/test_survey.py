import math
import random
from fractions import Fraction

import pytest

from rats.errors import MissingValue, TooFewPairs, ZeroVariance
from rats.survey import (
    CATEGORIES,
    CATEGORY_BY_NAME,
    FREQUENCY_LEVELS,
    ITEM_IDS,
    SurveyResponse,
    analyze,
    category_score,
    confirmation_rate,
    encode_frequency,
    mediation,
    moderation,
    regress,
)


def solve_exact(matrix, rhs):
    """Gaussian elimination over Fractions: the independent OLS oracle."""
    n = len(rhs)
    a = [[Fraction(v) for v in row] + [Fraction(rhs[i])] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col]
        a[col] = [v / inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def exact_ols(columns, y):
    """Closed-form OLS (coefficients, standard errors, df) in exact rational
    arithmetic; design columns given without the intercept."""
    n = len(y)
    design = [[Fraction(1)] + [Fraction(col[i]) for col in columns] for i in range(n)]
    k = len(design[0])
    xtx = [[sum(design[i][r] * design[i][c] for i in range(n)) for c in range(k)] for r in range(k)]
    xty = [sum(design[i][r] * Fraction(y[i]) for i in range(n)) for r in range(k)]
    beta = solve_exact(xtx, xty)
    residuals = [Fraction(y[i]) - sum(design[i][c] * beta[c] for c in range(k)) for i in range(n)]
    sse = sum(r * r for r in residuals)
    df = n - k
    sigma2 = sse / df
    # Diagonal of (X'X)^-1 via solving against unit vectors.
    ses = []
    for j in range(k):
        unit = [Fraction(int(i == j)) for i in range(k)]
        column = solve_exact(xtx, unit)
        ses.append(math.sqrt(float(sigma2 * column[j])))
    return beta, ses, df


def t2_cdf(t):
    # Closed form for the Student-t CDF with 2 degrees of freedom.
    return 0.5 + t / (2 * math.sqrt(2) * math.sqrt(1 + t * t / 2))


def test_encode_frequency_order():
    assert encode_frequency("daily") == 1
    assert encode_frequency("once_a_semester") == 7
    codes = [encode_frequency(level) for level in FREQUENCY_LEVELS]
    assert codes == [1, 2, 3, 4, 5, 6, 7]


def test_encode_frequency_missing():
    with pytest.raises(MissingValue):
        encode_frequency(None)
    with pytest.raises(MissingValue):
        encode_frequency("sometimes")


def test_category_sizes():
    sizes = {c.name: len(c.items) for c in CATEGORIES}
    assert sizes == {
        "intention_to_use": 2,
        "output_quality": 6,
        "relevance_to_study": 2,
        "perceived_ease_of_use": 4,
        "perceived_usefulness": 4,
    }
    assert len(ITEM_IDS) == 18


def response(**likert):
    return SurveyResponse(respondent="p1", is_user=True, likert=likert)


def test_category_score_mean():
    itu = CATEGORY_BY_NAME["intention_to_use"]
    assert category_score(response(itu1=6, itu2=7), itu) == Fraction(13, 2)


def test_category_score_available_items_only():
    itu = CATEGORY_BY_NAME["intention_to_use"]
    assert category_score(response(itu1=5), itu) == Fraction(5)


def test_category_score_all_missing():
    itu = CATEGORY_BY_NAME["intention_to_use"]
    assert category_score(response(pu1=5), itu) is None


def test_category_score_item_order_invariant():
    ease = CATEGORY_BY_NAME["perceived_ease_of_use"]
    a = category_score(response(peou1=3, peou2=7, peou4=5), ease)
    b = category_score(response(peou4=5, peou1=3, peou2=7), ease)
    assert a == b == Fraction(5)


def test_likert_range_enforced():
    with pytest.raises(ValueError):
        response(itu1=8)


def test_confirmation_rate():
    scores = [Fraction(5), Fraction(4), Fraction(6)]
    assert confirmation_rate(scores) == Fraction(2, 3)
    assert confirmation_rate([Fraction(5)]) == 1  # exactly 5 counts
    assert confirmation_rate([None, None]) is None


def test_regress_perfect_fit():
    x = list(range(10))
    y = [2 * v + 1 for v in x]
    result = regress(x, y)
    assert abs(result.slope - 2) < 1e-12
    assert abs(result.intercept - 1) < 1e-12
    assert abs(result.pearson_r - 1) < 1e-12
    assert result.p_value == 0.0


def test_regress_hand_computed_fixture():
    # x=(1,2,3,4), y=(2,1,4,3): Sxx=Syy=5, Sxy=3, so slope=0.6, r=0.6,
    # t = 0.6*sqrt(2/0.64) and p follows the df=2 closed form.
    result = regress([1, 2, 3, 4], [2, 1, 4, 3])
    assert abs(result.slope - 0.6) < 1e-12
    assert abs(result.intercept - 1.0) < 1e-12
    assert abs(result.pearson_r - 0.6) < 1e-12
    t = 0.6 * math.sqrt(2 / (1 - 0.36))
    expected_p = 2 * (1 - t2_cdf(t))
    assert abs(result.p_value - expected_p) < 1e-9
    assert abs(result.p_value - 0.4) < 1e-9  # the closed form lands exactly on 0.4
    assert result.n == 4


def test_regress_matches_exact_ols_oracle():
    x = [1, 2, 3, 5, 8, 9, 11]
    y = [2, 4, 3, 7, 9, 8, 14]
    beta, ses, _ = exact_ols([x], y)
    result = regress(x, y)
    assert abs(result.intercept - float(beta[0])) < 1e-9
    assert abs(result.slope - float(beta[1])) < 1e-9
    assert abs(result.slope_se - ses[1]) < 1e-9


def test_regress_drops_missing_pairs():
    x = [1, None, 2, 3, 4]
    y = [2, 9, 1, 4, 3]
    full = regress([1, 2, 3, 4], [2, 1, 4, 3])
    assert regress(x, y) == full


def test_regress_too_few_pairs():
    with pytest.raises(TooFewPairs):
        regress([1, 2], [3, 4])
    with pytest.raises(TooFewPairs):
        regress([1, None, 2], [1, 2, 3])


def test_regress_zero_variance():
    with pytest.raises(ZeroVariance):
        regress([3, 3, 3, 3], [1, 2, 3, 4])
    with pytest.raises(ZeroVariance):
        regress([1, 2, 3, 4], [2, 2, 2, 2])


def test_regress_r_symmetric_and_slope_scales():
    rng = random.Random(3)
    x = [rng.uniform(0, 10) for _ in range(25)]
    y = [3 * v + rng.gauss(0, 2) for v in x]
    forward = regress(x, y)
    backward = regress(y, x)
    assert abs(forward.pearson_r - backward.pearson_r) < 1e-12
    scaled = regress(x, [10 * v for v in y])
    assert abs(scaled.slope - 10 * forward.slope) < 1e-9
    assert abs(scaled.p_value - forward.p_value) < 1e-12


def test_regress_null_simulation_false_positive_rate():
    rng = random.Random(20230501)
    reps, n, hits = 2000, 36, 0
    for _ in range(reps):
        x = [rng.gauss(0, 1) for _ in range(n)]
        y = [rng.gauss(0, 1) for _ in range(n)]
        if regress(x, y).p_value < 0.05:
            hits += 1
    rate = hits / reps
    assert abs(rate - 0.05) <= 0.015


def test_mediation_matches_exact_ols_oracle():
    x = [1, 2, 3, 4, 5, 6]
    m = [2, 3, 5, 4, 7, 8]
    y = [3, 5, 6, 8, 9, 12]
    result = mediation(x, m, y)

    beta_a, ses_a, _ = exact_ols([x], m)
    beta_c, _, _ = exact_ols([x], y)
    beta_full, ses_full, _ = exact_ols([x, m], y)
    a, se_a = float(beta_a[1]), ses_a[1]
    c = float(beta_c[1])
    c_prime, b = float(beta_full[1]), float(beta_full[2])
    se_b = ses_full[2]

    assert abs(result.a - a) < 1e-9
    assert abs(result.b - b) < 1e-9
    assert abs(result.c - c) < 1e-9
    assert abs(result.c_prime - c_prime) < 1e-9
    z = a * b / math.sqrt(b * b * se_a**2 + a * a * se_b**2)
    assert abs(result.sobel_z - z) < 1e-9


def test_mediation_total_effect_decomposes():
    # c = c' + a*b holds exactly for OLS path coefficients.
    x = [1, 2, 3, 4, 5, 6, 7, 8]
    m = [2, 1, 4, 3, 6, 5, 8, 9]
    y = [1, 3, 2, 5, 4, 7, 8, 8]
    result = mediation(x, m, y)
    assert abs(result.c - (result.c_prime + result.a * result.b)) < 1e-9


def test_mediation_full_mediation_shape():
    rng = random.Random(8)
    x = [float(i) for i in range(12)]
    m = [v + rng.gauss(0, 0.01) for v in x]  # tiny noise keeps X and M separable
    y = [v for v in m]
    result = mediation(x, m, y)
    assert abs(result.a - 1) < 0.01
    assert abs(result.c_prime) < 0.05
    assert abs(result.a * result.b - result.c) < 0.05


def test_mediation_null_p_values_are_large_on_average():
    rng = random.Random(99)
    small = 0
    reps = 300
    for _ in range(reps):
        x = [rng.gauss(0, 1) for _ in range(20)]
        m = [rng.gauss(0, 1) for _ in range(20)]  # mediator unrelated
        y = [v + rng.gauss(0, 1) for v in x]
        if mediation(x, m, y).sobel_p < 0.05:
            small += 1
    assert small / reps < 0.08  # Sobel is conservative under the null


def test_mediation_too_few_triples():
    with pytest.raises(TooFewPairs):
        mediation([1, 2, 3], [1, 2, 3], [1, 2, 3])


def test_moderation_pure_interaction():
    x = [1, 2, 3, 4, 5, 6]
    w = [2, 1, 4, 3, 6, 5]
    y = [a * b for a, b in zip(x, w)]
    result = moderation(x, w, y)
    assert abs(result.interaction_slope - 1) < 1e-9
    assert result.interaction_p < 1e-9


def test_moderation_no_interaction():
    x = [1, 2, 3, 4, 5, 6, 7]
    w = [2, 1, 4, 3, 6, 5, 7]
    y = [a + b for a, b in zip(x, w)]
    result = moderation(x, w, y)
    assert abs(result.interaction_slope) < 1e-9


def test_moderation_matches_exact_ols_oracle():
    x = [1.0, 2, 3, 4, 5, 6, 7, 9]
    w = [2.0, 1, 4, 3, 6, 5, 8, 7]
    y = [3.0, 2, 9, 8, 20, 14, 30, 28]
    n = len(x)
    mx, mw = sum(x) / n, sum(w) / n
    xc = [Fraction(v) - Fraction(mx) for v in x]
    wc = [Fraction(v) - Fraction(mw) for v in w]
    inter = [a * b for a, b in zip(xc, wc)]
    beta, ses, _ = exact_ols([xc, wc, inter], y)
    result = moderation(x, w, y)
    assert abs(result.interaction_slope - float(beta[3])) < 1e-9
    assert abs(result.interaction_se - ses[3]) < 1e-9


def test_moderation_collinear_raises():
    x = [1, 2, 3, 4, 5, 6]
    with pytest.raises(ZeroVariance):
        moderation(x, x, [1, 2, 3, 4, 5, 7])


def survey_row(i, rng):
    likert = {}
    base = rng.randint(2, 6)
    for item in ITEM_IDS:
        if rng.random() < 0.08:
            continue  # non-response
        likert[item] = min(7, max(1, base + rng.randint(-1, 1)))
    return SurveyResponse(
        respondent=f"p{i}",
        is_user=rng.random() < 0.6,
        frequency=rng.choice(FREQUENCY_LEVELS) if rng.random() < 0.9 else None,
        likert=likert,
    )


def test_analyze_pipeline_shape():
    rng = random.Random(42)
    responses = [survey_row(i, rng) for i in range(64)]
    report = analyze(responses)
    assert report["n_respondents"] == 64
    assert report["n_users"] + report["n_non_users"] == 64
    assert set(report["categories"]) == {c.name for c in CATEGORIES}
    assert len(report["regressions"]["pairwise"]) == 20  # ordered pairs of 5
    itf = report["regressions"]["intention_to_frequency"]
    assert "slope" in itf or "error" in itf
    med = report["mediation_ease_usefulness_intention"]
    assert "sobel_p" in med or "error" in med
    mod = report["moderation_relevance_by_quality_on_usefulness"]
    assert "interaction_p" in mod or "error" in mod


def test_analyze_small_sample_degrades_gracefully():
    responses = [
        SurveyResponse(respondent="a", is_user=True, likert={"itu1": 5}),
        SurveyResponse(respondent="b", is_user=False, likert={"itu1": 3}),
    ]
    report = analyze(responses)
    assert report["regressions"]["intention_to_frequency"]["error"] == "TooFewPairs"

"""Technology-acceptance survey analytics.

Implements the questionnaire model (five Likert categories on a 1..7 scale
plus a 7-level usage-frequency item) and the statistical pipeline used to
evaluate it: category scores as available-item means, ordinary least squares
with Pearson r and a two-sided t-test (df = n-2), a two-regression mediation
analysis with a Sobel z-test, and moderation via a mean-centered interaction
term.  A rating of 5 or higher counts as confirmation of a category (4 is the
neutral point of the scale).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import stats as scipy_stats

from .errors import MissingValue, TooFewPairs, ZeroVariance

LIKERT_MIN, LIKERT_MAX = 1, 7
CONFIRMATION_THRESHOLD = 5

# Usage-frequency ladder, most to least frequent; encoded 1 (daily) .. 7
# (once per semester).
FREQUENCY_LEVELS: tuple[str, ...] = (
    "daily",
    "several_times_a_week",
    "weekly",
    "twice_a_month",
    "monthly",
    "twice_a_semester",
    "once_a_semester",
)


@dataclass(frozen=True)
class CategoryDef:
    name: str
    items: tuple[str, ...]


CATEGORIES: tuple[CategoryDef, ...] = (
    CategoryDef("intention_to_use", ("itu1", "itu2")),
    CategoryDef("output_quality", ("oq1", "oq2", "oq3", "oq4", "oq5", "oq6")),
    CategoryDef("relevance_to_study", ("rts1", "rts2")),
    CategoryDef("perceived_ease_of_use", ("peou1", "peou2", "peou3", "peou4")),
    CategoryDef("perceived_usefulness", ("pu1", "pu2", "pu3", "pu4")),
)

CATEGORY_BY_NAME: Mapping[str, CategoryDef] = {c.name: c for c in CATEGORIES}

ITEM_IDS: tuple[str, ...] = tuple(item for c in CATEGORIES for item in c.items)


@dataclass(frozen=True)
class SurveyResponse:
    respondent: str
    is_user: bool
    frequency: Optional[str] = None
    likert: Mapping[str, int] = field(default_factory=dict)
    age: Optional[int] = None
    gender: Optional[str] = None
    lectures: tuple[str, ...] = ()
    free_text: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for item, value in self.likert.items():
            if not LIKERT_MIN <= value <= LIKERT_MAX:
                raise ValueError(f"likert item {item} out of range: {value}")
        if self.frequency is not None and self.frequency not in FREQUENCY_LEVELS:
            raise ValueError(f"unknown frequency level: {self.frequency!r}")


def encode_frequency(level: Optional[str]) -> int:
    """Map a usage-frequency level to its 1..7 code (1 = daily)."""
    if level is None:
        raise MissingValue("frequency not reported")
    try:
        return FREQUENCY_LEVELS.index(level) + 1
    except ValueError:
        raise MissingValue(f"unknown frequency level: {level!r}") from None


def category_score(response: SurveyResponse, category: CategoryDef) -> Optional[Fraction]:
    """Mean over the category's answered items; None iff none answered.

    Non-response runs at 5-10% per item, so the mean is taken over available
    items rather than dropping the whole respondent.
    """
    values = [response.likert[item] for item in category.items if item in response.likert]
    if not values:
        return None
    return Fraction(sum(values), len(values))


def confirmation_rate(scores: Iterable[Optional[Fraction]]) -> Optional[Fraction]:
    """Share of respondents scoring at or above the confirmation threshold,
    over respondents with a score at all."""
    present = [s for s in scores if s is not None]
    if not present:
        return None
    confirmed = sum(1 for s in present if s >= CONFIRMATION_THRESHOLD)
    return Fraction(confirmed, len(present))


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    pearson_r: float
    p_value: float
    n: int
    slope_se: float
    slope_standardized: float  # equals r for simple regression


def _paired(x: Sequence, y: Sequence) -> tuple[list[float], list[float]]:
    if len(x) != len(y):
        raise ValueError("x and y must be paired by respondent")
    xs, ys = [], []
    for a, b in zip(x, y):
        if a is None or b is None:
            continue
        xs.append(float(a))
        ys.append(float(b))
    return xs, ys


def regress(x: Sequence, y: Sequence) -> RegressionResult:
    """Ordinary least squares of y on x, dropping pairs with missing values.

    Significance of Pearson r via t = r*sqrt((n-2)/(1-r^2)) against a
    two-sided Student-t with n-2 degrees of freedom.
    """
    xs, ys = _paired(x, y)
    n = len(xs)
    if n < 3:
        raise TooFewPairs(f"need at least 3 complete pairs, got {n}")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((v - mx) ** 2 for v in xs)
    syy = sum((v - my) ** 2 for v in ys)
    sxy = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    if sxx == 0 or syy == 0:
        raise ZeroVariance("x and y must both vary")
    slope = sxy / sxx
    intercept = my - slope * mx
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    sse = max(syy - slope * sxy, 0.0)
    df = n - 2
    sigma2 = sse / df
    slope_se = math.sqrt(sigma2 / sxx)
    if abs(r) >= 1.0:
        p = 0.0
    else:
        t = r * math.sqrt(df / (1.0 - r * r))
        p = 2.0 * float(scipy_stats.t.sf(abs(t), df))
    return RegressionResult(
        slope=slope, intercept=intercept, pearson_r=r, p_value=p, n=n,
        slope_se=slope_se, slope_standardized=r,
    )


def _ols(design: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """OLS fit with intercept column included in ``design``; returns
    (coefficients, standard errors, residual df)."""
    n, k = design.shape
    df = n - k
    if df < 1:
        raise TooFewPairs(f"need more than {k} complete cases, got {n}")
    if np.linalg.matrix_rank(design) < k:
        raise ZeroVariance("design matrix is singular (constant or collinear predictors)")
    xtx = design.T @ design
    beta = np.linalg.solve(xtx, design.T @ y)
    residuals = y - design @ beta
    sigma2 = float(residuals @ residuals) / df
    cov = sigma2 * np.linalg.inv(xtx)
    ses = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return beta, ses, df


def _complete_rows(*columns: Sequence) -> list[tuple[float, ...]]:
    rows = []
    for values in zip(*columns):
        if any(v is None for v in values):
            continue
        rows.append(tuple(float(v) for v in values))
    return rows


@dataclass(frozen=True)
class MediationResult:
    a: float  # antecedent -> mediator
    b: float  # mediator -> consequent, controlling for the antecedent
    c: float  # total effect
    c_prime: float  # direct effect
    sobel_z: float
    sobel_p: float
    n: int


def mediation(x: Sequence, m: Sequence, y: Sequence) -> MediationResult:
    """Two-regression mediation with a Sobel test for the indirect path a*b."""
    rows = _complete_rows(x, m, y)
    n = len(rows)
    if n < 4:
        raise TooFewPairs(f"need at least 4 complete triples, got {n}")
    xs = [r[0] for r in rows]
    ms = [r[1] for r in rows]
    ys = [r[2] for r in rows]

    path_a = regress(xs, ms)
    a, se_a = path_a.slope, path_a.slope_se
    c = regress(xs, ys).slope

    design = np.column_stack([np.ones(n), np.array(xs), np.array(ms)])
    beta, ses, _ = _ols(design, np.array(ys))
    c_prime, b = float(beta[1]), float(beta[2])
    se_b = float(ses[2])

    denominator = math.sqrt(b * b * se_a * se_a + a * a * se_b * se_b)
    if denominator == 0.0:
        z, p = 0.0, 1.0
    else:
        z = a * b / denominator
        p = 2.0 * float(scipy_stats.norm.sf(abs(z)))
    return MediationResult(a=a, b=b, c=c, c_prime=c_prime, sobel_z=z, sobel_p=p, n=n)


@dataclass(frozen=True)
class ModerationResult:
    interaction_slope: float
    interaction_se: float
    interaction_p: float
    n: int


def moderation(x: Sequence, w: Sequence, y: Sequence) -> ModerationResult:
    """Interaction test: OLS of y on mean-centered x, w and their product."""
    rows = _complete_rows(x, w, y)
    n = len(rows)
    if n < 5:
        raise TooFewPairs(f"need at least 5 complete triples, got {n}")
    xs = np.array([r[0] for r in rows])
    ws = np.array([r[1] for r in rows])
    ys = np.array([r[2] for r in rows])
    xc = xs - xs.mean()
    wc = ws - ws.mean()
    design = np.column_stack([np.ones(n), xc, wc, xc * wc])
    beta, ses, df = _ols(design, ys)
    coef, se = float(beta[3]), float(ses[3])
    if se == 0.0:
        p = 0.0 if coef != 0.0 else 1.0
    else:
        t = coef / se
        p = 2.0 * float(scipy_stats.t.sf(abs(t), df))
    return ModerationResult(interaction_slope=coef, interaction_se=se, interaction_p=p, n=n)


# -- whole-pipeline driver -----------------------------------------------------


def _regression_json(result: RegressionResult) -> dict:
    return {
        "slope": result.slope,
        "intercept": result.intercept,
        "pearson_r": result.pearson_r,
        "p_value": result.p_value,
        "n": result.n,
        "slope_se": result.slope_se,
        "slope_standardized": result.slope_standardized,
    }


def _try(fn, *args) -> dict:
    try:
        result = fn(*args)
    except (TooFewPairs, ZeroVariance) as exc:
        return {"error": exc.code, "detail": str(exc)}
    if isinstance(result, RegressionResult):
        return _regression_json(result)
    return {k: getattr(result, k) for k in result.__dataclass_fields__}


def analyze(responses: Sequence[SurveyResponse]) -> dict:
    """Run the full pipeline over one survey export.

    Regressions are computed over users only (respondents who reported using
    the system at all); category descriptives are reported for both groups.
    """
    users = [r for r in responses if r.is_user]
    non_users = [r for r in responses if not r.is_user]

    scores: dict[str, list[Optional[Fraction]]] = {
        c.name: [category_score(r, c) for r in users] for c in CATEGORIES
    }

    categories_out: dict[str, dict] = {}
    for c in CATEGORIES:
        user_scores = [s for s in scores[c.name] if s is not None]
        non_user_scores = [
            s for s in (category_score(r, c) for r in non_users) if s is not None
        ]
        rate = confirmation_rate(scores[c.name])
        categories_out[c.name] = {
            "items": list(c.items),
            "n_users": len(user_scores),
            "mean_users": float(sum(user_scores) / len(user_scores)) if user_scores else None,
            "n_non_users": len(non_user_scores),
            "mean_non_users": (
                float(sum(non_user_scores) / len(non_user_scores)) if non_user_scores else None
            ),
            "confirmation_rate": None if rate is None else float(rate),
        }

    pairwise: dict[str, dict] = {}
    for predictor in CATEGORIES:
        for outcome in CATEGORIES:
            if predictor.name == outcome.name:
                continue
            key = f"{predictor.name}->{outcome.name}"
            pairwise[key] = _try(regress, scores[predictor.name], scores[outcome.name])

    frequency_codes: list[Optional[int]] = []
    for r in users:
        frequency_codes.append(None if r.frequency is None else encode_frequency(r.frequency))

    return {
        "n_respondents": len(responses),
        "n_users": len(users),
        "n_non_users": len(non_users),
        "categories": categories_out,
        "regressions": {
            "pairwise": pairwise,
            "intention_to_frequency": _try(
                regress, scores["intention_to_use"], frequency_codes
            ),
        },
        "mediation_ease_usefulness_intention": _try(
            mediation,
            scores["perceived_ease_of_use"],
            scores["perceived_usefulness"],
            scores["intention_to_use"],
        ),
        "moderation_relevance_by_quality_on_usefulness": _try(
            moderation,
            scores["relevance_to_study"],
            scores["output_quality"],
            scores["perceived_usefulness"],
        ),
    }


def read_responses_csv(path: str) -> list[SurveyResponse]:
    """Parse a survey export.

    Expected columns: the Likert item ids (itu1..pu4), ``frequency``,
    ``is_user``, and optional ``respondent``, ``age``, ``gender``,
    ``lectures`` (semicolon-separated).  Empty cells are missing values.
    """
    responses = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for i, row in enumerate(reader, start=1):
            likert = {}
            for item in ITEM_IDS:
                cell = (row.get(item) or "").strip()
                if cell:
                    likert[item] = int(cell)
            frequency = (row.get("frequency") or "").strip() or None
            is_user_cell = (row.get("is_user") or "").strip().lower()
            is_user = is_user_cell in ("1", "true", "yes")
            age_cell = (row.get("age") or "").strip()
            gender = (row.get("gender") or "").strip() or None
            lectures = tuple(
                part.strip() for part in (row.get("lectures") or "").split(";") if part.strip()
            )
            responses.append(
                SurveyResponse(
                    respondent=(row.get("respondent") or "").strip() or f"row{i}",
                    is_user=is_user,
                    frequency=frequency,
                    likert=likert,
                    age=int(age_cell) if age_cell else None,
                    gender=gender,
                    lectures=lectures,
                )
            )
    return responses

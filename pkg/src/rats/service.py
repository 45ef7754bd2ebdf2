"""HTTP/JSON API and live-session channel.

Composition root: wires the stores, the domain services, bearer-token
authentication, and structured logging into one FastAPI application.  Every
mutating endpoint writes exactly one log entry (the route name, acting
pseudonym, and subject id), which is also what feeds the lottery-eligibility
rule via the ``login`` action.

Live sessions upgrade to a websocket at ``/live/{session}``: students send
``{"type": "answer", ...}`` messages and get their own graded result back;
lecturer connections receive ``{"type": "stats", ...}`` pushes, throttled to
one per ``stats_push_interval_ms`` and always on close.
"""

from __future__ import annotations

import time
from datetime import datetime
from typing import Callable, Optional, Union

from fastapi import Depends, FastAPI, Request, Response, WebSocket, WebSocketDisconnect
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.routing import APIRoute
from pydantic import BaseModel

from . import serialize
from .auth import AuthContext, AuthService
from .competence import load_catalog
from .config import Config
from .errors import DomainError, Forbidden, NotFound, ValidationFailed
from .model import Role, ScaffoldKind, check_access
from .review import AuthoringService, visible_to
from .scheduling import SchedulingService
from .services import AnalyticsService, AssessmentService
from .store import Stores


class LoggedRoute(APIRoute):
    """Writes one log entry per successful mutating request."""

    def get_route_handler(self) -> Callable:
        original = super().get_route_handler()

        async def handler(request: Request) -> Response:
            response = await original(request)
            if request.method in ("POST", "PUT", "DELETE", "PATCH") and response.status_code < 400:
                subject = getattr(request.state, "log_subject", None)
                if subject is None and request.path_params:
                    subject = next(iter(request.path_params.values()))
                request.app.state.stores.log(
                    self.name,
                    user=getattr(request.state, "pseudonym", None),
                    subject=subject,
                )
            return response

        return handler


# -- request bodies ----------------------------------------------------------

ResponseValue = Union[str, dict[str, bool]]


class SignupBody(BaseModel):
    email: str
    password: str
    role: str = "student"
    accept_terms: bool = False
    age: Optional[int] = None
    gender: Optional[str] = None


class LoginBody(BaseModel):
    email: str
    password: str


class VerifyBody(BaseModel):
    token: str


class PasswordBody(BaseModel):
    old_password: str
    new_password: str


class LectureBody(BaseModel):
    name: str
    audience: str = ""
    term: str = ""
    join_code: str
    appointment_dates: list[str]


class JoinBody(BaseModel):
    code: str


class SyllabusEntryBody(BaseModel):
    date: str
    topics: list[str] = []
    concepts: list[str] = []


class SyllabusBody(BaseModel):
    entries: list[SyllabusEntryBody]


class SheetBody(BaseModel):
    name: str
    rat_ids: list[str]
    available_from: str


class AutoSheetBody(BaseModel):
    date: str
    name: Optional[str] = None
    exclude: list[str] = []


class AnswerBody(BaseModel):
    rat: str
    response: ResponseValue


class RatingBody(BaseModel):
    stars: int


class ScaffoldBody(BaseModel):
    kind: str
    body: str


class TextBody(BaseModel):
    body: str


class GradeBody(BaseModel):
    correct: bool


class RoleBody(BaseModel):
    role: str


class TopicBody(BaseModel):
    id: Optional[str] = None
    name: str


class PreferencesBody(BaseModel):
    preferences: dict


def create_app(config: Config, stores: Optional[Stores] = None) -> FastAPI:
    config.validate()
    if stores is None:
        stores = Stores(config.content_store_url, config.user_store_url)
        stores.migrate()
    catalog = load_catalog()

    auth = AuthService(stores, config)
    authoring = AuthoringService(stores, config, catalog)
    scheduling = SchedulingService(stores, config)
    assessment = AssessmentService(stores, config, catalog)
    analytics = AnalyticsService(stores, config)

    app = FastAPI(title="rats", version="1.0.0")
    app.router.route_class = LoggedRoute
    app.state.stores = stores
    app.state.config = config
    app.state.scheduling = scheduling

    live_watchers: dict[str, list[WebSocket]] = {}
    live_last_push: dict[str, float] = {}

    @app.exception_handler(DomainError)
    async def domain_error_handler(request: Request, exc: DomainError):
        payload = {"error": exc.code, "detail": str(exc)}
        if isinstance(exc, ValidationFailed):
            payload["violations"] = [
                {"code": v.code, "fields": v.fields, "message": v.message}
                for v in exc.violations
            ]
        return JSONResponse(status_code=exc.status, content=payload)

    @app.exception_handler(RequestValidationError)
    async def request_error_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422, content={"error": "InvalidRequest", "detail": str(exc.errors())}
        )

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"error": "InvalidValue", "detail": str(exc)})

    def authed(request: Request) -> AuthContext:
        header = request.headers.get("authorization", "")
        token = header[7:].strip() if header.lower().startswith("bearer ") else None
        ctx = auth.resolve(token)
        request.state.pseudonym = ctx.pseudonym
        return ctx

    def require_role(ctx: AuthContext, role: Role) -> None:
        if not check_access(ctx.role, role):
            raise Forbidden(f"requires the {role.name.lower()} role")

    def today():
        return stores.clock().date()

    def reveal_for(ctx: AuthContext, rat) -> bool:
        return check_access(ctx.role, Role.RAT_CREATOR) or ctx.pseudonym == rat.author

    # -- auth -----------------------------------------------------------------

    @app.post("/auth/signup", status_code=201)
    def signup(body: SignupBody, request: Request):
        pseudonym = auth.signup(
            email=body.email,
            password=body.password,
            role=Role.parse(body.role),
            accept_terms=body.accept_terms,
            age=body.age,
            gender=body.gender,
        )
        request.state.pseudonym = pseudonym
        return {"status": "verification_sent"}

    @app.post("/auth/verify")
    def verify(body: VerifyBody, request: Request):
        pseudonym = auth.verify_email(body.token)
        request.state.pseudonym = pseudonym
        return {"verified": True}

    @app.post("/auth/login")
    def login(body: LoginBody, request: Request):
        token, ctx = auth.login(body.email, body.password)
        request.state.pseudonym = ctx.pseudonym
        return {"token": token, "role": ctx.role.name.lower(), "pseudonym": ctx.pseudonym}

    @app.post("/auth/password")
    def change_password(body: PasswordBody, request: Request, ctx: AuthContext = Depends(authed)):
        token = auth.change_password(ctx.pseudonym, body.old_password, body.new_password)
        return {"token": token}

    # -- profile ---------------------------------------------------------------

    @app.get("/me")
    def me(ctx: AuthContext = Depends(authed)):
        account = stores.account(ctx.pseudonym)
        return {
            "pseudonym": ctx.pseudonym,
            "email": ctx.email,
            "role": ctx.role.name.lower(),
            "preferences": account["preferences"],
            "lectures": sorted(stores.memberships_of(ctx.pseudonym)),
        }

    @app.put("/me/preferences")
    def set_preferences(body: PreferencesBody, request: Request, ctx: AuthContext = Depends(authed)):
        # Opaque dashboard-customization blob; the UI owns its meaning.
        stores.update_account(ctx.pseudonym, preferences=body.preferences)
        return {"preferences": body.preferences}

    @app.get("/me/stats")
    def me_stats(lecture: Optional[str] = None, ctx: AuthContext = Depends(authed)):
        return serialize.student_stats_json(analytics.student_stats(ctx.pseudonym, lecture))

    @app.get("/me/competence")
    def me_competence(lecture: Optional[str] = None, ctx: AuthContext = Depends(authed)):
        return {
            "lecture": lecture,
            "levels": serialize.levels_json(assessment.levels(ctx.pseudonym, lecture)),
            "progression": serialize.progression_json(
                assessment.progression(ctx.pseudonym, lecture)
            ),
        }

    @app.get("/me/lottery")
    def me_lottery(
        from_: Optional[str] = None, to: Optional[str] = None, ctx: AuthContext = Depends(authed)
    ):
        window = None
        if from_ and to:
            window = (datetime.fromisoformat(from_), datetime.fromisoformat(to))
        return {"eligible": analytics.lottery_eligible(ctx.pseudonym, window)}

    # -- criteria catalog, topics, concepts ----------------------------------------

    @app.get("/catalog")
    def get_catalog(ctx: AuthContext = Depends(authed)):
        return {
            "catalog_version": catalog.version,
            "entries": [
                {
                    "id": entry.id,
                    "description": entry.description,
                    "competencies": sorted(c.value for c in entry.competencies),
                }
                for entry in catalog.entries
            ],
        }

    @app.get("/topics")
    def list_topics(ctx: AuthContext = Depends(authed)):
        concepts_by_topic: dict[str, list] = {}
        for concept in stores.list_concepts():
            concepts_by_topic.setdefault(concept["topic_id"], []).append(
                {"id": concept["id"], "name": concept["name"]}
            )
        return [
            {**topic, "concepts": concepts_by_topic.get(topic["id"], [])}
            for topic in stores.list_topics()
        ]

    @app.post("/topics", status_code=201)
    def create_topic(body: TopicBody, request: Request, ctx: AuthContext = Depends(authed)):
        require_role(ctx, Role.RAT_CREATOR)
        topic_id = body.id or body.name.lower().replace(" ", "-")
        stores.put_topic(topic_id, body.name)
        request.state.log_subject = topic_id
        return {"id": topic_id, "name": body.name}

    @app.post("/topics/{topic_id}/concepts", status_code=201)
    def create_concept(
        topic_id: str, body: TopicBody, request: Request, ctx: AuthContext = Depends(authed)
    ):
        require_role(ctx, Role.RAT_CREATOR)
        concept_id = body.id or body.name.lower().replace(" ", "-")
        stores.put_concept(concept_id, topic_id, body.name)
        request.state.log_subject = concept_id
        return {"id": concept_id, "topic_id": topic_id, "name": body.name}

    # -- lectures -------------------------------------------------------------------

    @app.get("/lectures")
    def list_lectures(ctx: AuthContext = Depends(authed)):
        return [
            serialize.lecture_json(
                lecture,
                include_code=ctx.role is Role.ADMINISTRATOR
                or ctx.pseudonym in lecture["lecturers"],
            )
            for lecture in sorted(stores.list_lectures(), key=lambda l: l["name"])
        ]

    @app.post("/lectures", status_code=201)
    def create_lecture(body: LectureBody, request: Request, ctx: AuthContext = Depends(authed)):
        lecture = scheduling.create_lecture(
            ctx.pseudonym,
            ctx.role,
            body.name,
            body.audience,
            body.term,
            body.join_code,
            [serialize.parse_date(d) for d in body.appointment_dates],
        )
        request.state.log_subject = lecture["id"]
        return serialize.lecture_json(lecture, include_code=True)

    @app.post("/lectures/{lecture_id}/join")
    def join_lecture(lecture_id: str, body: JoinBody, ctx: AuthContext = Depends(authed)):
        lecture = scheduling.join_lecture(ctx.pseudonym, lecture_id, body.code)
        return {"joined": True, "lecture": serialize.lecture_json(lecture, include_code=False)}

    @app.put("/lectures/{lecture_id}/syllabus")
    def set_syllabus(lecture_id: str, body: SyllabusBody, ctx: AuthContext = Depends(authed)):
        entries = [
            {
                "date": serialize.parse_date(e.date),
                "topics": set(e.topics),
                "concepts": set(e.concepts),
            }
            for e in body.entries
        ]
        stored = scheduling.set_syllabus(ctx.pseudonym, ctx.role, lecture_id, entries)
        return {
            "entries": [
                {
                    "date": e["date"].isoformat(),
                    "topics": sorted(e["topics"]),
                    "concepts": sorted(e["concepts"]),
                }
                for e in sorted(stored, key=lambda e: e["date"])
            ]
        }

    @app.get("/lectures/{lecture_id}/syllabus")
    def get_syllabus(lecture_id: str, ctx: AuthContext = Depends(authed)):
        scheduling._require_lecture(lecture_id)
        return {
            "entries": [
                {
                    "date": e["date"].isoformat(),
                    "topics": sorted(e["topics"]),
                    "concepts": sorted(e["concepts"]),
                }
                for e in sorted(stores.syllabus(lecture_id), key=lambda e: e["date"])
            ]
        }

    @app.get("/lectures/{lecture_id}/rats")
    def lecture_rats(
        lecture_id: str, topic: Optional[str] = None, ctx: AuthContext = Depends(authed)
    ):
        pool = scheduling.student_pool(ctx.pseudonym, lecture_id, today(), topic)
        answered = stores.answered_rat_ids(ctx.pseudonym)
        return [
            {**serialize.rat_json(rat, reveal=False), "answered": rat.id in answered}
            for rat in pool
        ]

    @app.post("/lectures/{lecture_id}/answers")
    def answer_lecture_rat(
        lecture_id: str, body: AnswerBody, ctx: AuthContext = Depends(authed)
    ):
        result = assessment.ad_hoc_answer(
            ctx.pseudonym, ctx.role, body.rat, body.response, lecture_id=lecture_id
        )
        return serialize.graded_result_json(result)

    @app.get("/lectures/{lecture_id}/sheets")
    def list_sheets(lecture_id: str, ctx: AuthContext = Depends(authed)):
        sheets = scheduling.list_sheets(ctx.pseudonym, ctx.role, lecture_id, today())
        return [serialize.sheet_json(s) for s in sheets]

    @app.post("/lectures/{lecture_id}/sheets", status_code=201)
    def create_sheet(
        lecture_id: str, body: SheetBody, request: Request, ctx: AuthContext = Depends(authed)
    ):
        sheet = scheduling.create_manual_sheet(
            ctx.pseudonym,
            ctx.role,
            lecture_id,
            body.name,
            body.rat_ids,
            serialize.parse_date(body.available_from),
        )
        request.state.log_subject = sheet["id"]
        return serialize.sheet_json(sheet)

    @app.post("/lectures/{lecture_id}/sheets/auto", status_code=201)
    def create_auto_sheet(
        lecture_id: str, body: AutoSheetBody, request: Request, ctx: AuthContext = Depends(authed)
    ):
        on = serialize.parse_date(body.date)
        pool = scheduling.auto_pool(ctx.pseudonym, ctx.role, lecture_id, on)
        sheet = None
        if body.name:
            sheet = scheduling.create_auto_sheet(
                ctx.pseudonym, ctx.role, lecture_id, body.name, on, exclude=body.exclude
            )
            request.state.log_subject = sheet["id"]
        return {
            "pool": [serialize.rat_json(rat, reveal=True) for rat in pool],
            "sheet": None if sheet is None else serialize.sheet_json(sheet),
        }

    @app.get("/lectures/{lecture_id}/dashboard")
    def lecture_dashboard(lecture_id: str, ctx: AuthContext = Depends(authed)):
        lecture = scheduling._require_lecture(lecture_id)
        scheduling._require_owner(ctx.pseudonym, ctx.role, lecture)
        report = analytics.lecture_error_report(lecture_id)
        attempts = stores.attempts_where(lecture=lecture_id)
        return {
            "lecture": lecture_id,
            "n_members": len(stores.members(lecture_id)),
            "n_attempts": len(attempts),
            "error_report": serialize.error_report_json(report),
        }

    # -- RATs -------------------------------------------------------------------------

    @app.post("/rats", status_code=201)
    def create_rat(request: Request, payload: dict, ctx: AuthContext = Depends(authed)):
        rat = authoring.create_rat(
            ctx.pseudonym, ctx.role, serialize.rat_from_payload(payload)
        )
        request.state.log_subject = rat.id
        return serialize.rat_json(rat, reveal=True)

    @app.get("/rats")
    def search_rats(
        author: Optional[str] = None,
        lecture: Optional[str] = None,
        topic: Optional[str] = None,
        concept: Optional[str] = None,
        ctx: AuthContext = Depends(authed),
    ):
        rats = authoring.search_rats(
            ctx.role, author=author, lecture=lecture, topic=topic, concept=concept
        )
        return [serialize.rat_json(rat, reveal=reveal_for(ctx, rat)) for rat in rats]

    @app.get("/rats/{rat_id}")
    def get_rat(rat_id: str, ctx: AuthContext = Depends(authed)):
        rat = authoring.get_visible_rat(ctx.role, rat_id)
        return serialize.rat_json(rat, reveal=reveal_for(ctx, rat))

    @app.put("/rats/{rat_id}")
    def edit_rat(rat_id: str, payload: dict, ctx: AuthContext = Depends(authed)):
        rat = authoring.edit_rat(
            ctx.pseudonym, ctx.role, rat_id, serialize.rat_from_payload(payload)
        )
        return serialize.rat_json(rat, reveal=True)

    @app.delete("/rats/{rat_id}")
    def delete_rat(rat_id: str, ctx: AuthContext = Depends(authed)):
        rat = authoring.delete_rat(ctx.pseudonym, ctx.role, rat_id)
        return {"id": rat.id, "state": rat.state.value}

    @app.post("/rats/{rat_id}/duplicate", status_code=201)
    def duplicate_rat(rat_id: str, request: Request, ctx: AuthContext = Depends(authed)):
        copy = authoring.duplicate_rat(ctx.pseudonym, ctx.role, rat_id)
        request.state.log_subject = copy.id
        return serialize.rat_json(copy, reveal=True)

    @app.post("/rats/{rat_id}/approvals")
    def approve_rat(rat_id: str, ctx: AuthContext = Depends(authed)):
        rat = authoring.approve(ctx.pseudonym, ctx.role, rat_id)
        return {"id": rat.id, "state": rat.state.value, "approvals": len(rat.approvals)}

    @app.get("/rats/{rat_id}/scaffolds")
    def rat_scaffolds(rat_id: str, ctx: AuthContext = Depends(authed)):
        scaffolds = assessment.scaffolds_for(ctx.pseudonym, ctx.role, rat_id)
        return [
            serialize.scaffold_json(s, config.scaffold_approval_threshold) for s in scaffolds
        ]

    @app.post("/rats/{rat_id}/scaffolds", status_code=201)
    def add_scaffold(
        rat_id: str, body: ScaffoldBody, request: Request, ctx: AuthContext = Depends(authed)
    ):
        scaffold = authoring.add_scaffold(
            ctx.pseudonym, ctx.role, rat_id, ScaffoldKind(body.kind), body.body
        )
        request.state.log_subject = scaffold.id
        return serialize.scaffold_json(scaffold, config.scaffold_approval_threshold)

    @app.post("/rats/{rat_id}/scaffold-suggestions", status_code=201)
    def suggest_scaffold(
        rat_id: str, body: ScaffoldBody, request: Request, ctx: AuthContext = Depends(authed)
    ):
        scaffold = assessment.suggest_scaffold(
            ctx.pseudonym, rat_id, ScaffoldKind(body.kind), body.body
        )
        request.state.log_subject = scaffold.id
        return serialize.scaffold_json(scaffold, config.scaffold_approval_threshold)

    @app.post("/rats/{rat_id}/comments", status_code=201)
    def comment_rat(rat_id: str, body: TextBody, ctx: AuthContext = Depends(authed)):
        rat = stores.get_rat(rat_id)
        if rat is None:
            raise NotFound(f"RAT {rat_id} does not exist")
        if check_access(ctx.role, Role.RAT_CREATOR) or ctx.pseudonym == rat.author:
            comment = authoring.comment(ctx.pseudonym, ctx.role, rat_id, body.body)
        else:
            comment = assessment.comment_on_rat(ctx.pseudonym, rat_id, body.body)
        return {"id": comment["id"], "rat": rat_id, "body": comment["body"], "at": comment["at"]}

    @app.get("/rats/{rat_id}/comments")
    def rat_comments(rat_id: str, ctx: AuthContext = Depends(authed)):
        rat = authoring.get_visible_rat(ctx.role, rat_id)
        if not (check_access(ctx.role, Role.RAT_CREATOR) or ctx.pseudonym == rat.author):
            raise Forbidden("the review thread is for creators")
        return authoring.thread(rat_id)

    @app.post("/rats/{rat_id}/error-reports", status_code=201)
    def report_error(rat_id: str, body: TextBody, ctx: AuthContext = Depends(authed)):
        report = assessment.report_error(ctx.pseudonym, rat_id, body.body)
        return {"id": report["id"], "rat": rat_id}

    # -- scaffolds ---------------------------------------------------------------------

    @app.post("/scaffolds/{scaffold_id}/approvals")
    def approve_scaffold(scaffold_id: str, ctx: AuthContext = Depends(authed)):
        scaffold = authoring.approve_scaffold(ctx.pseudonym, ctx.role, scaffold_id)
        return serialize.scaffold_json(scaffold, config.scaffold_approval_threshold)

    @app.post("/scaffolds/{scaffold_id}/rating")
    def rate_scaffold(
        scaffold_id: str, body: RatingBody, ctx: AuthContext = Depends(authed)
    ):
        mean = assessment.rate_scaffold(ctx.pseudonym, scaffold_id, body.stars)
        return {"id": scaffold_id, "mean_rating": mean}

    # -- sheet sessions -------------------------------------------------------------------

    @app.post("/sheets/{sheet_id}/sessions", status_code=201)
    def begin_session(sheet_id: str, request: Request, ctx: AuthContext = Depends(authed)):
        session = assessment.begin_session(ctx.pseudonym, sheet_id, today())
        sheet = scheduling.get_sheet(sheet_id)
        request.state.log_subject = session.id
        return {
            "id": session.id,
            "sheet": sheet_id,
            "cursor": session.cursor,
            "completed": session.completed,
            "rat_ids": sheet["rat_ids"],
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str, ctx: AuthContext = Depends(authed)):
        session = stores.get_session(session_id)
        if session is None or session.student != ctx.pseudonym:
            raise NotFound(f"session {session_id} does not exist")
        sheet = scheduling.get_sheet(session.sheet)
        current = None
        if not session.completed:
            rat = stores.get_rat(sheet["rat_ids"][session.cursor])
            current = serialize.rat_json(rat, reveal=False)
        return {
            "id": session.id,
            "sheet": session.sheet,
            "cursor": session.cursor,
            "completed": session.completed,
            "rat_ids": sheet["rat_ids"],
            "current_rat": current,
        }

    @app.post("/sessions/{session_id}/answers")
    def submit_answer(
        session_id: str, body: AnswerBody, ctx: AuthContext = Depends(authed)
    ):
        result = assessment.submit_answer(ctx.pseudonym, session_id, body.rat, body.response)
        return serialize.graded_result_json(result)

    # -- manual grading --------------------------------------------------------------------

    @app.get("/attempts")
    def list_ungraded(ctx: AuthContext = Depends(authed)):
        pending = assessment.ungraded_attempts(ctx.role)
        return [serialize.attempt_json(a) for a in pending]

    @app.post("/attempts/{attempt_id}/grade")
    def grade_attempt(
        attempt_id: str, body: GradeBody, ctx: AuthContext = Depends(authed)
    ):
        attempt = assessment.grade_attempt(ctx.role, attempt_id, body.correct)
        return serialize.attempt_json(attempt)

    # -- cross-lecture questionnaire ----------------------------------------------------------

    @app.get("/cross-lecture/next")
    def cross_lecture_next(ctx: AuthContext = Depends(authed)):
        pool = scheduling.cross_lecture_pool(ctx.pseudonym, ctx.role)
        if not pool:
            return {"rat": None, "remaining": 0}
        return {"rat": serialize.rat_json(pool[0], reveal=False), "remaining": len(pool)}

    @app.post("/cross-lecture/answers")
    def answer_cross_lecture(body: AnswerBody, ctx: AuthContext = Depends(authed)):
        result = assessment.ad_hoc_answer(ctx.pseudonym, ctx.role, body.rat, body.response)
        return serialize.graded_result_json(result)

    # -- live sessions ---------------------------------------------------------------------------

    def live_answer(ctx: AuthContext, session_id: str, rat_id: str, response):
        from .assessment import assemble_feedback, grade
        from .model import AttemptContext, PublicationState, QuestionKind
        from .errors import RatNotPublished

        lecture_id = scheduling.live.lecture_of(session_id)
        scheduling.require_member(ctx.pseudonym, lecture_id)
        rat = stores.get_rat(rat_id)
        if rat is None:
            raise NotFound(f"RAT {rat_id} does not exist")
        if rat.state is not PublicationState.PUBLISHED:
            raise RatNotPublished(f"RAT {rat_id} is not published")
        verdict = grade(rat, response)  # ShapeMismatch before anything is tallied
        if rat.kind is QuestionKind.MULTIPLE_CHOICE:
            key = str(response)
        else:
            key = {True: "correct", False: "incorrect", None: "ungraded"}[verdict]
        scheduling.live.submit(session_id, ctx.pseudonym, rat_id, key, verdict)
        assessment.record_pregraded(
            ctx.pseudonym, rat, response, verdict, AttemptContext.LIVE_SHEET, lecture_id
        )
        return assemble_feedback(rat, response, verdict)

    async def push_stats(session_id: str, force: bool = False) -> None:
        now = time.monotonic()
        interval = config.stats_push_interval_ms / 1000.0
        if not force and now - live_last_push.get(session_id, 0.0) < interval:
            return
        live_last_push[session_id] = now
        stats = scheduling.live.stats(session_id)
        for ws in list(live_watchers.get(session_id, [])):
            try:
                await ws.send_json(stats)
            except Exception:
                live_watchers[session_id].remove(ws)

    @app.post("/sheets/{sheet_id}/live", status_code=201)
    async def open_live(sheet_id: str, request: Request, ctx: AuthContext = Depends(authed)):
        session_id = scheduling.open_live(ctx.pseudonym, ctx.role, sheet_id)
        request.state.log_subject = session_id
        return {"session": session_id, "sheet": sheet_id}

    @app.post("/live/{session_id}/answers")
    async def live_answer_endpoint(
        session_id: str, body: AnswerBody, ctx: AuthContext = Depends(authed)
    ):
        result = live_answer(ctx, session_id, body.rat, body.response)
        await push_stats(session_id)
        return serialize.graded_result_json(result)

    @app.get("/live/{session_id}/stats")
    def live_stats(session_id: str, ctx: AuthContext = Depends(authed)):
        return scheduling.live_stats(ctx.pseudonym, ctx.role, session_id)

    @app.post("/live/{session_id}/close")
    async def close_live(session_id: str, ctx: AuthContext = Depends(authed)):
        stats = scheduling.close_live(ctx.pseudonym, ctx.role, session_id)
        await push_stats(session_id, force=True)
        return stats

    @app.websocket("/live/{session_id}")
    async def live_channel(websocket: WebSocket, session_id: str):
        try:
            ctx = auth.resolve(websocket.query_params.get("token"))
        except DomainError:
            await websocket.close(code=4401)
            return
        try:
            lecture_id = scheduling.live.lecture_of(session_id)
        except NotFound:
            await websocket.close(code=4404)
            return
        lecture = stores.get_lecture(lecture_id)
        is_console = ctx.role is Role.ADMINISTRATOR or ctx.pseudonym in lecture["lecturers"]

        if is_console:
            await websocket.accept()
            live_watchers.setdefault(session_id, []).append(websocket)
            await websocket.send_json(scheduling.live.stats(session_id))  # resync snapshot
            try:
                while True:
                    await websocket.receive_text()  # pings; stats flow one way
            except WebSocketDisconnect:
                pass
            finally:
                if websocket in live_watchers.get(session_id, []):
                    live_watchers[session_id].remove(websocket)
            return

        try:
            scheduling.require_member(ctx.pseudonym, lecture_id)
        except DomainError:
            await websocket.close(code=4403)
            return
        await websocket.accept()
        try:
            while True:
                message = await websocket.receive_json()
                if message.get("type") != "answer":
                    await websocket.send_json(
                        {"type": "error", "error": "ShapeMismatch", "detail": "expected an answer message"}
                    )
                    continue
                try:
                    result = live_answer(
                        ctx, message.get("session") or session_id,
                        message.get("rat"), message.get("response"),
                    )
                except DomainError as exc:
                    await websocket.send_json(
                        {"type": "error", "error": exc.code, "detail": str(exc)}
                    )
                    continue
                await websocket.send_json(
                    {"type": "result", "rat": message.get("rat"), **serialize.graded_result_json(result)}
                )
                await push_stats(session_id)
        except WebSocketDisconnect:
            pass

    # -- admin ---------------------------------------------------------------------------------

    @app.get("/admin/stats")
    def admin_stats(
        user: Optional[str] = None,
        action: Optional[str] = None,
        from_: Optional[str] = None,
        to: Optional[str] = None,
        ctx: AuthContext = Depends(authed),
    ):
        require_role(ctx, Role.ADMINISTRATOR)
        since = datetime.fromisoformat(from_) if from_ else None
        until = datetime.fromisoformat(to) if to else None
        entries = stores.log_entries(user=user, action=action, since=since, until=until)
        return {
            "rats_created": [
                {"lecture": b.lecture, "week": b.week,
                 "creators": [{"creator": c, "count": n} for c, n in sorted(b.creators.items())]}
                for b in analytics.creation_stats()
            ],
            "logs": [
                {"at": e["at"].isoformat(), "user": e["user"], "action": e["action"],
                 "subject": e["subject"]}
                for e in entries
            ],
        }

    @app.post("/admin/users/{pseudonym}/role")
    def set_role(pseudonym: str, body: RoleBody, ctx: AuthContext = Depends(authed)):
        require_role(ctx, Role.ADMINISTRATOR)
        if stores.account(pseudonym) is None:
            raise NotFound("no such account")
        stores.update_account(pseudonym, role=Role.parse(body.role))
        return {"pseudonym": pseudonym, "role": body.role}

    @app.delete("/admin/users/{pseudonym}")
    def delete_account(pseudonym: str, ctx: AuthContext = Depends(authed)):
        require_role(ctx, Role.ADMINISTRATOR)
        if stores.account(pseudonym) is None:
            raise NotFound("no such account")
        # Only the identity row dies; attempts and log entries survive under
        # the pseudonym.
        stores.delete_account(pseudonym)
        return {"deleted": pseudonym}

    if config.ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app

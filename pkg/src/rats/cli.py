"""Operator command line: serve, migrate, seed, survey-analyze, export-dashboard."""

from __future__ import annotations

import json
import sys
from datetime import date
from pathlib import Path

import click

from . import serialize, survey
from .auth import hash_password
from .competence import load_catalog
from .config import Config, load_config
from .model import PublicationState, Role
from .serialize import rat_from_payload
from .store import Stores, new_id


def _stores(config: Config) -> Stores:
    for url in (config.content_store_url, config.user_store_url):
        if url.startswith("sqlite:///") and ":memory:" not in url:
            Path(url.removeprefix("sqlite:///")).parent.mkdir(parents=True, exist_ok=True)
    stores = Stores(config.content_store_url, config.user_store_url)
    stores.migrate()
    return stores


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config file; RATS_* environment variables override it.")
@click.pass_context
def main(ctx, config_path):
    ctx.obj = load_config(config_path)


@main.command()
@click.pass_obj
def migrate(config: Config):
    """Create the content and user store schemas."""
    _stores(config)
    click.echo(f"content store ready: {config.content_store_url}")
    click.echo(f"user store ready: {config.user_store_url}")


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.pass_obj
def serve(config: Config, host, port):
    """Run the HTTP service."""
    import logging

    import uvicorn

    from .service import create_app
    from .store import audit_log

    if not audit_log.handlers:  # one JSON line per audit event on stdout
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(logging.Formatter("%(message)s"))
        audit_log.addHandler(handler)
        audit_log.setLevel(logging.INFO)

    app = create_app(config)
    uvicorn.run(app, host=host or config.listen_host, port=port or config.listen_port)


def _load_fixture(fixtures: Path, name: str) -> list:
    path = fixtures / f"{name}.json"
    if not path.exists():
        return []
    return json.loads(path.read_text("utf-8"))


@main.command()
@click.option("--fixtures", "fixtures_dir", type=click.Path(exists=True, file_okay=False),
              required=True)
@click.pass_obj
def seed(config: Config, fixtures_dir):
    """Load JSON fixtures (users, topics, concepts, lectures, rats).

    Upserts by id/email, so re-running is idempotent.
    """
    stores = _stores(config)
    fixtures = Path(fixtures_dir)
    counts = {}

    emails_to_pseudonym: dict[str, str] = {}
    users = _load_fixture(fixtures, "users")
    for user in users:
        email = user["email"].strip().lower()
        existing = stores.account_by_email(email)
        if existing is None:
            pseudonym = stores.create_account(
                email=email,
                password_hash=hash_password(user["password"]),
                role=Role.parse(user.get("role", "student")),
                terms_accepted=True,
                verify_token=None,
            )
        else:
            pseudonym = existing["pseudonym"]
            stores.update_account(pseudonym, role=Role.parse(user.get("role", "student")))
        if user.get("verified", True):
            stores.update_account(pseudonym, email_verified=True)
        emails_to_pseudonym[email] = pseudonym
    counts["users"] = len(users)

    topics = _load_fixture(fixtures, "topics")
    for topic in topics:
        stores.put_topic(topic["id"], topic["name"])
    counts["topics"] = len(topics)

    concepts = _load_fixture(fixtures, "concepts")
    for concept in concepts:
        stores.put_concept(concept["id"], concept["topic_id"], concept["name"])
    counts["concepts"] = len(concepts)

    lectures = _load_fixture(fixtures, "lectures")
    for lecture in lectures:
        lecturers = [
            emails_to_pseudonym.get(e.strip().lower(), e) for e in lecture.get("lecturers", [])
        ]
        stores.put_lecture(
            lecture["id"],
            lecture["name"],
            lecture.get("audience", ""),
            lecture.get("term", ""),
            lecture["join_code"],
            [date.fromisoformat(d) for d in lecture.get("appointment_dates", [])],
            lecturers,
        )
        syllabus = [
            {
                "date": date.fromisoformat(e["date"]),
                "topics": set(e.get("topics", [])),
                "concepts": set(e.get("concepts", [])),
            }
            for e in lecture.get("syllabus", [])
        ]
        if syllabus:
            stores.set_syllabus(lecture["id"], syllabus)
    counts["lectures"] = len(lectures)

    rats = _load_fixture(fixtures, "rats")
    for payload in rats:
        rat = rat_from_payload(payload, rat_id=payload.get("id") or new_id())
        author = payload.get("author", "")
        rat = rat.__class__(**{
            **rat.__dict__,
            "author": emails_to_pseudonym.get(author, author),
            "state": PublicationState(payload.get("state", "draft")),
            "approvals": frozenset(payload.get("approvals", [])),
            "created_at": stores.clock(),
        })
        stores.put_rat(rat)
    counts["rats"] = len(rats)

    for name, n in counts.items():
        click.echo(f"seeded {name}: {n}")


@main.command("survey-analyze")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def survey_analyze(input_path, out_path):
    """Run the acceptance-survey pipeline over a CSV export."""
    responses = survey.read_responses_csv(input_path)
    report = survey.analyze(responses)
    Path(out_path).write_text(json.dumps(report, indent=2) + "\n", "utf-8")
    click.echo(f"analyzed {report['n_respondents']} responses "
               f"({report['n_users']} users) -> {out_path}")


@main.command("export-dashboard")
@click.option("--lecture", "lecture_id", required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="dashboard-export")
@click.pass_obj
def export_dashboard(config: Config, lecture_id, out_dir):
    """Write the lecturer dashboard (JSON) and error-category CSV for offline
    analysis."""
    from . import analytics as analytics_mod

    stores = _stores(config)
    if stores.get_lecture(lecture_id) is None:
        click.echo(f"error: lecture {lecture_id} does not exist", err=True)
        sys.exit(1)
    attempts = stores.attempts_where(lecture=lecture_id)
    rats = {rat.id: rat for rat in stores.list_rats()}
    report = analytics_mod.classify_errors(
        attempts, rats, config.min_answers_for_classification
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "dashboard.json").write_text(
        json.dumps(
            {
                "lecture": lecture_id,
                "n_attempts": len(attempts),
                "error_report": serialize.error_report_json(report),
            },
            indent=2,
        )
        + "\n",
        "utf-8",
    )
    (out / "errors.csv").write_text(analytics_mod.error_report_csv(report), "utf-8")
    click.echo(f"wrote {out / 'dashboard.json'} and {out / 'errors.csv'}")


if __name__ == "__main__":
    main()

"""Service configuration: JSON file plus RATS_* environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

ENV_PREFIX = "RATS_"


@dataclass
class Config:
    rat_approval_threshold: int = 2
    scaffold_approval_threshold: int = 1
    min_answers_for_classification: int = 5
    allowed_email_domains: Sequence[str] = field(default_factory=lambda: ["example.edu"])
    stats_push_interval_ms: int = 500
    content_store_url: str = "sqlite:///data/content.db"
    user_store_url: str = "sqlite:///data/users.db"
    listen_host: str = "127.0.0.1"
    listen_port: int = 8000
    min_password_length: int = 10
    ui_dir: Optional[str] = None  # built frontend bundle, mounted at /ui when set

    def validate(self) -> None:
        if self.rat_approval_threshold < 1:
            raise ValueError("rat_approval_threshold must be >= 1")
        if self.scaffold_approval_threshold < 1:
            raise ValueError("scaffold_approval_threshold must be >= 1")
        if self.min_answers_for_classification < 1:
            raise ValueError("min_answers_for_classification must be >= 1")
        in_memory = ":memory:" in self.content_store_url and ":memory:" in self.user_store_url
        if self.content_store_url == self.user_store_url and not in_memory:
            # Separate in-memory engines are distinct databases even under the
            # same URL string; everything else must not share a database.
            raise ValueError("content and user store URLs must be distinct")


def load_config(path: Optional[str] = None, env: Optional[dict] = None) -> Config:
    """Build a Config from an optional JSON file and RATS_* env overrides."""
    values: dict = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            values.update(json.load(fh))
    env = os.environ if env is None else env
    for f in fields(Config):
        key = ENV_PREFIX + f.name.upper()
        if key not in env:
            continue
        raw = env[key]
        if f.name == "allowed_email_domains":
            values[f.name] = [d.strip() for d in raw.split(",") if d.strip()]
        elif f.type == "int":
            values[f.name] = int(raw)
        else:
            values[f.name] = raw
    known = {f.name for f in fields(Config)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    config = Config(**values)
    config.validate()
    return config

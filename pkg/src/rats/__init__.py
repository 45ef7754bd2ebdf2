"""Formative assessment service: rapid assessment tasks with elaborated
feedback, competence estimation, review workflows, live sessions, and survey
analytics."""

__version__ = "1.0.0"

"""Domain error hierarchy shared by all modules.

Every error carries a machine-readable ``code`` (its class name by default)
and the HTTP status the service layer maps it to.  Handlers render errors as
``{"error": code, "detail": str(exc)}``.
"""

from __future__ import annotations


class DomainError(Exception):
    """Base class for expected, client-visible failures."""

    status = 422

    @property
    def code(self) -> str:
        return type(self).__name__


class Unauthenticated(DomainError):
    status = 401


class BadCredentials(DomainError):
    status = 401


class Unverified(DomainError):
    status = 403


class Forbidden(DomainError):
    status = 403


class NotFound(DomainError):
    status = 404


class BadCode(DomainError):
    """Join code does not match the lecture."""

    status = 404


class Conflict(DomainError):
    status = 409


class SessionComplete(Conflict):
    pass


class SessionClosed(Conflict):
    pass


class CursorConflict(Conflict):
    """Submitted RAT is not the one at the session cursor (replay or race)."""


class AlreadyAnswered(Conflict):
    pass


class AlreadyOpen(Conflict):
    """A live session for this sheet is already open."""


class NameTaken(Conflict):
    """Sheet names are unique per lecture."""


class NotMember(Forbidden):
    status = 403


class SelfApproval(Conflict):
    pass


class DuplicateApproval(Conflict):
    pass


class InvalidState(Conflict):
    """Operation not allowed in the entity's current publication state."""


class RatNotPublished(Conflict):
    pass


class NotViewed(Conflict):
    """Rating requires having viewed the scaffold first."""


class NotAnswered(Conflict):
    """Suggestion/comment/report requires having answered the RAT first."""


class NotAvailable(Conflict):
    """Sheet not yet available to students."""


class ValidationFailed(DomainError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class ShapeMismatch(DomainError):
    pass


class OutOfRange(DomainError):
    pass


class EmptyBody(DomainError):
    pass


class UnknownCriterion(DomainError):
    pass


class InvalidMember(DomainError):
    def __init__(self, rat_id: str, reason: str):
        self.rat_id = rat_id
        self.reason = reason
        super().__init__(f"{rat_id}: {reason}")


class NoSyllabus(DomainError):
    pass


class DomainNotAllowed(DomainError):
    pass


class WeakPassword(DomainError):
    pass


class TermsNotAccepted(DomainError):
    pass


class EmailTaken(Conflict):
    pass


class MissingValue(DomainError):
    """A required survey value is absent."""


class TooFewPairs(DomainError):
    pass


class ZeroVariance(DomainError):
    pass

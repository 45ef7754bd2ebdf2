"""RAT and scaffold lifecycle: authoring, the N-expert approval state machine,
threaded review comments, and email notifications via the outbox.

A RAT starts in draft and becomes visible to students only after the
configured number of distinct non-author reviewers approved it (two by
default).  Any edit clears the approvals again: a revised item has to pass
review anew.  Deletes are soft so attempt history stays referentially intact.
"""

from __future__ import annotations

import dataclasses
from typing import Optional

from . import model
from .competence import CriterionCatalog
from .config import Config
from .errors import (
    DuplicateApproval,
    EmptyBody,
    Forbidden,
    InvalidState,
    NotFound,
    SelfApproval,
    ValidationFailed,
)
from .model import PublicationState, RAT, Role, Scaffold, check_access
from .store import Stores, new_id


def visible_to(role: Role, state: PublicationState) -> bool:
    """Students see published items only; reviewers and up see every state."""
    if check_access(role, Role.RAT_CREATOR):
        return True
    return state is PublicationState.PUBLISHED


def notify_thread(stores: Stores, rat: RAT, commenter: str, body: str) -> dict:
    """Append a comment, subscribe the commenter, and email every other
    subscriber.  The notification carries the RAT id and the comment itself."""
    comment = stores.add_comment(rat.id, commenter, body)
    stores.subscribe(rat.id, rat.author)
    stores.subscribe(rat.id, commenter)
    for subscriber in sorted(stores.subscribers(rat.id)):
        if subscriber == commenter:
            continue
        account = stores.account(subscriber)
        if account is None:  # deleted account; nothing to deliver
            continue
        stores.add_notification(
            to=account["email"],
            subject=f"New comment on RAT {rat.id}",
            body=f"RAT {rat.id}: {body}",
        )
    return comment


class AuthoringService:
    def __init__(self, stores: Stores, config: Config, catalog: CriterionCatalog):
        self.stores = stores
        self.config = config
        self.catalog = catalog

    # -- helpers -----------------------------------------------------------

    def _require_rat(self, rat_id: str) -> RAT:
        rat = self.stores.get_rat(rat_id)
        if rat is None:
            raise NotFound(f"RAT {rat_id} does not exist")
        return rat

    def _validate(self, rat: RAT) -> None:
        violations = model.validate_rat(
            rat,
            concept_topics=self.stores.concept_topics(),
            valid_criteria=self.catalog.ids,
        )
        if violations:
            raise ValidationFailed(violations)

    def _can_edit(self, actor: str, role: Role, rat: RAT) -> bool:
        return actor == rat.author or check_access(role, Role.LECTURER)

    # -- RAT lifecycle -------------------------------------------------------

    def create_rat(self, actor: str, role: Role, rat: RAT) -> RAT:
        if not check_access(role, Role.RAT_CREATOR):
            raise Forbidden("creating RATs requires the RAT-creator role")
        draft = dataclasses.replace(
            rat,
            id=rat.id or new_id(),
            author=actor,
            state=PublicationState.DRAFT,
            approvals=frozenset(),
            created_at=self.stores.clock(),
        )
        self._validate(draft)
        self.stores.put_rat(draft)
        self.stores.subscribe(draft.id, actor)
        return draft

    def approve(self, actor: str, role: Role, rat_id: str) -> RAT:
        if not check_access(role, Role.RAT_CREATOR):
            raise Forbidden("approving requires the RAT-creator role")
        with self.stores.lock:  # compare-and-set on the approvals set
            rat = self._require_rat(rat_id)
            if rat.state not in (PublicationState.DRAFT, PublicationState.IN_REVIEW):
                raise InvalidState(f"cannot approve a RAT in state {rat.state.value}")
            if actor == rat.author:
                raise SelfApproval("authors cannot approve their own RAT")
            if actor in rat.approvals:
                raise DuplicateApproval("reviewer already approved this RAT")
            approvals = rat.approvals | {actor}
            state = (
                PublicationState.PUBLISHED
                if len(approvals) >= self.config.rat_approval_threshold
                else PublicationState.IN_REVIEW
            )
            updated = dataclasses.replace(rat, approvals=approvals, state=state)
            self.stores.put_rat(updated)
        return updated

    def edit_rat(self, actor: str, role: Role, rat_id: str, changes: RAT) -> RAT:
        rat = self._require_rat(rat_id)
        if not self._can_edit(actor, role, rat):
            raise Forbidden("only the author or a lecturer may edit")
        if rat.state is PublicationState.RETIRED:
            raise InvalidState("retired RATs cannot be edited")
        # A revision must be re-approved: approvals are cleared, published
        # items drop back to in-review.
        state = (
            PublicationState.IN_REVIEW
            if rat.state in (PublicationState.PUBLISHED, PublicationState.IN_REVIEW)
            else PublicationState.DRAFT
        )
        updated = dataclasses.replace(
            changes,
            id=rat.id,
            author=rat.author,
            created_at=rat.created_at,
            state=state,
            approvals=frozenset(),
        )
        self._validate(updated)
        self.stores.put_rat(updated)
        return updated

    def duplicate_rat(self, actor: str, role: Role, rat_id: str) -> RAT:
        rat = self._require_rat(rat_id)
        if not self._can_edit(actor, role, rat):
            raise Forbidden("only the author or a lecturer may duplicate")
        copy = dataclasses.replace(
            rat,
            id=new_id(),
            author=actor,
            state=PublicationState.DRAFT,
            approvals=frozenset(),
            created_at=self.stores.clock(),
        )
        self.stores.put_rat(copy)
        self.stores.subscribe(copy.id, actor)
        return copy

    def delete_rat(self, actor: str, role: Role, rat_id: str) -> RAT:
        rat = self._require_rat(rat_id)
        if not self._can_edit(actor, role, rat):
            raise Forbidden("only the author or a lecturer may delete")
        retired = dataclasses.replace(rat, state=PublicationState.RETIRED)
        self.stores.put_rat(retired)
        return retired

    def search_rats(
        self,
        role: Role,
        author: Optional[str] = None,
        lecture: Optional[str] = None,
        topic: Optional[str] = None,
        concept: Optional[str] = None,
    ) -> list[RAT]:
        """Exact-match filters combined by conjunction, visibility-filtered."""
        results = []
        for rat in self.stores.list_rats():
            if not visible_to(role, rat.state):
                continue
            if author is not None and rat.author != author:
                continue
            if lecture is not None and lecture not in rat.lectures:
                continue
            if topic is not None and topic not in rat.topics:
                continue
            if concept is not None and concept not in rat.concepts:
                continue
            results.append(rat)
        return sorted(results, key=lambda r: r.id)

    def get_visible_rat(self, role: Role, rat_id: str) -> RAT:
        rat = self._require_rat(rat_id)
        if not visible_to(role, rat.state):
            raise NotFound(f"RAT {rat_id} does not exist")  # hide unpublished items
        return rat

    # -- review thread ---------------------------------------------------------

    def comment(self, actor: str, role: Role, rat_id: str, body: str) -> dict:
        if not body.strip():
            raise EmptyBody("comment body must not be empty")
        rat = self._require_rat(rat_id)
        if not (check_access(role, Role.RAT_CREATOR) or actor == rat.author):
            raise Forbidden("commenting requires the RAT-creator role")
        return notify_thread(self.stores, rat, actor, body)

    def thread(self, rat_id: str) -> list[dict]:
        self._require_rat(rat_id)
        return self.stores.comments_for(rat_id)

    # -- scaffold approval -------------------------------------------------------

    def approve_scaffold(self, actor: str, role: Role, scaffold_id: str) -> Scaffold:
        if not check_access(role, Role.RAT_CREATOR):
            raise Forbidden("approving requires the RAT-creator role")
        with self.stores.lock:
            scaffold = self.stores.get_scaffold(scaffold_id)
            if scaffold is None:
                raise NotFound(f"scaffold {scaffold_id} does not exist")
            if scaffold.visible(self.config.scaffold_approval_threshold):
                return scaffold  # approval is absorbing once visible
            if actor == scaffold.suggested_by:
                raise SelfApproval("suggesters cannot approve their own scaffold")
            if actor in scaffold.approvals:
                raise DuplicateApproval("reviewer already approved this scaffold")
            updated = dataclasses.replace(scaffold, approvals=scaffold.approvals | {actor})
            self.stores.put_scaffold(updated)
        return updated

    def add_scaffold(
        self, actor: str, role: Role, rat_id: str, kind: model.ScaffoldKind, body: str
    ) -> Scaffold:
        """Creator-side scaffold authoring (students go through suggestions)."""
        if not check_access(role, Role.RAT_CREATOR):
            raise Forbidden("adding scaffolds requires the RAT-creator role")
        self._require_rat(rat_id)
        if not body.strip():
            raise EmptyBody("scaffold body must not be empty")
        scaffold = Scaffold(
            id=new_id(), rat_id=rat_id, kind=kind, body=body,
            suggested_by=actor, created_at=self.stores.clock(),
        )
        self.stores.put_scaffold(scaffold)
        return scaffold

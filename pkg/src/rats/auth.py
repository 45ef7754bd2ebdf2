"""Accounts, sessions, and the pseudonym boundary.

Real identity (email, password hash, demographics) stays in the user store;
everything else in the system references the account only through its random
pseudonym.  Login hands out an opaque bearer token with 256 bits of entropy;
changing the password revokes all outstanding tokens.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass
from typing import Optional

from .config import Config
from .errors import (
    BadCredentials,
    DomainNotAllowed,
    EmailTaken,
    NotFound,
    TermsNotAccepted,
    Unauthenticated,
    Unverified,
    WeakPassword,
)
from .model import Role
from .store import Stores

_SCRYPT = {"n": 2**14, "r": 8, "p": 1}
_SALT_BYTES = 16
TOKEN_BYTES = 32  # 256 bits


def hash_password(password: str) -> bytes:
    salt = secrets.token_bytes(_SALT_BYTES)
    digest = hashlib.scrypt(password.encode(), salt=salt, **_SCRYPT)
    return salt + digest


def check_password(password: str, stored: bytes) -> bool:
    salt, digest = stored[:_SALT_BYTES], stored[_SALT_BYTES:]
    candidate = hashlib.scrypt(password.encode(), salt=salt, **_SCRYPT)
    return hmac.compare_digest(candidate, digest)


@dataclass(frozen=True)
class AuthContext:
    pseudonym: str
    role: Role
    email: str


class AuthService:
    def __init__(self, stores: Stores, config: Config):
        self.stores = stores
        self.config = config

    def signup(
        self,
        email: str,
        password: str,
        role: Role = Role.STUDENT,
        accept_terms: bool = False,
        age: Optional[int] = None,
        gender: Optional[str] = None,
    ) -> str:
        """Create an unverified account and queue the verification email.
        Returns the new pseudonym."""
        email = email.strip().lower()
        domain = email.rsplit("@", 1)[-1]
        if "@" not in email or domain not in self.config.allowed_email_domains:
            raise DomainNotAllowed(f"{domain!r} is not an allowed institution domain")
        if len(password) < self.config.min_password_length:
            raise WeakPassword(f"password must have at least {self.config.min_password_length} characters")
        if not accept_terms:
            raise TermsNotAccepted("the terms of use must be accepted")
        if self.stores.account_by_email(email) is not None:
            raise EmailTaken("an account with this email already exists")
        verify_token = secrets.token_urlsafe(16)
        pseudonym = self.stores.create_account(
            email=email,
            password_hash=hash_password(password),
            role=role,
            terms_accepted=True,
            verify_token=verify_token,
            age=age,
            gender=gender,
        )
        self.stores.add_notification(
            to=email,
            subject="Verify your account",
            body=f"Use this token to verify your account: {verify_token}",
        )
        return pseudonym

    def verify_email(self, token: str) -> str:
        account = self.stores.account_by_verify_token(token)
        if account is None:
            raise NotFound("unknown verification token")
        self.stores.update_account(account["pseudonym"], email_verified=True, verify_token=None)
        return account["pseudonym"]

    def login(self, email: str, password: str) -> tuple[str, AuthContext]:
        account = self.stores.account_by_email(email.strip().lower())
        if account is None or not check_password(password, account["password_hash"]):
            raise BadCredentials("wrong email or password")
        if not account["email_verified"]:
            raise Unverified("verify your email address first")
        token = secrets.token_urlsafe(TOKEN_BYTES)
        self.stores.save_token(token, account["pseudonym"])
        return token, self._context(account)

    def change_password(self, pseudonym: str, old_password: str, new_password: str) -> str:
        account = self.stores.account(pseudonym)
        if account is None or not check_password(old_password, account["password_hash"]):
            raise BadCredentials("wrong password")
        if len(new_password) < self.config.min_password_length:
            raise WeakPassword(f"password must have at least {self.config.min_password_length} characters")
        self.stores.update_account(pseudonym, password_hash=hash_password(new_password))
        self.stores.revoke_tokens(pseudonym)  # every old session dies with the password
        token = secrets.token_urlsafe(TOKEN_BYTES)
        self.stores.save_token(token, pseudonym)
        return token

    def resolve(self, token: Optional[str]) -> AuthContext:
        if not token:
            raise Unauthenticated("missing bearer token")
        pseudonym = self.stores.pseudonym_for_token(token)
        if pseudonym is None:
            raise Unauthenticated("unknown or revoked token")
        account = self.stores.account(pseudonym)
        if account is None:
            raise Unauthenticated("account no longer exists")
        if not account["terms_accepted"]:
            raise TermsNotAccepted("the terms of use must be accepted")
        return self._context(account)

    @staticmethod
    def _context(account: dict) -> AuthContext:
        return AuthContext(
            pseudonym=account["pseudonym"], role=account["role"], email=account["email"]
        )

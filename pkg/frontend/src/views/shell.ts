// Page frame and login screen.

import { escapeHtml } from "../markdown.js";

export interface Identity {
  email: string;
  role: string;
  pseudonym: string;
}

export function pageShell(identity: Identity | null, content: string, flash: string): string {
  const nav = identity
    ? `<nav>
        <a href="#/student">answer RATs</a>
        ${identity.role !== "student" ? '<a href="#/authoring">authoring</a> <a href="#/review">review</a>' : ""}
        ${identity.role === "lecturer" || identity.role === "administrator" ? '<a href="#/dashboard">dashboard</a>' : ""}
        <span class="who">${escapeHtml(identity.email)} (${escapeHtml(identity.role)})</span>
        <button data-action="logout">log out</button>
      </nav>`
    : "";
  return `<header><h1>RATs</h1>${nav}</header>
  <div id="flash" class="${flash ? "visible" : ""}">${escapeHtml(flash)}</div>
  <main>${content}</main>`;
}

export function loginScreen(): string {
  return `<h2>Sign in</h2>
  <form data-form="login">
    <label>email <input name="email" type="email" required></label>
    <label>password <input name="password" type="password" required></label>
    <button class="primary">log in</button>
  </form>
  <h3>New account</h3>
  <form data-form="signup">
    <label>institutional email <input name="email" type="email" required></label>
    <label>password (10+ characters) <input name="password" type="password" required minlength="10"></label>
    <label>role
      <select name="role">
        <option value="student">student</option>
        <option value="rat_creator">RAT creator</option>
        <option value="lecturer">lecturer</option>
      </select>
    </label>
    <label><input type="checkbox" name="accept_terms" required> I accept the terms of use</label>
    <button>sign up</button>
  </form>
  <form data-form="verify">
    <label>verification token <input name="token" required></label>
    <button>verify email</button>
  </form>`;
}

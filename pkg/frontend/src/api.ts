// Thin typed client over the JSON API. Every method maps 1:1 onto a server
// endpoint; no response value is ever derived or recomputed here.

import type {
  AnswerValue,
  CatalogEntry,
  CompetenceView,
  DashboardView,
  GradedResult,
  LectureView,
  RatView,
  ScaffoldView,
  SessionView,
  SheetView,
  StatsMessage,
  StudentStats,
  Violation,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
    readonly violations: Violation[] = [],
  ) {
    super(`${code}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  token: string | null = null;

  constructor(
    readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const data = text ? JSON.parse(text) : null;
    if (!response.ok) {
      throw new ApiError(
        response.status,
        data?.error ?? "HttpError",
        data?.detail ?? response.statusText,
        data?.violations ?? [],
      );
    }
    return data as T;
  }

  // auth
  signup(email: string, password: string, role: string, acceptTerms: boolean) {
    return this.call<{ status: string }>("POST", "/auth/signup", {
      email,
      password,
      role,
      accept_terms: acceptTerms,
    });
  }

  async login(email: string, password: string) {
    const out = await this.call<{ token: string; role: string; pseudonym: string }>(
      "POST",
      "/auth/login",
      { email, password },
    );
    this.token = out.token;
    return out;
  }

  verify(token: string) {
    return this.call<{ verified: boolean }>("POST", "/auth/verify", { token });
  }

  // profile
  me() {
    return this.call<{ pseudonym: string; email: string; role: string; lectures: string[] }>(
      "GET",
      "/me",
    );
  }

  myStats(lecture?: string) {
    const query = lecture ? `?lecture=${encodeURIComponent(lecture)}` : "";
    return this.call<StudentStats>("GET", `/me/stats${query}`);
  }

  myCompetence(lecture?: string) {
    const query = lecture ? `?lecture=${encodeURIComponent(lecture)}` : "";
    return this.call<CompetenceView>("GET", `/me/competence${query}`);
  }

  // lectures
  lectures() {
    return this.call<LectureView[]>("GET", "/lectures");
  }

  joinLecture(lectureId: string, code: string) {
    return this.call<{ joined: boolean }>("POST", `/lectures/${lectureId}/join`, { code });
  }

  lectureRats(lectureId: string, topic?: string) {
    const query = topic ? `?topic=${encodeURIComponent(topic)}` : "";
    return this.call<RatView[]>("GET", `/lectures/${lectureId}/rats${query}`);
  }

  sheets(lectureId: string) {
    return this.call<SheetView[]>("GET", `/lectures/${lectureId}/sheets`);
  }

  answerLectureRat(lectureId: string, rat: string, response: AnswerValue) {
    return this.call<GradedResult>("POST", `/lectures/${lectureId}/answers`, { rat, response });
  }

  dashboard(lectureId: string) {
    return this.call<DashboardView>("GET", `/lectures/${lectureId}/dashboard`);
  }

  createManualSheet(lectureId: string, name: string, ratIds: string[], availableFrom: string) {
    return this.call<SheetView>("POST", `/lectures/${lectureId}/sheets`, {
      name,
      rat_ids: ratIds,
      available_from: availableFrom,
    });
  }

  createAutoSheet(lectureId: string, date: string, name?: string, exclude: string[] = []) {
    return this.call<{ pool: RatView[]; sheet: SheetView | null }>(
      "POST",
      `/lectures/${lectureId}/sheets/auto`,
      { date, name, exclude },
    );
  }

  // sheet sessions
  beginSession(sheetId: string) {
    return this.call<SessionView>("POST", `/sheets/${sheetId}/sessions`);
  }

  session(sessionId: string) {
    return this.call<SessionView>("GET", `/sessions/${sessionId}`);
  }

  submitAnswer(sessionId: string, rat: string, response: AnswerValue) {
    return this.call<GradedResult>("POST", `/sessions/${sessionId}/answers`, { rat, response });
  }

  // RATs and review
  rat(ratId: string) {
    return this.call<RatView>("GET", `/rats/${ratId}`);
  }

  searchRats(filters: { author?: string; lecture?: string; topic?: string; concept?: string }) {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(filters)) {
      if (value) params.set(key, value);
    }
    const query = params.toString();
    return this.call<RatView[]>("GET", `/rats${query ? "?" + query : ""}`);
  }

  createRat(payload: unknown) {
    return this.call<RatView>("POST", "/rats", payload);
  }

  editRat(ratId: string, payload: unknown) {
    return this.call<RatView>("PUT", `/rats/${ratId}`, payload);
  }

  approveRat(ratId: string) {
    return this.call<{ id: string; state: string; approvals: number }>(
      "POST",
      `/rats/${ratId}/approvals`,
    );
  }

  commentOnRat(ratId: string, body: string) {
    return this.call<{ id: string }>("POST", `/rats/${ratId}/comments`, { body });
  }

  ratComments(ratId: string) {
    return this.call<{ id: string; author_id: string; body: string; at: string }[]>(
      "GET",
      `/rats/${ratId}/comments`,
    );
  }

  reportError(ratId: string, body: string) {
    return this.call<{ id: string }>("POST", `/rats/${ratId}/error-reports`, { body });
  }

  // scaffolds
  scaffolds(ratId: string) {
    return this.call<ScaffoldView[]>("GET", `/rats/${ratId}/scaffolds`);
  }

  suggestScaffold(ratId: string, kind: string, body: string) {
    return this.call<ScaffoldView>("POST", `/rats/${ratId}/scaffold-suggestions`, { kind, body });
  }

  approveScaffold(scaffoldId: string) {
    return this.call<ScaffoldView>("POST", `/scaffolds/${scaffoldId}/approvals`);
  }

  rateScaffold(scaffoldId: string, stars: number) {
    return this.call<{ id: string; mean_rating: number }>(
      "POST",
      `/scaffolds/${scaffoldId}/rating`,
      { stars },
    );
  }

  // cross-lecture questionnaire
  crossLectureNext() {
    return this.call<{ rat: RatView | null; remaining: number }>("GET", "/cross-lecture/next");
  }

  answerCrossLecture(rat: string, response: AnswerValue) {
    return this.call<GradedResult>("POST", "/cross-lecture/answers", { rat, response });
  }

  // live sessions
  openLive(sheetId: string) {
    return this.call<{ session: string; sheet: string }>("POST", `/sheets/${sheetId}/live`);
  }

  liveStats(sessionId: string) {
    return this.call<StatsMessage>("GET", `/live/${sessionId}/stats`);
  }

  liveAnswer(sessionId: string, rat: string, response: AnswerValue) {
    return this.call<GradedResult>("POST", `/live/${sessionId}/answers`, { rat, response });
  }

  closeLive(sessionId: string) {
    return this.call<StatsMessage>("POST", `/live/${sessionId}/close`);
  }

  liveChannelUrl(sessionId: string): string {
    const base = this.baseUrl || (typeof location !== "undefined" ? location.origin : "");
    return `${base.replace(/^http/, "ws")}/live/${sessionId}?token=${this.token ?? ""}`;
  }

  // catalog
  catalog() {
    return this.call<{ catalog_version: string; entries: CatalogEntry[] }>("GET", "/catalog");
  }
}

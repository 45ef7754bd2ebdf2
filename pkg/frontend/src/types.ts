// API payload shapes. The client holds no authoritative state beyond the
// bearer token and in-flight form data; every displayed number originates
// from one of these server responses.

export interface FractionJson {
  value: number;
  exact: string;
}

export type LevelsJson = Record<string, FractionJson | null>;

export interface OptionView {
  id: string;
  text: string;
  is_correct?: boolean | null;
  truth_value?: boolean | null;
  feedback?: string;
}

export interface RatView {
  id: string;
  question: string;
  kind: "multiple_choice" | "multi_true_false" | "open_ended";
  options: OptionView[];
  topics: string[];
  concepts: string[];
  lectures: string[];
  criteria: number[];
  is_cross_lecture: boolean;
  state: string;
  answered?: boolean;
  general_feedback?: string;
  accepted_answers?: string[];
  approvals?: string[];
  author?: string;
}

export type AnswerValue = string | Record<string, boolean>;

export interface FeedbackBlock {
  kind: "option" | "general";
  text: string;
  option_id: string | null;
}

export interface GradedResult {
  correct: boolean | null;
  evaluative: "correct" | "incorrect" | "ungraded";
  informative: FeedbackBlock[];
  updated_levels: LevelsJson | null;
}

export interface LectureView {
  id: string;
  name: string;
  audience: string;
  term: string;
  appointment_dates: string[];
  lecturers: string[];
  join_code?: string;
}

export interface SheetView {
  id: string;
  lecture_id: string;
  name: string;
  rat_ids: string[];
  available_from: string;
  origin: "auto" | "manual";
}

export interface SessionView {
  id: string;
  sheet: string;
  cursor: number;
  completed: boolean;
  rat_ids: string[];
  current_rat?: RatView | null;
}

export interface ScaffoldView {
  id: string;
  rat_id: string;
  kind: string;
  body: string;
  mean_rating: number;
  n_ratings: number;
  approvals: number;
  visible: boolean;
  suggested_by: string;
}

export interface StudentStats {
  n_attempts: number;
  n_graded: number;
  n_correct: number;
  percent_correct: FractionJson | null;
  percent_incorrect: FractionJson | null;
  per_week: Record<string, number>;
}

export interface ProgressionPointJson {
  attempt_index: number;
  level: FractionJson | null;
}

export interface CompetenceView {
  lecture: string | null;
  levels: LevelsJson;
  progression: Record<string, ProgressionPointJson[]>;
}

export interface PerRatStats {
  rat: string;
  tally: Record<string, number>;
  correct_fraction: number | null;
  n: number;
}

export interface StatsMessage {
  type: "stats";
  session: string;
  open: boolean;
  per_rat: PerRatStats[];
  sheet: { n_answers: number; correct_fraction: number | null };
}

export interface LiveResultMessage extends GradedResult {
  type: "result";
  rat: string;
}

export interface LiveErrorMessage {
  type: "error";
  error: string;
  detail: string;
}

export type LiveServerMessage = StatsMessage | LiveResultMessage | LiveErrorMessage;

export interface ErrorReportJson {
  always_incorrect: string[];
  often_incorrect: string[];
  deceptive: { rat: string; option: string; share: FractionJson }[];
  most_frequent_option: Record<string, string>;
  per_rat: Record<
    string,
    {
      n: number;
      n_correct: number;
      correct_fraction: FractionJson;
      option_counts: Record<string, number>;
    }
  >;
}

export interface DashboardView {
  lecture: string;
  n_members: number;
  n_attempts: number;
  error_report: ErrorReportJson;
}

export interface CatalogEntry {
  id: number;
  description: string;
  competencies: string[];
}

export interface Violation {
  code: string;
  fields: string;
  message: string;
}

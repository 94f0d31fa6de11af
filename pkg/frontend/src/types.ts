// Mirrors of the review API payloads. All grading math lives on the server;
// the client only displays what these carry.

export type Verdict = "yes" | "no";

export interface Criterion {
  id: string;
  text: string;
  marks: number;
  awarded_on: Verdict;
}

export interface RubricLevel {
  name: string;
  min_marks: number;
  max_marks: number;
  description: string;
}

export interface Task {
  id: string;
  statement: string;
  category: string;
  rubric: { learning_outcome: string; levels: RubricLevel[] };
  criteria: Criterion[];
  max_marks: number;
}

export interface Progress {
  judged: number;
  of: number;
  total_marks: number;
  max_marks: number;
  complete: boolean;
  level: string | null;
}

export interface JudgmentEntry {
  verdict: Verdict;
  justification: string;
  timestamp: string;
}

export interface ConsensusRecord {
  submission_id: string;
  criterion_id: string;
  resolved_verdict: Verdict;
  resolution_note: string;
  resolved_by: string[];
}

export interface SubmissionDetail {
  submission_id: string;
  task_id: string;
  alias: string;
  body: string;
  needs_human: boolean;
  frozen: boolean;
  judgments: Record<string, Record<string, JudgmentEntry>>;
  progress: Record<string, Progress>;
  consensus: { records: Record<string, ConsensusRecord>; progress: Progress };
}

export interface SubmissionSummary {
  submission_id: string;
  alias: string;
  graders: string[];
  needs_human: boolean;
  consensus_complete: boolean;
}

export interface TaskSummary {
  id: string;
  category: string;
  statement: string;
  criteria_count: number;
  max_marks: number;
  submissions: SubmissionSummary[];
}

export interface SessionSummary {
  session_name: string;
  schema_version: number;
  counts: Record<string, number>;
  tasks: TaskSummary[];
}

export interface GradeRecord {
  submission_id: string;
  grader_id: string;
  phase: string;
  per_criterion: {
    criterion_id: string;
    verdict: Verdict;
    awarded: boolean;
    marks_awarded: number;
  }[];
  total_marks: number;
  level: string;
}

export interface JudgmentResponse {
  judgment: Record<string, string>;
  progress: Progress;
}

export interface ConsensusResponse {
  consensus: ConsensusRecord;
  progress: Progress;
  grade_record: GradeRecord | null;
}

export interface RatioReport {
  matched: number;
  total: number;
  ratio: number;
  pct: number;
}

export interface AgreementReport extends RatioReport {
  grader_a: string;
  grader_b: string;
  scope: string | string[];
}

export interface AccuracyReport extends RatioReport {
  grader: string;
  scope: string | string[];
  by_category: Record<string, RatioReport>;
}

export interface TaxonomyReport {
  total_tags: number;
  categories: Record<string, { count: number; pct: number }>;
}

export interface MarksTableReport {
  task_id: string;
  columns: string[];
  rows: Record<string, number[]>;
  text: string;
}

export const DISCREPANCY_CATEGORIES = [
  "interpretation_difference",
  "simple_oversight",
  "unanticipated_approach",
  "simplification_misjudgment",
  "human_error",
  "other",
] as const;

export type DiscrepancyCategory = (typeof DISCREPANCY_CATEGORIES)[number];

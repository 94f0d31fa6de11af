// Grading-screen state for one submission: toggle a verdict per criterion,
// commit it with exactly one POST, and display only server-computed totals.
//
// Blind mode (the default) hides the AI judge's column for a criterion until
// the human has committed their own verdict on it, keeping initial judgments
// independent. Conflicts (duplicate or frozen cells) are surfaced on the row
// and never retried silently.

import { ApiClient, ApiError } from "./api.js";
import type { Progress, SubmissionDetail, Task, Verdict } from "./types.js";

export interface RowView {
  criterionId: string;
  text: string;
  marks: number;
  pending: Verdict | null;
  committed: Verdict | null;
  note: string;
  aiVisible: boolean;
  aiVerdict: Verdict | null;
  aiJustification: string;
  conflict: string | null;
}

export class GradingFlow {
  private pending = new Map<string, Verdict>();
  private notes = new Map<string, string>();
  private committed = new Map<string, Verdict>();
  private revealed = new Set<string>();
  private conflicts = new Map<string, string>();
  /** Last server-reported progress; the only source of displayed totals. */
  progress: Progress | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly graderId: string,
    readonly task: Task,
    readonly detail: SubmissionDetail,
    readonly aiGraderId: string | null,
    readonly blind = true,
  ) {
    const mine = detail.judgments[graderId] ?? {};
    for (const [criterionId, entry] of Object.entries(mine)) {
      this.committed.set(criterionId, entry.verdict);
      this.revealed.add(criterionId);
    }
    this.progress = detail.progress[graderId] ?? null;
  }

  toggle(criterionId: string, verdict: Verdict): void {
    if (this.committed.has(criterionId)) {
      return; // committed verdicts are immutable; moderation owns changes
    }
    this.pending.set(criterionId, verdict);
  }

  setNote(criterionId: string, note: string): void {
    this.notes.set(criterionId, note);
  }

  /** Commit one criterion: exactly one POST; the reply's total is displayed. */
  async commit(criterionId: string): Promise<void> {
    const verdict = this.pending.get(criterionId) ?? this.committed.get(criterionId);
    if (verdict === undefined) {
      throw new Error(`nothing to commit for ${criterionId}: toggle a verdict first`);
    }
    try {
      const response = await this.api.postJudgment({
        grader_id: this.graderId,
        submission_id: this.detail.submission_id,
        criterion_id: criterionId,
        verdict,
        note: this.notes.get(criterionId) ?? "",
      });
      this.committed.set(criterionId, verdict);
      this.pending.delete(criterionId);
      this.conflicts.delete(criterionId);
      this.revealed.add(criterionId);
      this.progress = response.progress;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.conflicts.set(criterionId, `${error.code}: ${error.message}`);
        this.revealed.add(criterionId); // the cell is settled server-side
        return;
      }
      throw error;
    }
  }

  aiVisibleFor(criterionId: string): boolean {
    if (!this.blind) {
      return true;
    }
    return this.revealed.has(criterionId);
  }

  rows(): RowView[] {
    const ai = this.aiGraderId ? (this.detail.judgments[this.aiGraderId] ?? {}) : {};
    return this.task.criteria.map((criterion) => {
      const entry = ai[criterion.id];
      const visible = this.aiVisibleFor(criterion.id);
      return {
        criterionId: criterion.id,
        text: criterion.text,
        marks: criterion.marks,
        pending: this.pending.get(criterion.id) ?? null,
        committed: this.committed.get(criterion.id) ?? null,
        note: this.notes.get(criterion.id) ?? "",
        aiVisible: visible,
        aiVerdict: visible && entry ? entry.verdict : null,
        aiJustification: visible && entry ? entry.justification : "",
        conflict: this.conflicts.get(criterion.id) ?? null,
      };
    });
  }

  /** Server-reported total for display; never computed client-side. */
  displayedTotal(): string {
    if (!this.progress) {
      return "—";
    }
    const level = this.progress.level ? ` — ${this.progress.level}` : "";
    return `${this.progress.total_marks}/${this.progress.max_marks}${level}`;
  }

  committedCount(): number {
    return this.committed.size;
  }

  complete(): boolean {
    return this.progress?.complete ?? false;
  }
}

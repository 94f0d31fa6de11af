// Moderation-screen state: surface cells where graders disagree, record the
// resolved verdict (re-resolving is allowed and audited server-side), attach
// discrepancy tags, and track consensus completion from server responses.

import { ApiClient } from "./api.js";
import type {
  ConsensusRecord,
  DiscrepancyCategory,
  GradeRecord,
  Progress,
  SubmissionDetail,
  Task,
  Verdict,
} from "./types.js";

export interface ModerationRow {
  criterionId: string;
  text: string;
  verdicts: Record<string, Verdict>;
  justifications: Record<string, string>;
  disagreement: boolean;
  resolved: ConsensusRecord | null;
}

export class ModerationFlow {
  private records: Map<string, ConsensusRecord>;
  /** Server-reported consensus progress; the only source of totals. */
  progress: Progress;
  gradeRecord: GradeRecord | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly task: Task,
    readonly detail: SubmissionDetail,
  ) {
    this.records = new Map(Object.entries(detail.consensus.records));
    this.progress = detail.consensus.progress;
  }

  graders(): string[] {
    return Object.keys(this.detail.judgments).sort();
  }

  rows(): ModerationRow[] {
    return this.task.criteria.map((criterion) => {
      const verdicts: Record<string, Verdict> = {};
      const justifications: Record<string, string> = {};
      for (const [grader, cells] of Object.entries(this.detail.judgments)) {
        const entry = cells[criterion.id];
        if (entry) {
          verdicts[grader] = entry.verdict;
          justifications[grader] = entry.justification;
        }
      }
      const distinct = new Set(Object.values(verdicts));
      return {
        criterionId: criterion.id,
        text: criterion.text,
        verdicts,
        justifications,
        disagreement: distinct.size > 1,
        resolved: this.records.get(criterion.id) ?? null,
      };
    });
  }

  disagreements(): ModerationRow[] {
    return this.rows().filter((row) => row.disagreement);
  }

  openDisagreements(): ModerationRow[] {
    return this.disagreements().filter((row) => row.resolved === null);
  }

  async resolve(
    criterionId: string,
    verdict: Verdict,
    note: string,
    resolvers: string[],
  ): Promise<void> {
    const response = await this.api.postConsensus({
      submission_id: this.detail.submission_id,
      criterion_id: criterionId,
      resolved_verdict: verdict,
      note,
      resolved_by: resolvers,
    });
    this.records.set(criterionId, response.consensus);
    this.progress = response.progress;
    this.gradeRecord = response.grade_record;
    if (this.openDisagreements().length === 0) {
      await this.adoptAgreedCells();
    }
  }

  /** Once every disagreement is settled, unanimous cells become consensus too.

  Moderation meetings argue about disagreements; cells where every grader
  already agrees are adopted verbatim (one audited POST each) so the
  submission can reach a complete, server-computed grade record. */
  private async adoptAgreedCells(): Promise<void> {
    for (const row of this.rows()) {
      if (row.resolved || row.disagreement) {
        continue;
      }
      const graders = Object.keys(row.verdicts);
      if (graders.length === 0) {
        continue; // nobody judged this cell; it stays open
      }
      const verdict = row.verdicts[graders[0]];
      const response = await this.api.postConsensus({
        submission_id: this.detail.submission_id,
        criterion_id: row.criterionId,
        resolved_verdict: verdict,
        note: "",
        resolved_by: graders,
      });
      this.records.set(row.criterionId, response.consensus);
      this.progress = response.progress;
      this.gradeRecord = response.grade_record;
    }
  }

  async tag(
    criterionId: string,
    graderId: string,
    category: DiscrepancyCategory,
    note: string,
  ): Promise<void> {
    await this.api.postTag({
      submission_id: this.detail.submission_id,
      criterion_id: criterionId,
      grader_id: graderId,
      category,
      note,
    });
  }

  consensusComplete(): boolean {
    return this.progress.complete;
  }

  displayedTotal(): string {
    const level = this.progress.level ? ` — ${this.progress.level}` : "";
    return `${this.progress.total_marks}/${this.progress.max_marks}${level}`;
  }
}

// In-memory stand-in for the review service, used to stub fetch in tests.
// It reimplements the server's rules the UI depends on: polarity-aware
// totals, duplicate/frozen conflicts, consensus re-resolution, and
// mismatch-only tagging. A "lie" switch lets tests prove the client
// displays server totals verbatim instead of computing its own.

import type { FetchLike, FetchResponse } from "../src/api.js";
import type {
  ConsensusRecord,
  GradeRecord,
  Progress,
  Task,
  Verdict,
} from "../src/types.js";

export const SUBMISSION_ID = "linearity-proof__S1";

export const LINEARITY_TASK: Task = {
  id: "linearity-proof",
  statement:
    "Is the discrete-time systems $y[n+1]+3y[n]=v[n]$ linear in the input-output trajectories (v, y) ? Justify your answer with either a proof or a counterexample.",
  category: "proof",
  rubric: {
    learning_outcome:
      "Apply the principles of additivity and homogeneity to formally prove the linearity of a given system.",
    levels: [
      { name: "Level 1: Beginning", min_marks: 0, max_marks: 2, description: "" },
      { name: "Level 2: Developing", min_marks: 3, max_marks: 4, description: "" },
      { name: "Level 3: Accomplished", min_marks: 5, max_marks: 5, description: "" },
    ],
  },
  criteria: [
    { id: "identify-linear", text: "Is the system correctly identified as a linear system?", marks: 1, awarded_on: "yes" },
    { id: "additivity-proof", text: "Does the solution correctly prove additivity?", marks: 1, awarded_on: "yes" },
    { id: "homogeneity-proof", text: "Does the solution correctly prove homogeneity?", marks: 1, awarded_on: "yes" },
    { id: "trajectory-combination", text: "Does the solution introduce two trajectories of the system, and then prove that their linear combination is also a trajectory of the system?", marks: 1, awarded_on: "yes" },
    { id: "notation-check", text: "Does the solution have any incorrect notation?", marks: 1, awarded_on: "no" },
  ],
  max_marks: 5,
};

const AI_GRADER = "mock-judge";
const AI_VERDICTS: Record<string, Verdict> = {
  "identify-linear": "yes",
  "additivity-proof": "yes",
  "homogeneity-proof": "yes",
  "trajectory-combination": "yes",
  "notation-check": "no",
};

interface Call {
  method: string;
  url: string;
  body: Record<string, unknown> | null;
}

function response(status: number, payload: unknown): FetchResponse {
  return {
    ok: status < 400,
    status,
    json: async () => payload,
  };
}

function errorBody(code: string, message: string) {
  return { error: code, message, details: {} };
}

export class FakeServer {
  judgments = new Map<string, Map<string, { verdict: Verdict; justification: string }>>();
  consensus = new Map<string, ConsensusRecord>();
  tags: Record<string, unknown>[] = [];
  calls: Call[] = [];
  /** When set, every reported total_marks is this value (client must echo it). */
  lieTotal: number | null = null;

  constructor(withAiJudgments = true) {
    if (withAiJudgments) {
      const cells = new Map<string, { verdict: Verdict; justification: string }>();
      for (const [criterionId, verdict] of Object.entries(AI_VERDICTS)) {
        cells.set(criterionId, { verdict, justification: `judge note on ${criterionId}` });
      }
      this.judgments.set(AI_GRADER, cells);
    }
  }

  postCalls(path: string): Call[] {
    return this.calls.filter((c) => c.method === "POST" && c.url === path);
  }

  private progressFor(verdicts: Map<string, Verdict>): Progress {
    let total = 0;
    for (const criterion of LINEARITY_TASK.criteria) {
      const verdict = verdicts.get(criterion.id);
      if (verdict !== undefined && verdict === criterion.awarded_on) {
        total += criterion.marks;
      }
    }
    if (this.lieTotal !== null) {
      total = this.lieTotal;
    }
    const judged = verdicts.size;
    const complete = judged === LINEARITY_TASK.criteria.length;
    let level: string | null = null;
    if (complete) {
      for (const band of LINEARITY_TASK.rubric.levels) {
        if (total >= band.min_marks && total <= band.max_marks) {
          level = band.name;
        }
      }
    }
    return {
      judged,
      of: LINEARITY_TASK.criteria.length,
      total_marks: total,
      max_marks: LINEARITY_TASK.max_marks,
      complete,
      level,
    };
  }

  private graderVerdicts(grader: string): Map<string, Verdict> {
    const cells = this.judgments.get(grader) ?? new Map();
    return new Map(Array.from(cells, ([cid, entry]) => [cid, entry.verdict]));
  }

  private consensusVerdicts(): Map<string, Verdict> {
    return new Map(
      Array.from(this.consensus, ([cid, record]) => [cid, record.resolved_verdict]),
    );
  }

  private consensusGradeRecord(): GradeRecord | null {
    const verdicts = this.consensusVerdicts();
    const progress = this.progressFor(verdicts);
    if (!progress.complete) {
      return null;
    }
    return {
      submission_id: SUBMISSION_ID,
      grader_id: "consensus",
      phase: "consensus",
      per_criterion: LINEARITY_TASK.criteria.map((criterion) => {
        const verdict = verdicts.get(criterion.id) as Verdict;
        const awarded = verdict === criterion.awarded_on;
        return {
          criterion_id: criterion.id,
          verdict,
          awarded,
          marks_awarded: awarded ? criterion.marks : 0,
        };
      }),
      total_marks: progress.total_marks,
      level: progress.level ?? "",
    };
  }

  private submissionDetail() {
    const judgments: Record<string, Record<string, unknown>> = {};
    const progress: Record<string, Progress> = {};
    for (const [grader, cells] of this.judgments) {
      judgments[grader] = Object.fromEntries(
        Array.from(cells, ([cid, entry]) => [
          cid,
          { verdict: entry.verdict, justification: entry.justification, timestamp: "t0" },
        ]),
      );
      progress[grader] = this.progressFor(this.graderVerdicts(grader));
    }
    return {
      submission_id: SUBMISSION_ID,
      task_id: LINEARITY_TASK.id,
      alias: "S1",
      body: "We show that the system is linear ...",
      needs_human: false,
      frozen: this.consensus.size > 0,
      judgments,
      progress,
      consensus: {
        records: Object.fromEntries(this.consensus),
        progress: this.progressFor(this.consensusVerdicts()),
      },
    };
  }

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? (JSON.parse(init.body) as Record<string, unknown>) : null;
    this.calls.push({ method, url, body });

    if (method === "GET" && url === "/api/session") {
      return response(200, {
        session_name: "workshop-1",
        schema_version: 1,
        counts: { tasks: 1, submissions: 1 },
        tasks: [
          {
            id: LINEARITY_TASK.id,
            category: "proof",
            statement: LINEARITY_TASK.statement,
            criteria_count: 5,
            max_marks: 5,
            submissions: [
              {
                submission_id: SUBMISSION_ID,
                alias: "S1",
                graders: Array.from(this.judgments.keys()).sort(),
                needs_human: false,
                consensus_complete: this.progressFor(this.consensusVerdicts()).complete,
              },
            ],
          },
        ],
      });
    }
    if (method === "GET" && url === `/api/tasks/${LINEARITY_TASK.id}`) {
      return response(200, LINEARITY_TASK);
    }
    if (method === "GET" && url === `/api/submissions/${SUBMISSION_ID}`) {
      return response(200, this.submissionDetail());
    }

    if (method === "POST" && url === "/api/judgments" && body) {
      const grader = body.grader_id as string;
      const criterionId = body.criterion_id as string;
      if (body.submission_id !== SUBMISSION_ID) {
        return response(404, errorBody("UNKNOWN_TASK", "unknown submission"));
      }
      if (!LINEARITY_TASK.criteria.some((c) => c.id === criterionId)) {
        return response(404, errorBody("UNKNOWN_CRITERION", "unknown criterion"));
      }
      if (this.consensus.size > 0) {
        return response(409, errorBody("FROZEN_CELL", "consensus has opened"));
      }
      const cells = this.judgments.get(grader) ?? new Map();
      if (cells.has(criterionId)) {
        return response(409, errorBody("DUPLICATE_JUDGMENT", "cell already judged"));
      }
      cells.set(criterionId, {
        verdict: body.verdict as Verdict,
        justification: (body.note as string) ?? "",
      });
      this.judgments.set(grader, cells);
      return response(201, {
        judgment: { ...body, timestamp: "t1" },
        progress: this.progressFor(this.graderVerdicts(grader)),
      });
    }

    if (method === "POST" && url === "/api/consensus" && body) {
      const criterionId = body.criterion_id as string;
      const resolvers = body.resolved_by as string[];
      for (const resolver of resolvers) {
        if (!this.judgments.get(resolver)?.has(criterionId)) {
          return response(
            409,
            errorBody("MISSING_INITIAL", `${resolver} has no initial judgment`),
          );
        }
      }
      const record: ConsensusRecord = {
        submission_id: SUBMISSION_ID,
        criterion_id: criterionId,
        resolved_verdict: body.resolved_verdict as Verdict,
        resolution_note: (body.note as string) ?? "",
        resolved_by: resolvers,
      };
      this.consensus.set(criterionId, record);
      return response(201, {
        consensus: record,
        progress: this.progressFor(this.consensusVerdicts()),
        grade_record: this.consensusGradeRecord(),
      });
    }

    if (method === "POST" && url === "/api/discrepancy-tags" && body) {
      const grader = body.grader_id as string;
      const criterionId = body.criterion_id as string;
      const record = this.consensus.get(criterionId);
      const verdict = this.judgments.get(grader)?.get(criterionId)?.verdict;
      if (verdict === undefined) {
        return response(409, errorBody("MISSING_INITIAL", "no initial judgment"));
      }
      if (record && record.resolved_verdict === verdict) {
        return response(409, errorBody("NOT_A_MISMATCH", "grader matches consensus"));
      }
      this.tags.push(body);
      return response(201, { tag: body });
    }

    if (method === "GET" && url.startsWith("/api/reports/agreement")) {
      const params = new URLSearchParams(url.split("?")[1]);
      const a = this.graderVerdicts(params.get("a") ?? "");
      const b = this.graderVerdicts(params.get("b") ?? "");
      let matched = 0;
      let total = 0;
      for (const [cid, verdict] of a) {
        if (b.has(cid)) {
          total += 1;
          if (b.get(cid) === verdict) {
            matched += 1;
          }
        }
      }
      if (total === 0) {
        return response(400, errorBody("NO_OVERLAP", "no shared cells"));
      }
      return response(200, {
        grader_a: params.get("a"),
        grader_b: params.get("b"),
        scope: "all",
        matched,
        total,
        ratio: matched / total,
        pct: Math.round((matched / total) * 1000) / 10,
      });
    }

    return response(404, errorBody("ERROR", `no route for ${method} ${url}`));
  };
}

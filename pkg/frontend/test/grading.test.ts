import assert from "node:assert/strict";
import { test } from "node:test";

import { ApiClient } from "../src/api.js";
import { GradingFlow } from "../src/grading.js";
import { FakeServer, LINEARITY_TASK, SUBMISSION_ID } from "./fake_server.js";

async function freshFlow(server: FakeServer, grader = "R1", blind = true) {
  const api = new ApiClient(server.fetch);
  const detail = await api.submission(SUBMISSION_ID);
  const task = await api.task(LINEARITY_TASK.id);
  return new GradingFlow(api, grader, task, detail, "mock-judge", blind);
}

test("blind mode hides the AI column until the row is committed", async () => {
  const server = new FakeServer();
  const flow = await freshFlow(server);

  for (const row of flow.rows()) {
    assert.equal(row.aiVisible, false);
    assert.equal(row.aiVerdict, null);
    assert.equal(row.aiJustification, "");
  }

  flow.toggle("identify-linear", "yes");
  assert.equal(flow.rows()[0].aiVisible, false); // toggling alone reveals nothing

  await flow.commit("identify-linear");
  const revealed = flow.rows()[0];
  assert.equal(revealed.aiVisible, true);
  assert.equal(revealed.aiVerdict, "yes");
  assert.match(revealed.aiJustification, /judge note/);
  // other rows stay hidden
  assert.equal(flow.rows()[1].aiVisible, false);
});

test("non-blind mode shows the AI column immediately", async () => {
  const server = new FakeServer();
  const flow = await freshFlow(server, "R1", false);
  assert.equal(flow.rows()[0].aiVisible, true);
  assert.equal(flow.rows()[4].aiVerdict, "no");
});

test("committing performs exactly one POST and no local toggling posts", async () => {
  const server = new FakeServer();
  const flow = await freshFlow(server);

  flow.toggle("identify-linear", "no");
  flow.toggle("identify-linear", "yes"); // change of heart before commit
  assert.equal(server.postCalls("/api/judgments").length, 0);

  await flow.commit("identify-linear");
  assert.equal(server.postCalls("/api/judgments").length, 1);
  assert.equal(server.postCalls("/api/judgments")[0].body?.verdict, "yes");
});

test("displayed totals come from the server, never local arithmetic", async () => {
  const server = new FakeServer();
  server.lieTotal = 99; // a client doing its own math would show 1
  const flow = await freshFlow(server);
  flow.toggle("identify-linear", "yes");
  await flow.commit("identify-linear");
  assert.equal(flow.progress?.total_marks, 99);
  assert.equal(flow.displayedTotal(), "99/5");
});

test("polarity-aware server totals display verbatim", async () => {
  const server = new FakeServer();
  const flow = await freshFlow(server);
  const plan: [string, "yes" | "no"][] = [
    ["identify-linear", "yes"],
    ["additivity-proof", "yes"],
    ["homogeneity-proof", "yes"],
    ["trajectory-combination", "yes"],
    ["notation-check", "yes"], // "yes" on the negative check earns nothing
  ];
  for (const [criterionId, verdict] of plan) {
    flow.toggle(criterionId, verdict);
    await flow.commit(criterionId);
  }
  assert.equal(flow.progress?.total_marks, 4);
  assert.equal(flow.progress?.complete, true);
  assert.equal(flow.displayedTotal(), "4/5 — Level 2: Developing");
});

test("replaying a commit surfaces the server conflict without retrying", async () => {
  const server = new FakeServer();
  const first = await freshFlow(server);
  first.toggle("identify-linear", "yes");
  await first.commit("identify-linear");

  // a reloaded session sees the committed verdict from the server snapshot
  const replay = await freshFlow(server);
  const committedRow = replay.rows().find((r) => r.criterionId === "identify-linear");
  assert.ok(committedRow);
  assert.equal(committedRow.committed, "yes");

  // a stale client that missed the first commit replays the same POST
  const api = new ApiClient(server.fetch);
  const stale = new GradingFlow(
    api,
    "R1",
    LINEARITY_TASK,
    { ...(await api.submission(SUBMISSION_ID)), judgments: {}, progress: {} },
    "mock-judge",
  );
  stale.toggle("identify-linear", "yes");
  const before = server.postCalls("/api/judgments").length;
  await stale.commit("identify-linear");
  assert.equal(server.postCalls("/api/judgments").length, before + 1); // one POST, no retry
  const staleRow = stale.rows().find((r) => r.criterionId === "identify-linear");
  assert.ok(staleRow);
  assert.match(staleRow.conflict ?? "", /DUPLICATE_JUDGMENT/);
});

test("frozen submissions reject new judgments with a visible conflict", async () => {
  const server = new FakeServer();
  // open consensus on one cell: the submission is frozen for new initials
  const api = new ApiClient(server.fetch);
  await api.postConsensus({
    submission_id: SUBMISSION_ID,
    criterion_id: "identify-linear",
    resolved_verdict: "yes",
    resolved_by: ["mock-judge"],
  });

  const flow = await freshFlow(server, "R2");
  flow.toggle("additivity-proof", "yes");
  await flow.commit("additivity-proof");
  const row = flow.rows().find((r) => r.criterionId === "additivity-proof");
  assert.ok(row);
  assert.match(row.conflict ?? "", /FROZEN_CELL/);
  assert.equal(row.committed, null);
});

test("committed rows ignore further toggles", async () => {
  const server = new FakeServer();
  const flow = await freshFlow(server);
  flow.toggle("identify-linear", "yes");
  await flow.commit("identify-linear");
  flow.toggle("identify-linear", "no");
  const row = flow.rows()[0];
  assert.equal(row.committed, "yes");
  assert.equal(row.pending, null);
});

test("reloaded sessions restore committed verdicts and reveal their AI cells", async () => {
  const server = new FakeServer();
  const flow = await freshFlow(server);
  flow.toggle("notation-check", "no");
  await flow.commit("notation-check");

  const reloaded = await freshFlow(server);
  const row = reloaded.rows().find((r) => r.criterionId === "notation-check");
  assert.ok(row);
  assert.equal(row.committed, "no");
  assert.equal(row.aiVisible, true);
  assert.equal(reloaded.progress?.total_marks, 1); // server computed: "no" earns the mark
});

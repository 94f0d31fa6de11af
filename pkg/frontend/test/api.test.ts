import assert from "node:assert/strict";
import { test } from "node:test";

import { ApiClient, ApiError } from "../src/api.js";
import { FakeServer, SUBMISSION_ID } from "./fake_server.js";

test("judgment POST carries the full payload to the right route", async () => {
  const server = new FakeServer();
  const api = new ApiClient(server.fetch);
  await api.postJudgment({
    grader_id: "R1",
    submission_id: SUBMISSION_ID,
    criterion_id: "identify-linear",
    verdict: "yes",
    note: "clearly shown",
  });
  const calls = server.postCalls("/api/judgments");
  assert.equal(calls.length, 1);
  assert.deepEqual(calls[0].body, {
    grader_id: "R1",
    submission_id: SUBMISSION_ID,
    criterion_id: "identify-linear",
    verdict: "yes",
    note: "clearly shown",
  });
});

test("note defaults to empty string when omitted", async () => {
  const server = new FakeServer();
  const api = new ApiClient(server.fetch);
  await api.postJudgment({
    grader_id: "R1",
    submission_id: SUBMISSION_ID,
    criterion_id: "identify-linear",
    verdict: "no",
  });
  assert.equal(server.postCalls("/api/judgments")[0].body?.note, "");
});

test("errors surface as ApiError with status and code", async () => {
  const server = new FakeServer();
  const api = new ApiClient(server.fetch);
  await assert.rejects(
    api.postJudgment({
      grader_id: "R1",
      submission_id: "ghost",
      criterion_id: "identify-linear",
      verdict: "yes",
    }),
    (error: unknown) => {
      assert.ok(error instanceof ApiError);
      assert.equal(error.status, 404);
      assert.equal(error.code, "UNKNOWN_TASK");
      return true;
    },
  );
});

test("report URLs encode query parameters", async () => {
  const server = new FakeServer();
  const api = new ApiClient(server.fetch);
  const report = await api.agreement("mock-judge", "mock-judge");
  assert.equal(report.total, 5);
  assert.equal(report.pct, 100);
  const call = server.calls.find((c) => c.url.startsWith("/api/reports/agreement"));
  assert.ok(call);
  assert.ok(call.url.includes("a=mock-judge"));
});

test("session and task reads decode typed payloads", async () => {
  const server = new FakeServer();
  const api = new ApiClient(server.fetch);
  const session = await api.session();
  assert.equal(session.tasks[0].submissions[0].alias, "S1");
  const task = await api.task("linearity-proof");
  assert.equal(task.criteria.length, 5);
  assert.equal(task.criteria[4].awarded_on, "no");
});

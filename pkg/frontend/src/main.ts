// App shell: settings bar, hash routing between the grading screen, the
// moderation screen and the dashboard. All state mutations run through the
// flow classes; this module only renders and wires events.

import { ApiClient } from "./api.js";
import { GradingFlow } from "./grading.js";
import { ModerationFlow } from "./moderation.js";
import {
  DISCREPANCY_CATEGORIES,
  type DiscrepancyCategory,
  type SessionSummary,
  type Verdict,
} from "./types.js";
import { escapeHtml, latexBlock, statusBadge, verdictBadge } from "./views.js";

const api = new ApiClient((url, init) => fetch(url, init));

interface Settings {
  graderId: string;
  blind: boolean;
}

function loadSettings(): Settings {
  return {
    graderId: localStorage.getItem("rubricate.grader") ?? "",
    blind: (localStorage.getItem("rubricate.blind") ?? "on") === "on",
  };
}

function saveSettings(settings: Settings): void {
  localStorage.setItem("rubricate.grader", settings.graderId);
  localStorage.setItem("rubricate.blind", settings.blind ? "on" : "off");
}

function guessAiGrader(graders: string[]): string | null {
  return graders.find((g) => g.includes("judge")) ?? null;
}

function appRoot(): HTMLElement {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app root element");
  }
  return root;
}

function settingsBar(settings: Settings): string {
  return `
    <header class="topbar">
      <a href="#/" class="brand">rubricate review</a>
      <nav>
        <a href="#/">Tasks</a>
        <a href="#/dashboard">Dashboard</a>
      </nav>
      <div class="settings">
        <label>Grader
          <input id="grader-input" value="${escapeHtml(settings.graderId)}" placeholder="e.g. R1" />
        </label>
        <label class="blind-toggle">
          <input id="blind-input" type="checkbox" ${settings.blind ? "checked" : ""} />
          Blind mode
        </label>
      </div>
    </header>`;
}

function wireSettings(settings: Settings, rerender: () => void): void {
  const grader = document.getElementById("grader-input") as HTMLInputElement | null;
  grader?.addEventListener("change", () => {
    settings.graderId = grader.value.trim();
    saveSettings(settings);
    rerender();
  });
  const blind = document.getElementById("blind-input") as HTMLInputElement | null;
  blind?.addEventListener("change", () => {
    settings.blind = blind.checked;
    saveSettings(settings);
    rerender();
  });
}

async function renderTaskList(settings: Settings): Promise<void> {
  const summary: SessionSummary = await api.session();
  const sections = summary.tasks
    .map((task) => {
      const rows = task.submissions
        .map((sub) => {
          const badges = [
            sub.needs_human ? statusBadge("needs human", "warn") : "",
            sub.consensus_complete
              ? statusBadge("consensus complete", "ok")
              : statusBadge("open", "off"),
          ].join(" ");
          return `
            <tr>
              <td>${escapeHtml(sub.alias)}</td>
              <td>${sub.graders.map(escapeHtml).join(", ") || "—"}</td>
              <td>${badges}</td>
              <td>
                <a href="#/grade/${encodeURIComponent(sub.submission_id)}">grade</a>
                <a href="#/moderate/${encodeURIComponent(sub.submission_id)}">moderate</a>
              </td>
            </tr>`;
        })
        .join("");
      return `
        <section class="card">
          <h2>${escapeHtml(task.id)} <small>${escapeHtml(task.category)} · ${task.criteria_count} criteria · ${task.max_marks} marks</small></h2>
          <p class="statement">${escapeHtml(task.statement)}</p>
          <table>
            <thead><tr><th>Submission</th><th>Graded by</th><th>Status</th><th></th></tr></thead>
            <tbody>${rows}</tbody>
          </table>
        </section>`;
    })
    .join("");
  appRoot().innerHTML = `
    ${settingsBar(settings)}
    <main>
      <h1>${escapeHtml(summary.session_name)}</h1>
      <p class="counts">${summary.counts.submissions} submissions · ${summary.counts.initial_judgments} initial judgments · ${summary.counts.consensus_resolved} cells resolved</p>
      ${sections}
    </main>`;
  wireSettings(settings, () => void renderTaskList(settings));
}

async function renderGrading(settings: Settings, submissionId: string): Promise<void> {
  if (!settings.graderId) {
    appRoot().innerHTML = `${settingsBar(settings)}<main><p class="error">Set your grader id first.</p></main>`;
    wireSettings(settings, () => void renderGrading(settings, submissionId));
    return;
  }
  const detail = await api.submission(submissionId);
  const task = await api.task(detail.task_id);
  const aiGrader = guessAiGrader(Object.keys(detail.judgments));
  const flow = new GradingFlow(api, settings.graderId, task, detail, aiGrader, settings.blind);

  const draw = () => {
    const rows = flow
      .rows()
      .map((row) => {
        const mine = row.committed ?? row.pending;
        const aiCell = row.aiVisible
          ? `${verdictBadge(row.aiVerdict)} <span class="justification">${escapeHtml(row.aiJustification)}</span>`
          : `<span class="hidden-note">hidden until you commit</span>`;
        const conflict = row.conflict
          ? `<div class="conflict">⚠ ${escapeHtml(row.conflict)}</div>`
          : "";
        const committed = row.committed !== null;
        return `
          <tr data-criterion="${escapeHtml(row.criterionId)}">
            <td class="criterion">${escapeHtml(row.text)} <small>(${row.marks} mark${row.marks === 1 ? "" : "s"})</small></td>
            <td class="mine">
              <button class="toggle yes ${mine === "yes" ? "active" : ""}" data-verdict="yes" ${committed ? "disabled" : ""}>Yes</button>
              <button class="toggle no ${mine === "no" ? "active" : ""}" data-verdict="no" ${committed ? "disabled" : ""}>No</button>
              <button class="commit" ${committed || row.pending === null ? "disabled" : ""}>Commit</button>
              ${committed ? statusBadge("committed", "ok") : ""}
              ${conflict}
            </td>
            <td class="ai">${aiCell}</td>
          </tr>`;
      })
      .join("");
    appRoot().innerHTML = `
      ${settingsBar(settings)}
      <main>
        <h1>${escapeHtml(detail.alias)} — ${escapeHtml(task.id)}</h1>
        <p class="progressline">
          ${flow.committedCount()}/${task.criteria.length} committed ·
          total <strong>${escapeHtml(flow.displayedTotal())}</strong>
          ${detail.frozen ? statusBadge("frozen: consensus opened", "warn") : ""}
        </p>
        <details open><summary>Task</summary><p class="statement">${escapeHtml(task.statement)}</p></details>
        <details open><summary>Submission (raw LaTeX)</summary>${latexBlock(detail.body)}</details>
        <table class="grading">
          <thead><tr><th>Criterion</th><th>My verdict</th><th>AI (${aiGrader ? escapeHtml(aiGrader) : "none"})</th></tr></thead>
          <tbody>${rows}</tbody>
        </table>
        <p><a href="#/moderate/${encodeURIComponent(submissionId)}">open moderation →</a></p>
      </main>`;
    wireSettings(settings, () => void renderGrading(settings, submissionId));

    for (const tr of Array.from(document.querySelectorAll("tr[data-criterion]"))) {
      const criterionId = (tr as HTMLElement).dataset.criterion as string;
      for (const button of Array.from(tr.querySelectorAll("button.toggle"))) {
        button.addEventListener("click", () => {
          flow.toggle(criterionId, (button as HTMLElement).dataset.verdict as Verdict);
          draw();
        });
      }
      tr.querySelector("button.commit")?.addEventListener("click", () => {
        void flow.commit(criterionId).then(draw, (error) => {
          alert(String(error));
          draw();
        });
      });
    }
  };
  draw();
}

async function renderModeration(settings: Settings, submissionId: string): Promise<void> {
  const detail = await api.submission(submissionId);
  const task = await api.task(detail.task_id);
  const flow = new ModerationFlow(api, task, detail);

  const draw = () => {
    const graders = flow.graders();
    const rows = flow
      .rows()
      .map((row) => {
        const verdictCells = graders
          .map(
            (grader) =>
              `<div><strong>${escapeHtml(grader)}</strong> ${verdictBadge(row.verdicts[grader] ?? null)}
               <span class="justification">${escapeHtml(row.justifications[grader] ?? "")}</span></div>`,
          )
          .join("");
        const resolved = row.resolved
          ? `${verdictBadge(row.resolved.resolved_verdict)} <span class="justification">${escapeHtml(row.resolved.resolution_note)}</span>`
          : statusBadge(row.disagreement ? "unresolved disagreement" : "unresolved", row.disagreement ? "warn" : "off");
        const tagOptions = DISCREPANCY_CATEGORIES.map(
          (c) => `<option value="${c}">${c.replace(/_/g, " ")}</option>`,
        ).join("");
        const graderOptions = graders
          .map((g) => `<option value="${escapeHtml(g)}">${escapeHtml(g)}</option>`)
          .join("");
        return `
          <tr data-criterion="${escapeHtml(row.criterionId)}" class="${row.disagreement ? "disagreement" : ""}">
            <td class="criterion">${escapeHtml(row.text)}</td>
            <td>${verdictCells}</td>
            <td class="consensus">
              ${resolved}
              <div class="resolve-controls">
                <button class="toggle yes" data-verdict="yes">Yes</button>
                <button class="toggle no" data-verdict="no">No</button>
                <input class="note" placeholder="resolution note" />
                <button class="resolve">Resolve</button>
              </div>
              <div class="tag-controls">
                <select class="tag-grader">${graderOptions}</select>
                <select class="tag-category">${tagOptions}</select>
                <button class="tag">Tag mismatch</button>
              </div>
            </td>
          </tr>`;
      })
      .join("");
    appRoot().innerHTML = `
      ${settingsBar(settings)}
      <main>
        <h1>Moderation: ${escapeHtml(detail.alias)} — ${escapeHtml(task.id)}</h1>
        <p class="progressline">
          ${flow.openDisagreements().length} open disagreement(s) ·
          consensus total <strong>${escapeHtml(flow.displayedTotal())}</strong>
          ${flow.consensusComplete() ? statusBadge("consensus complete", "ok") : statusBadge("in progress", "off")}
        </p>
        <table class="moderation">
          <thead><tr><th>Criterion</th><th>Initial verdicts</th><th>Consensus</th></tr></thead>
          <tbody>${rows}</tbody>
        </table>
        <p><a href="#/grade/${encodeURIComponent(submissionId)}">← back to grading</a></p>
      </main>`;
    wireSettings(settings, () => void renderModeration(settings, submissionId));

    for (const tr of Array.from(document.querySelectorAll("tr[data-criterion]"))) {
      const criterionId = (tr as HTMLElement).dataset.criterion as string;
      let choice: Verdict | null = null;
      for (const button of Array.from(tr.querySelectorAll("button.toggle"))) {
        button.addEventListener("click", () => {
          choice = (button as HTMLElement).dataset.verdict as Verdict;
          for (const other of Array.from(tr.querySelectorAll("button.toggle"))) {
            other.classList.toggle("active", other === button);
          }
        });
      }
      tr.querySelector("button.resolve")?.addEventListener("click", () => {
        if (!choice) {
          alert("pick a resolved verdict first");
          return;
        }
        const note = (tr.querySelector("input.note") as HTMLInputElement).value;
        void flow
          .resolve(criterionId, choice, note, flow.graders())
          .then(draw, (error) => {
            alert(String(error));
            draw();
          });
      });
      tr.querySelector("button.tag")?.addEventListener("click", () => {
        const grader = (tr.querySelector("select.tag-grader") as HTMLSelectElement).value;
        const category = (tr.querySelector("select.tag-category") as HTMLSelectElement)
          .value as DiscrepancyCategory;
        void flow.tag(criterionId, grader, category, "").then(
          () => alert("tag recorded"),
          (error) => alert(String(error)),
        );
      });
    }
  };
  draw();
}

async function renderDashboard(settings: Settings): Promise<void> {
  const summary = await api.session();
  const graders = new Set<string>();
  for (const task of summary.tasks) {
    for (const sub of task.submissions) {
      for (const grader of sub.graders) {
        graders.add(grader);
      }
    }
  }
  const ordered = Array.from(graders).sort();
  const pair = ordered.slice(0, 2);

  let agreementHtml = "<p>Needs two graders with shared cells.</p>";
  if (pair.length === 2) {
    try {
      const report = await api.agreement(pair[0], pair[1]);
      agreementHtml = `<p>${escapeHtml(pair[0])} vs ${escapeHtml(pair[1])}:
        <strong>${report.pct}%</strong> (${report.matched}/${report.total} cells)</p>`;
    } catch (error) {
      agreementHtml = `<p class="error">${escapeHtml(String(error))}</p>`;
    }
  }

  const accuracySections = await Promise.all(
    ordered.map(async (grader) => {
      try {
        const report = await api.accuracy(grader);
        const perType = Object.entries(report.by_category)
          .map(([category, r]) => `${category} ${r.pct}%`)
          .join(" · ");
        return `<li>${escapeHtml(grader)}: <strong>${report.pct}%</strong> (${report.matched}/${report.total})${perType ? ` — ${perType}` : ""}</li>`;
      } catch {
        return `<li>${escapeHtml(grader)}: awaiting full consensus</li>`;
      }
    }),
  );

  let taxonomyHtml = "<p>No discrepancy tags yet.</p>";
  try {
    const taxonomy = await api.taxonomy();
    taxonomyHtml = `<ul>${Object.entries(taxonomy.categories)
      .map(
        ([category, entry]) =>
          `<li>${escapeHtml(category)}: ${entry.count} (${entry.pct}%)</li>`,
      )
      .join("")}</ul>`;
  } catch {
    // taxonomy of an empty tag set is undefined; keep the placeholder
  }

  const grids = await Promise.all(
    summary.tasks.map(async (task) => {
      try {
        const table = await api.marksTable(task.id);
        return `<h3>${escapeHtml(task.id)}</h3><pre class="grid">${escapeHtml(table.text)}</pre>`;
      } catch (error) {
        return `<h3>${escapeHtml(task.id)}</h3><p class="error">${escapeHtml(String(error))}</p>`;
      }
    }),
  );

  appRoot().innerHTML = `
    ${settingsBar(settings)}
    <main>
      <h1>Dashboard</h1>
      <section class="card"><h2>Agreement</h2>${agreementHtml}</section>
      <section class="card"><h2>Accuracy vs consensus</h2><ul>${accuracySections.join("")}</ul></section>
      <section class="card"><h2>Discrepancy taxonomy</h2>${taxonomyHtml}</section>
      <section class="card"><h2>Marks by grader</h2>${grids.join("")}</section>
    </main>`;
  wireSettings(settings, () => void renderDashboard(settings));
}

async function route(): Promise<void> {
  const settings = loadSettings();
  const hash = window.location.hash || "#/";
  try {
    if (hash.startsWith("#/grade/")) {
      await renderGrading(settings, decodeURIComponent(hash.slice("#/grade/".length)));
    } else if (hash.startsWith("#/moderate/")) {
      await renderModeration(settings, decodeURIComponent(hash.slice("#/moderate/".length)));
    } else if (hash === "#/dashboard") {
      await renderDashboard(settings);
    } else {
      await renderTaskList(settings);
    }
  } catch (error) {
    appRoot().innerHTML = `${settingsBar(settings)}<main><p class="error">${escapeHtml(String(error))}</p></main>`;
    wireSettings(settings, () => void route());
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());

// Small HTML helpers. LaTeX bodies are rendered as escaped monospaced text;
// client-side math rendering would be a progressive enhancement, never a
// correctness requirement.

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function verdictBadge(verdict: "yes" | "no" | null): string {
  if (verdict === null) {
    return `<span class="badge badge-empty">—</span>`;
  }
  const cls = verdict === "yes" ? "badge-yes" : "badge-no";
  return `<span class="badge ${cls}">${verdict === "yes" ? "Yes" : "No"}</span>`;
}

export function statusBadge(text: string, kind: "ok" | "warn" | "off"): string {
  return `<span class="badge badge-${kind}">${escapeHtml(text)}</span>`;
}

export function latexBlock(body: string): string {
  return `<pre class="latex">${escapeHtml(body)}</pre>`;
}

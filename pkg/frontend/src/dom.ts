import type { DashboardView } from "./dashboard.js";
import type { SessionState } from "./session.js";
import { MULTICLASS_TAGS } from "./types.js";

/** DOM rendering. The OCR text is shown in a monospaced block with line
 * breaks preserved and no correction; the explanation is never truncated. */

export function renderSession(root: HTMLElement, state: SessionState, leaseSeconds: number | null): void {
  const banner = state.banner
    ? `<div class="banner" role="alert">${escapeHtml(state.banner)}</div>`
    : "";
  if (state.phase === "loading" || state.phase === "idle") {
    root.innerHTML = `${banner}<p class="status">loading…</p>`;
    return;
  }
  if (state.phase === "empty") {
    root.innerHTML = `${banner}
      <div class="done">
        <h2>Queue complete</h2>
        <p>${state.resolvedCount} items resolved this session.</p>
        <button data-action="refresh">Check again (R)</button>
      </div>`;
    return;
  }
  if (state.phase === "error") {
    root.innerHTML = `${banner}<button data-action="refresh">Retry (R)</button>`;
    return;
  }
  const item = state.current!;
  const lease =
    leaseSeconds === null ? "" : `<span class="lease">lease ${Math.max(0, Math.floor(leaseSeconds))}s</span>`;
  // The tag picker belongs to the override flow; it only appears once an
  // override is in progress.
  const picker = !state.overrideArmed
    ? ""
    : MULTICLASS_TAGS.map((tag, i) => {
        const selected = state.overrideTag === tag ? " selected" : "";
        const disabled = item.machineTag === tag ? " disabled" : "";
        return `<button class="tag${selected}" data-tag="${tag}"${disabled}>${i + 1}&nbsp;${tag}</button>`;
      }).join("");
  root.innerHTML = `${banner}
    <div class="item">
      <header>#${escapeHtml(item.entryId)}
        <span class="queue">${item.queueRemaining} waiting</span> ${lease}</header>
      <pre class="ocr">${escapeHtml(item.text)}</pre>
      <p class="machine">machine tag: <strong>${escapeHtml(item.machineTag)}</strong></p>
      <blockquote class="explanation">${escapeHtml(item.explanation)}</blockquote>
      <div class="verdicts">
        <button data-action="accept">Accept (A)</button>
        <button data-action="override">Override (O)</button>
        <button data-action="unreadable">Unreadable (U)</button>
      </div>
      <div class="picker">${picker}</div>
      <p class="count">${state.resolvedCount} resolved</p>
    </div>`;
}

export function renderDashboard(root: HTMLElement, view: DashboardView): void {
  const bars = view.agreementRows
    .map(
      (row) => `
      <tr>
        <td>${escapeHtml(row.tag)}</td>
        <td><div class="bar machine" style="width:${row.machinePct}%"></div>${row.machinePct}%</td>
        <td><div class="bar human" style="width:${row.humanPct}%"></div>${row.humanPct}%</td>
      </tr>`,
    )
    .join("");
  const distribution = view.distributionRows
    .map((row) => `<tr><td>${escapeHtml(row.label)}</td><td>${row.count}</td><td>${row.percentage}%</td></tr>`)
    .join("");
  root.innerHTML = `
    <table class="agreement">
      <thead><tr><th>Tag</th><th>Machine</th><th>Human</th></tr></thead>
      <tbody>
        ${bars}
        <tr class="unreadable"><td>Unreadable</td><td>–</td><td>${view.unreadableHumanPct}%</td></tr>
      </tbody>
    </table>
    <table class="distribution">
      <thead><tr><th>Verified class</th><th>Count</th><th>Share</th></tr></thead>
      <tbody>${distribution}</tbody>
    </table>
    <p class="progress">${view.progress.resolved}/${view.progress.total} resolved,
      ${view.progress.pending} pending, ${view.progress.assigned} assigned</p>`;
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

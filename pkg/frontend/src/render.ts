/** HTML renderers. Pure string builders, one per panel.
 *
 * Answer rows are emitted in payload order; the service already ranks them
 * and the client never re-sorts. All interpolated text is escaped.
 */

import { AskResponse } from "./api.js";
import { ErrorNotice, SessionEntry, Suggestion } from "./controller.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** The question with the matched head surface wrapped in <mark>. */
export function renderQuestionWithSpan(question: string, span: [number, number]): string {
  const [start, end] = span;
  if (start < 0 || end > question.length || start >= end) return escapeHtml(question);
  return (
    escapeHtml(question.slice(0, start)) +
    `<mark>${escapeHtml(question.slice(start, end))}</mark>` +
    escapeHtml(question.slice(end))
  );
}

export function renderHops(hopClass: number, probabilities: number[]): string {
  const parts = probabilities
    .map((p, i) => `${i + 1}-hop ${p.toFixed(3)}`)
    .join(", ");
  return (
    `<p class="hops"><strong>${hopClass}-hop</strong> question ` +
    `<span class="probs">(${escapeHtml(parts)})</span></p>`
  );
}

export function renderAnswers(answers: AskResponse["answers"]): string {
  const rows = answers
    .map(
      (a, i) =>
        `<tr data-entity="${escapeHtml(a.id)}">` +
        `<td class="rank">${i + 1}</td>` +
        `<td class="name">${escapeHtml(a.name)}</td>` +
        `<td class="kind">${escapeHtml(a.kind)}</td>` +
        `<td class="score">${a.score.toFixed(4)}</td></tr>`,
    )
    .join("");
  return (
    `<table class="answers"><thead><tr>` +
    `<th>#</th><th>answer</th><th>kind</th><th>score</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderResult(question: string, response: AskResponse): string {
  const head = response.head;
  return (
    `<section class="result">` +
    `<p class="asked">${renderQuestionWithSpan(question, head.span)}</p>` +
    `<p class="head">head entity: <strong>${escapeHtml(head.name)}</strong> ` +
    `<code>${escapeHtml(head.id)}</code></p>` +
    renderHops(response.hops.class, response.hops.probabilities) +
    renderAnswers(response.answers) +
    `</section>`
  );
}

export function renderSuggestions(suggestions: Suggestion[]): string {
  if (suggestions.length === 0) return "";
  const items = suggestions
    .map(
      (s, i) =>
        `<li data-index="${i}" data-entity="${escapeHtml(s.id)}">` +
        `${escapeHtml(s.name)} <span class="kind">${escapeHtml(s.kind)}</span></li>`,
    )
    .join("");
  return `<ul class="suggestions">${items}</ul>`;
}

export function renderNotice(notice: ErrorNotice | null): string {
  if (notice === null) return "";
  const parts = [
    `<div class="notice" data-code="${escapeHtml(notice.code)}">`,
    `<p>${escapeHtml(notice.message)}</p>`,
  ];
  if (notice.guidance) parts.push(`<p class="guidance">${escapeHtml(notice.guidance)}</p>`);
  if (notice.candidates && notice.candidates.length > 0) {
    const items = notice.candidates
      .map((c) => `<li>${escapeHtml(c.name)} <code>${escapeHtml(c.id)}</code></li>`)
      .join("");
    parts.push(`<ul class="candidates">${items}</ul>`);
  }
  if (notice.retryable) parts.push(`<button class="retry" type="button">retry</button>`);
  parts.push(`</div>`);
  return parts.join("");
}

export function renderHistory(history: SessionEntry[]): string {
  if (history.length === 0) return `<p class="empty">no questions yet</p>`;
  const items = history
    .map(
      (entry, i) =>
        `<li data-index="${i}"><button class="replay" type="button">` +
        `${escapeHtml(entry.question)}</button>` +
        `<span class="when">${escapeHtml(entry.at)}</span></li>`,
    )
    .join("");
  return `<ol class="history">${items}</ol>`;
}

import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  renderAnswers,
  renderHistory,
  renderNotice,
  renderQuestionWithSpan,
  renderResult,
  renderSuggestions,
} from "../src/render.js";
import { tenAnswers } from "./helpers.js";

function countRows(html: string): number {
  return (html.match(/<tr data-entity=/g) ?? []).length;
}

describe("renderAnswers", () => {
  it("renders one row per answer in payload order", () => {
    const response = tenAnswers("q", "x");
    const html = renderAnswers(response.answers);
    expect(countRows(html)).toBe(10);
    const positions = response.answers.map((a) => html.indexOf(`>${a.name}<`));
    expect([...positions].sort((a, b) => a - b)).toEqual(positions);
  });

  it("does not re-sort even when the payload is unsorted", () => {
    const html = renderAnswers([
      { id: "a", name: "worse", kind: "k", score: -3.25 },
      { id: "b", name: "better", kind: "k", score: 8.0 },
    ]);
    expect(html.indexOf("worse")).toBeLessThan(html.indexOf("better"));
  });

  it("shows scores to four decimals", () => {
    const html = renderAnswers([
      { id: "a", name: "a", kind: "k", score: 3.14159265 },
      { id: "b", name: "b", kind: "k", score: -2 },
    ]);
    expect(html).toContain(">3.1416<");
    expect(html).toContain(">-2.0000<");
  });

  it("escapes hostile names", () => {
    const html = renderAnswers([
      { id: "a", name: "<script>alert(1)</script>", kind: "k", score: 0 },
    ]);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("renderQuestionWithSpan", () => {
  it("marks exactly the matched span", () => {
    const question = "what follows item 017 in the sequence?";
    const start = question.indexOf("item 017");
    const html = renderQuestionWithSpan(question, [start, start + 8]);
    expect(html).toBe(
      "what follows <mark>item 017</mark> in the sequence?",
    );
  });

  it("falls back to plain text for an out-of-range span", () => {
    expect(renderQuestionWithSpan("abc", [2, 99])).toBe("abc");
    expect(renderQuestionWithSpan("a<b", [3, 2])).toBe("a&lt;b");
  });
});

describe("renderResult", () => {
  it("shows head entity, hop class, and the table", () => {
    const question = "which diseases involve lung vasculature development?";
    const response = tenAnswers(question, "lung vasculature development");
    const html = renderResult(question, response);
    expect(html).toContain("<mark>lung vasculature development</mark>");
    expect(html).toContain("<strong>3-hop</strong>");
    expect(html).toContain("3-hop 0.970");
    expect(countRows(html)).toBe(10);
  });
});

describe("renderSuggestions", () => {
  it("renders nothing at all for an empty list", () => {
    expect(renderSuggestions([])).toBe("");
  });

  it("labels each suggestion with its kind", () => {
    const html = renderSuggestions([
      { id: "G1", name: "STAT3", kind: "gene", fragmentLength: 3 },
    ]);
    expect(html).toContain("STAT3");
    expect(html).toContain('data-index="0"');
    expect(html).toContain("gene");
  });
});

describe("renderNotice", () => {
  it("is empty when there is nothing to report", () => {
    expect(renderNotice(null)).toBe("");
  });

  it("keys the notice on the error code", () => {
    const html = renderNotice({
      code: "no_entity",
      message: "no known entity mentioned in the question",
      question: "q",
      retryable: false,
      guidance: "use the autocomplete",
    });
    expect(html).toContain('data-code="no_entity"');
    expect(html).toContain("use the autocomplete");
    expect(html).not.toContain("retry");
  });

  it("lists ambiguity candidates", () => {
    const html = renderNotice({
      code: "ambiguity",
      message: "several entities match",
      question: "q",
      retryable: false,
      candidates: [
        { id: "a", name: "alpha one" },
        { id: "b", name: "alpha two" },
      ],
    });
    expect(html).toContain("alpha one");
    expect(html).toContain("alpha two");
  });

  it("offers a retry button for transport faults", () => {
    const html = renderNotice({
      code: "network",
      message: "service unreachable",
      question: "q",
      retryable: true,
    });
    expect(html).toContain('data-code="network"');
    expect(html).toContain('class="retry"');
  });
});

describe("renderHistory", () => {
  it("shows a placeholder for an empty session", () => {
    expect(renderHistory([])).toContain("no questions yet");
  });

  it("lists entries with replay buttons, escaped", () => {
    const html = renderHistory([
      {
        question: "a <tricky> question",
        response: tenAnswers("q", "x"),
        at: "2026-01-01T00:00:00Z",
      },
    ]);
    expect(html).toContain("a &lt;tricky&gt; question");
    expect(html).toContain('class="replay"');
    expect(html).toContain("2026-01-01T00:00:00Z");
  });
});

describe("escapeHtml", () => {
  it("neutralizes markup and quotes", () => {
    expect(escapeHtml(`<a href="x">&</a>`)).toBe(
      "&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;",
    );
  });
});

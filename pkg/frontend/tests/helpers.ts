/** Mock fetch plumbing shared by the test files.
 *
 * Responses are plain objects with the minimal Response surface so that
 * settling them never needs real I/O ticks, only microtasks.
 */

import { AskResponse, EntitySuggestion, FetchLike } from "../src/api.js";

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
  signal: AbortSignal | undefined;
}

export function jsonResponse(status: number, body: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  } as unknown as Response;
}

export function textResponse(status: number, text: string): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => JSON.parse(text),
  } as unknown as Response;
}

export interface MockFetch {
  fetch: FetchLike;
  calls: RecordedCall[];
}

export function mockFetch(
  handler: (call: RecordedCall) => Response | Promise<Response>,
): MockFetch {
  const calls: RecordedCall[] = [];
  const impl: FetchLike = (url, init) => {
    const call: RecordedCall = {
      url,
      method: init?.method ?? "GET",
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
      signal: init?.signal ?? undefined,
    };
    calls.push(call);
    return new Promise<Response>((resolve, reject) => {
      const abort = () => reject(new DOMException("aborted", "AbortError"));
      if (call.signal?.aborted) return abort();
      call.signal?.addEventListener("abort", abort);
      Promise.resolve(handler(call)).then(resolve, reject);
    });
  };
  return { fetch: impl, calls };
}

export function deferred<T>(): {
  promise: Promise<T>;
  resolve: (value: T) => void;
  reject: (reason: unknown) => void;
} {
  let resolve!: (value: T) => void;
  let reject!: (reason: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** Let chained promise continuations run without advancing timers. */
export async function settle(rounds = 25): Promise<void> {
  for (let i = 0; i < rounds; i++) await null;
}

export function normalizeSurface(text: string): string {
  return text.toLowerCase().replace(/\s+/g, " ").trim();
}

export const ENTITIES: EntitySuggestion[] = [
  { id: "G1", name: "STAT3", kind: "gene" },
  { id: "G2", name: "VEGFA", kind: "gene" },
  { id: "P1", name: "lung vasculature development", kind: "process" },
  { id: "P2", name: "vasculature development", kind: "process" },
  { id: "D1", name: "asthma", kind: "disease" },
];

/** Prefix lookup over the fixture entities, mirroring the service. */
export function entityLookup(url: string): Response {
  const parsed = new URL(url, "http://service.test");
  const prefix = normalizeSurface(parsed.searchParams.get("prefix") ?? "");
  const limit = Number(parsed.searchParams.get("limit") ?? "20");
  const hits = ENTITIES.filter((e) => normalizeSurface(e.name).startsWith(prefix));
  hits.sort((a, b) => a.name.localeCompare(b.name));
  return jsonResponse(200, hits.slice(0, limit));
}

export function tenAnswers(question: string, headName: string): AskResponse {
  const start = question.indexOf(headName);
  return {
    head: {
      id: "P1",
      name: headName,
      span: [start, start + headName.length],
    },
    hops: { class: 3, probabilities: [0.01, 0.02, 0.97] },
    answers: Array.from({ length: 10 }, (_, i) => ({
      id: `D${i + 1}`,
      name: `disease ${i + 1}`,
      kind: "disease",
      score: 9.5 - i,
    })),
  };
}

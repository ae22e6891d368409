/** Typed client for the question answering service.
 *
 * Every endpoint is read-only. Errors arrive in one envelope,
 * `{"error": {"code", "message", ...}}`; the code is machine-readable and
 * drives which notice the UI shows.
 */

export interface HealthResponse {
  status: string;
  fingerprint: string;
}

export interface ModelInfo {
  d: number;
  num_entities: number;
  num_relations: number;
  hashes: { entities: string; relations: string };
}

export interface EntitySuggestion {
  id: string;
  name: string;
  kind: string;
}

export interface AskResponse {
  head: { id: string; name: string; span: [number, number] };
  hops: { class: number; probabilities: number[] };
  answers: { id: string; name: string; kind: string; score: number }[];
}

export interface ErrorEnvelope {
  code: string;
  message: string;
  normalized_question?: string;
  candidates?: { id: string; name: string }[];
}

/** A failed request, either a service error envelope or a transport fault. */
export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly detail: ErrorEnvelope;

  constructor(status: number, detail: ErrorEnvelope) {
    super(detail.message);
    this.name = "ApiError";
    this.status = status;
    this.code = detail.code;
    this.detail = detail;
  }

  /** Transport and server faults are worth retrying; input faults are not. */
  get retryable(): boolean {
    return this.code === "network" || this.code === "internal";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let envelope: ErrorEnvelope = {
    code: "internal",
    message: `unexpected response (HTTP ${response.status})`,
  };
  try {
    const body = (await response.json()) as { error?: ErrorEnvelope };
    if (body && body.error && typeof body.error.code === "string") {
      envelope = body.error;
    }
  } catch {
    // non-JSON body, keep the fallback envelope
  }
  return new ApiError(response.status, envelope);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") throw err;
      throw new ApiError(0, { code: "network", message: "service unreachable" });
    }
    if (!response.ok) throw await parseError(response);
    return response.json();
  }

  health(): Promise<HealthResponse> {
    return this.request("/health") as Promise<HealthResponse>;
  }

  modelInfo(): Promise<ModelInfo> {
    return this.request("/model/info") as Promise<ModelInfo>;
  }

  suggest(prefix: string, limit = 8, signal?: AbortSignal): Promise<EntitySuggestion[]> {
    const params = new URLSearchParams({ prefix, limit: String(limit) });
    return this.request(`/entities?${params}`, { signal }) as Promise<EntitySuggestion[]>;
  }

  ask(question: string, topK = 10): Promise<AskResponse> {
    return this.request("/ask", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ question, top_k: topK }),
    }) as Promise<AskResponse>;
  }
}

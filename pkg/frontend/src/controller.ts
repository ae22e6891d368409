/** UI state machine, kept free of DOM access so it can be driven in tests.
 *
 * Concurrency rules: one /ask request is in flight at a time and further
 * submissions queue behind it; autocomplete lookups are debounced and any
 * newer keystroke aborts the older lookup. History only ever grows.
 */

import { ApiClient, ApiError, AskResponse } from "./api.js";

export interface Suggestion {
  id: string;
  name: string;
  kind: string;
  /** characters before the cursor that picking this suggestion replaces */
  fragmentLength: number;
}

export interface ErrorNotice {
  code: string;
  message: string;
  question: string;
  retryable: boolean;
  guidance?: string;
  candidates?: { id: string; name: string }[];
}

export interface SessionEntry {
  question: string;
  response: AskResponse;
  at: string;
}

export interface AppState {
  question: string;
  cursor: number;
  suggestions: Suggestion[];
  busy: boolean;
  queued: number;
  notice: ErrorNotice | null;
  history: SessionEntry[];
}

export interface ControllerOptions {
  debounceMs?: number;
  topK?: number;
  suggestionLimit?: number;
  maxFragmentTokens?: number;
  now?: () => string;
}

export const MIN_PREFIX_CHARS = 2;

/** Token-suffixes of the text left of the cursor, longest first.
 *
 * The service matches entity-name prefixes, so for "…involved in lung v"
 * the useful query is "lung v", not the whole sentence. Trying the last
 * few token boundaries covers multi-word names without guessing where the
 * entity starts.
 */
export function entityFragments(textBeforeCursor: string, maxTokens: number): string[] {
  const starts: number[] = [];
  let inToken = false;
  for (let i = 0; i < textBeforeCursor.length; i++) {
    const isSpace = /\s/.test(textBeforeCursor[i] as string);
    if (!isSpace && !inToken) starts.push(i);
    inToken = !isSpace;
  }
  const out: string[] = [];
  const first = Math.max(0, starts.length - maxTokens);
  for (let t = first; t < starts.length; t++) {
    const fragment = textBeforeCursor.slice(starts[t] as number);
    if (fragment.trim().length >= MIN_PREFIX_CHARS && !out.includes(fragment)) {
      out.push(fragment);
    }
  }
  return out;
}

function noticeFrom(err: unknown, question: string): ErrorNotice {
  if (err instanceof ApiError) {
    const notice: ErrorNotice = {
      code: err.code,
      message: err.message,
      question,
      retryable: err.retryable,
    };
    if (err.code === "no_entity") {
      notice.guidance =
        "No entity in the question matched the graph. Use the autocomplete to insert an exact entity name.";
    }
    if (err.detail.candidates) notice.candidates = err.detail.candidates;
    return notice;
  }
  return {
    code: "internal",
    message: err instanceof Error ? err.message : String(err),
    question,
    retryable: true,
  };
}

export class Controller {
  private readonly client: ApiClient;
  private readonly debounceMs: number;
  private readonly topK: number;
  private readonly suggestionLimit: number;
  private readonly maxFragmentTokens: number;
  private readonly now: () => string;

  private readonly state: AppState = {
    question: "",
    cursor: 0,
    suggestions: [],
    busy: false,
    queued: 0,
    notice: null,
    history: [],
  };

  private listeners: ((state: AppState) => void)[] = [];
  private debounceHandle: ReturnType<typeof setTimeout> | null = null;
  private lookupGeneration = 0;
  private lookupAbort: AbortController | null = null;
  private askQueue: string[] = [];
  private draining = false;

  constructor(client: ApiClient, options: ControllerOptions = {}) {
    this.client = client;
    this.debounceMs = options.debounceMs ?? 200;
    this.topK = options.topK ?? 10;
    this.suggestionLimit = options.suggestionLimit ?? 8;
    this.maxFragmentTokens = options.maxFragmentTokens ?? 4;
    this.now = options.now ?? (() => new Date().toISOString());
  }

  get snapshot(): Readonly<AppState> {
    return this.state;
  }

  get canSubmit(): boolean {
    return this.state.question.trim().length > 0;
  }

  subscribe(listener: (state: AppState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  /** Update the question text and (debounced) refresh the suggestions. */
  setQuestion(text: string, cursor?: number): void {
    this.state.question = text;
    this.state.cursor = cursor ?? text.length;
    if (this.debounceHandle !== null) clearTimeout(this.debounceHandle);
    const fragments = entityFragments(
      text.slice(0, this.state.cursor),
      this.maxFragmentTokens,
    );
    if (fragments.length === 0) {
      this.cancelLookup();
      this.state.suggestions = [];
      this.emit();
      return;
    }
    this.debounceHandle = setTimeout(() => {
      this.debounceHandle = null;
      void this.lookup(fragments);
    }, this.debounceMs);
    this.emit();
  }

  private cancelLookup(): void {
    this.lookupGeneration++;
    if (this.lookupAbort !== null) {
      this.lookupAbort.abort();
      this.lookupAbort = null;
    }
  }

  private async lookup(fragments: string[]): Promise<void> {
    this.cancelLookup();
    const generation = this.lookupGeneration;
    const abort = new AbortController();
    this.lookupAbort = abort;
    const settled = await Promise.all(
      fragments.map((fragment) =>
        this.client.suggest(fragment, this.suggestionLimit, abort.signal).then(
          (rows) => ({ fragment, rows }),
          () => ({ fragment, rows: [] }),
        ),
      ),
    );
    if (generation !== this.lookupGeneration) return;
    this.lookupAbort = null;
    const seen = new Set<string>();
    const merged: Suggestion[] = [];
    for (const { fragment, rows } of settled) {
      for (const row of rows) {
        if (seen.has(row.id)) continue;
        seen.add(row.id);
        merged.push({ ...row, fragmentLength: fragment.length });
      }
    }
    this.state.suggestions = merged.slice(0, this.suggestionLimit);
    this.emit();
  }

  /** Splice the picked entity's display name over the typed fragment. */
  pickSuggestion(index: number): void {
    const pick = this.state.suggestions[index];
    if (!pick) return;
    const start = this.state.cursor - pick.fragmentLength;
    this.state.question =
      this.state.question.slice(0, start) +
      pick.name +
      this.state.question.slice(this.state.cursor);
    this.state.cursor = start + pick.name.length;
    this.cancelLookup();
    if (this.debounceHandle !== null) {
      clearTimeout(this.debounceHandle);
      this.debounceHandle = null;
    }
    this.state.suggestions = [];
    this.emit();
  }

  dismissSuggestions(): void {
    this.cancelLookup();
    this.state.suggestions = [];
    this.emit();
  }

  clearNotice(): void {
    this.state.notice = null;
    this.emit();
  }

  /** Queue the current question; an empty input sends nothing. */
  submit(): void {
    if (!this.canSubmit) return;
    this.submitText(this.state.question);
  }

  submitText(question: string): void {
    if (question.trim().length === 0) return;
    this.askQueue.push(question);
    if (this.draining) {
      // lands behind the in-flight request
      this.state.queued = this.askQueue.length;
      this.emit();
    }
    void this.drain();
  }

  retry(): void {
    const notice = this.state.notice;
    if (notice) this.submitText(notice.question);
  }

  /** A history entry reproduces its panel from a fresh request. */
  resubmit(index: number): void {
    const entry = this.state.history[index];
    if (entry) this.submitText(entry.question);
  }

  private async drain(): Promise<void> {
    if (this.draining) return;
    this.draining = true;
    this.state.busy = true;
    while (this.askQueue.length > 0) {
      const question = this.askQueue.shift() as string;
      this.state.queued = this.askQueue.length;
      this.emit();
      try {
        const response = await this.client.ask(question, this.topK);
        this.state.history.push({ question, response, at: this.now() });
        this.state.notice = null;
      } catch (err) {
        this.state.notice = noticeFrom(err, question);
      }
      this.emit();
    }
    this.draining = false;
    this.state.busy = false;
    this.state.queued = 0;
    this.emit();
  }
}

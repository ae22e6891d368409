/** DOM wiring. Everything interesting lives in controller.ts and render.ts;
 * this file only moves state into elements and events into the controller.
 */

import { ApiClient } from "./api.js";
import { AppState, Controller } from "./controller.js";
import { renderHistory, renderNotice, renderResult, renderSuggestions } from "./render.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function boot(baseUrl = ""): Controller {
  const client = new ApiClient(baseUrl);
  const controller = new Controller(client);

  const input = el<HTMLInputElement>("question");
  const submit = el<HTMLButtonElement>("submit");
  const suggestions = el<HTMLDivElement>("suggestions");
  const notice = el<HTMLDivElement>("notice");
  const result = el<HTMLDivElement>("result");
  const history = el<HTMLDivElement>("history");
  const status = el<HTMLSpanElement>("status");

  controller.subscribe((state: AppState) => {
    if (input.value !== state.question) {
      input.value = state.question;
      input.setSelectionRange(state.cursor, state.cursor);
    }
    submit.disabled = !controller.canSubmit || state.busy;
    submit.textContent = state.busy
      ? state.queued > 0
        ? `asking (${state.queued} queued)`
        : "asking"
      : "ask";
    suggestions.innerHTML = renderSuggestions(state.suggestions);
    notice.innerHTML = renderNotice(state.notice);
    const last = state.history[state.history.length - 1];
    result.innerHTML = last ? renderResult(last.question, last.response) : "";
    history.innerHTML = renderHistory(state.history);
  });

  input.addEventListener("input", () => {
    controller.setQuestion(input.value, input.selectionStart ?? input.value.length);
  });
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      event.preventDefault();
      controller.dismissSuggestions();
      controller.submit();
    } else if (event.key === "Escape") {
      controller.dismissSuggestions();
    }
  });
  submit.addEventListener("click", () => controller.submit());

  suggestions.addEventListener("click", (event) => {
    const item = (event.target as HTMLElement).closest("li[data-index]");
    if (item) {
      controller.pickSuggestion(Number(item.getAttribute("data-index")));
      input.focus();
    }
  });

  notice.addEventListener("click", (event) => {
    if ((event.target as HTMLElement).closest("button.retry")) controller.retry();
  });

  history.addEventListener("click", (event) => {
    const item = (event.target as HTMLElement).closest("li[data-index]");
    if (item && (event.target as HTMLElement).closest("button.replay")) {
      controller.resubmit(Number(item.getAttribute("data-index")));
    }
  });

  client
    .modelInfo()
    .then((info) => {
      status.textContent =
        `${info.num_entities} entities, ${info.num_relations} relations, d=${info.d}`;
    })
    .catch(() => {
      status.textContent = "service unreachable";
    });

  controller.setQuestion("");
  return controller;
}

if (typeof document !== "undefined" && document.getElementById("question")) {
  boot();
}

import { fetchStats } from "./api.js";
import type { FetchLike } from "./api.js";
import { TEMPLATE_LABELS, renderResults, renderStatsBanner } from "./render.js";
import { SearchController } from "./state.js";
import type { Modality, Pipeline } from "./types.js";

function byId<T extends HTMLElement>(root: Document, id: string): T {
  const el = root.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export function initSearchUi(root: Document, baseUrl = "", fetchFn?: FetchLike): SearchController {
  const form = byId<HTMLFormElement>(root, "search-form");
  const input = byId<HTMLInputElement>(root, "search-input");
  const modalitySelect = byId<HTMLSelectElement>(root, "modality-select");
  const pipelineSelect = byId<HTMLSelectElement>(root, "pipeline-select");
  const kInput = byId<HTMLInputElement>(root, "k-input");
  const button = byId<HTMLButtonElement>(root, "search-button");
  const templateLabel = byId<HTMLElement>(root, "template-label");
  const results = byId<HTMLElement>(root, "results");
  const banner = byId<HTMLElement>(root, "stats-banner");

  const doFetch: FetchLike = fetchFn ?? ((url, init) => fetch(url, init));
  const controller = new SearchController(baseUrl, doFetch, (state) => {
    renderResults(results, state);
    button.disabled = !controller.canSubmit() || state.loading;
  });

  input.addEventListener("input", () => {
    controller.setQuery(input.value);
  });
  modalitySelect.addEventListener("change", () => {
    const modality = modalitySelect.value as Modality;
    controller.setModality(modality);
    // re-label the card template; no request goes out until submit
    templateLabel.textContent = TEMPLATE_LABELS[modality];
  });
  pipelineSelect.addEventListener("change", () => {
    controller.setPipeline(pipelineSelect.value as Pipeline);
  });
  kInput.addEventListener("change", () => {
    controller.setK(Number(kInput.value));
  });
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void controller.submit();
  });
  results.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains("retry")) {
      void controller.submit();
    }
  });

  templateLabel.textContent = TEMPLATE_LABELS[modalitySelect.value as Modality];
  button.disabled = true;
  renderResults(results, controller.state);

  void fetchStats(baseUrl, doFetch)
    .then((stats) => renderStatsBanner(banner, stats))
    .catch(() => renderStatsBanner(banner, null));

  return controller;
}

// module scripts run after the document is parsed
if (typeof document !== "undefined" && document.getElementById("search-form")) {
  initSearchUi(document);
}

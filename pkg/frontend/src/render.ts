import type { Modality, SearchResult, StatsResponse, UISearchState } from "./types.js";

export const TEMPLATE_LABELS: Record<Modality, string> = {
  text: "Text results: document title, page number, matching snippet",
  image: "Image results: kind badge, caption, context excerpt",
  table: "Table results: caption, header and rows grid",
};

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function escapeRegExp(text: string): string {
  return text.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}

/** Escape the snippet and wrap query-term hits in <mark>. */
export function highlightSnippet(snippet: string, query: string): string {
  const terms = Array.from(
    new Set(
      query
        .toLowerCase()
        .split(/\s+/)
        .filter((t) => t.length > 2),
    ),
  ).sort((a, b) => b.length - a.length);
  if (!terms.length || !snippet) return escapeHtml(snippet);
  const pattern = new RegExp(terms.map(escapeRegExp).join("|"), "gi");
  let html = "";
  let last = 0;
  for (const match of snippet.matchAll(pattern)) {
    const index = match.index ?? 0;
    html += escapeHtml(snippet.slice(last, index));
    html += `<mark>${escapeHtml(match[0])}</mark>`;
    last = index + match[0].length;
  }
  return html + escapeHtml(snippet.slice(last));
}

function scoreMeta(result: SearchResult): string {
  return `${escapeHtml(result.unit_id)} &middot; score ${result.score.toFixed(4)}`;
}

function textCard(result: SearchResult, query: string): string {
  const title = result.title ?? result.doc_id;
  return `<article class="result-card text-card" data-unit-id="${escapeHtml(result.unit_id)}">
  <span class="rank">${result.rank}</span>
  <h3>${escapeHtml(title)} <span class="page">p. ${result.page_no}</span></h3>
  <p class="snippet">${highlightSnippet(result.snippet, query)}</p>
  <footer class="meta">${scoreMeta(result)}</footer>
</article>`;
}

function imageCard(result: SearchResult, query: string): string {
  const kind = result.image_kind ?? "figure";
  const caption = result.caption ?? `Figure on p. ${result.page_no}`;
  const title = result.title ?? result.doc_id;
  // no raster thumbnails for archival scans; the kind initial stands in
  return `<article class="result-card image-card" data-unit-id="${escapeHtml(result.unit_id)}">
  <span class="rank">${result.rank}</span>
  <div class="thumb" aria-hidden="true">${escapeHtml(kind.charAt(0).toUpperCase())}</div>
  <span class="kind-badge">${escapeHtml(kind)}</span>
  <h3>${escapeHtml(caption)}</h3>
  <p class="excerpt">${highlightSnippet(result.snippet, query)}</p>
  <footer class="meta">${escapeHtml(title)} &middot; p. ${result.page_no} &middot; ${scoreMeta(result)}</footer>
</article>`;
}

function tableCard(result: SearchResult, query: string): string {
  const header = result.header ?? [];
  const rows = result.rows ?? [];
  const caption = result.caption ?? result.title ?? result.doc_id;
  const headHtml = header.map((cell) => `<th>${escapeHtml(cell)}</th>`).join("");
  const bodyHtml = rows
    .map((row) => `<tr>${row.map((cell) => `<td>${escapeHtml(cell)}</td>`).join("")}</tr>`)
    .join("\n");
  const total = result.num_rows ?? rows.length;
  const more = total > rows.length ? `<p class="more-rows">&hellip; ${total} rows total</p>` : "";
  return `<article class="result-card table-card" data-unit-id="${escapeHtml(result.unit_id)}">
  <span class="rank">${result.rank}</span>
  <h3>${escapeHtml(caption)}</h3>
  <div class="grid-wrap"><table><thead><tr>${headHtml}</tr></thead><tbody>${bodyHtml}</tbody></table></div>
  ${more}
  <footer class="meta">p. ${result.page_no} &middot; ${scoreMeta(result)}</footer>
</article>`;
}

function renderCard(result: SearchResult, query: string): string {
  switch (result.modality) {
    case "image":
      return imageCard(result, query);
    case "table":
      return tableCard(result, query);
    default:
      return textCard(result, query);
  }
}

/** Paint the results panel from the current state, cards in rank order. */
export function renderResults(container: HTMLElement, state: UISearchState): void {
  if (state.loading) {
    container.innerHTML = '<p class="status">Searching&hellip;</p>';
    return;
  }
  if (state.error) {
    const retry = state.retriable ? '<button type="button" class="retry">Retry</button>' : "";
    container.innerHTML = `<div class="error-box"><p>${escapeHtml(state.error)}</p>${retry}</div>`;
    return;
  }
  if (state.results === null) {
    container.innerHTML = '<p class="status">Enter a query to search the archive.</p>';
    return;
  }
  const query = state.resultParams ? state.resultParams.q : "";
  const pieces: string[] = [];
  if (state.warning) {
    pieces.push(`<p class="warning">${escapeHtml(state.warning)}</p>`);
  }
  if (!state.results.length) {
    pieces.push('<p class="status">No results.</p>');
  }
  for (const result of state.results) {
    pieces.push(renderCard(result, query));
  }
  container.innerHTML = pieces.join("\n");
}

function count(n: number, noun: string): string {
  return `${n} ${noun}${n === 1 ? "" : "s"}`;
}

export function renderStatsBanner(el: HTMLElement, stats: StatsResponse | null): void {
  if (stats === null) {
    el.classList.add("offline");
    el.innerHTML = '<span class="offline-badge">service offline</span>';
    return;
  }
  el.classList.remove("offline");
  const c = stats.corpus;
  el.textContent = [
    count(c.num_documents, "document"),
    count(c.num_pages, "page"),
    count(c.num_images, "image"),
    count(c.num_tables, "table"),
  ].join(" · ");
}

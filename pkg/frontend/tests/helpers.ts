import type { FetchLike } from "../src/api.js";
import type { Modality, Pipeline, SearchResponse, SearchResult, StatsResponse } from "../src/types.js";

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function deferred<T>(): { promise: Promise<T>; resolve: (value: T) => void } {
  let resolve!: (value: T) => void;
  const promise = new Promise<T>((res) => {
    resolve = res;
  });
  return { promise, resolve };
}

export const FIXTURE_STATS: StatsResponse = {
  corpus: { num_documents: 3, num_pages: 7, num_images: 2, num_tables: 1 },
  units: { text: 6, image: 2, table: 1 },
};

function result(partial: Partial<SearchResult> & Pick<SearchResult, "rank" | "unit_id" | "modality">): SearchResult {
  return {
    score: 1.0 / partial.rank,
    doc_id: partial.unit_id.split(":")[0] ?? "doc",
    title: "Survey of Harappan Sites in the Ghaggar Basin",
    page_no: 1,
    snippet: "",
    ...partial,
  } as SearchResult;
}

/** Canned service responses for the showcase queries, keyed by query text. */
export const FIXTURE_RESULTS: Record<string, SearchResult[]> = {
  "Major trade activities of the Harappan civilization": [
    result({
      rank: 1,
      unit_id: "ghaggar-survey-1950:p3:text",
      modality: "text",
      page_no: 3,
      snippet:
        "Major trade activities of the Harappan civilization included the export of beads and shell bangles to Mesopotamia.",
    }),
    result({
      rank: 2,
      unit_id: "ghaggar-survey-1950:p1:text",
      modality: "text",
      page_no: 1,
      snippet: "Primary crops of the Harappan civilization: wheat, barley, peas and sesamum.",
    }),
    result({
      rank: 3,
      unit_id: "mohenjo-daro-excavations:p1:text",
      modality: "text",
      title: "Excavations at Mohenjo-daro",
      page_no: 1,
      snippet: "The workmen's quarters lie east of the granary.",
    }),
  ],
  "Dancing Girl": [
    result({
      rank: 1,
      unit_id: "mohenjo-daro-excavations:p2:image:p2-i1",
      modality: "image",
      title: "Excavations at Mohenjo-daro",
      page_no: 2,
      block_id: "p2-i1",
      image_kind: "photograph",
      caption: "FIG. 1 THE DANCING GIRL OF MOHENJO-DARO",
      ordinal: 1,
      snippet: "Figure 1 shows the bronze dancing girl recovered from the lower town.",
    }),
    result({
      rank: 2,
      unit_id: "ghaggar-survey-1950:p2:image:p2-i1",
      modality: "image",
      page_no: 2,
      block_id: "p2-i1",
      image_kind: "map",
      caption: "FIG. 2 MAP OF HARAPPAN SITES IN THE GHAGGAR BASIN",
      ordinal: 2,
      snippet: "Figure 2 shows the map of the Ghaggar basin.",
    }),
  ],
  "How did Lubbock describe the New Stone Age": [
    result({
      rank: 1,
      unit_id: "prehistoric-chronology:p2:table:p2-tb1",
      modality: "table",
      title: "Chronology of the Stone Age",
      page_no: 2,
      block_id: "p2-tb1",
      caption: "Table 3. Classification of prehistoric epochs and their dominant life.",
      header: ["Epoch", "Dominant life", "Classification by Lubbock"],
      rows: [
        ["Pleistocene", "Early man and extinct mammals", "NaN"],
        ["Holocene", "Modern man and domestic animals", "New Stone Age"],
      ],
      num_rows: 3,
      snippet: "Epoch Dominant life Classification by Lubbock",
    }),
  ],
};

/** A fetch double that answers /stats and /search the way the service does. */
export function fixtureService(): { fetchFn: FetchLike; searchCalls: string[] } {
  const searchCalls: string[] = [];
  const fetchFn: FetchLike = async (input) => {
    const url = new URL(input, "http://service.test");
    if (url.pathname === "/stats") {
      return jsonResponse(FIXTURE_STATS);
    }
    if (url.pathname === "/search") {
      searchCalls.push(url.search);
      const q = url.searchParams.get("q") ?? "";
      const body: SearchResponse = {
        query: {
          q,
          modality: (url.searchParams.get("modality") ?? "text") as Modality,
          pipeline: (url.searchParams.get("pipeline") ?? "hybrid") as Pipeline,
          k: Number(url.searchParams.get("k") ?? "5"),
        },
        total: (FIXTURE_RESULTS[q] ?? []).length,
        results: FIXTURE_RESULTS[q] ?? [],
      };
      return jsonResponse(body);
    }
    return jsonResponse({ error: "not found" }, 404);
  };
  return { fetchFn, searchCalls };
}

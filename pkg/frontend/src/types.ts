export type Modality = "text" | "image" | "table";
export type Pipeline = "keyword" | "embedding" | "hybrid";

/** The query echo the service attaches to every /search response. */
export interface SearchQueryEcho {
  q: string;
  modality: Modality;
  pipeline: Pipeline;
  k: number;
}

export interface SearchResult {
  rank: number;
  score: number;
  unit_id: string;
  doc_id: string;
  title: string | null;
  page_no: number;
  modality: Modality;
  snippet: string;
  block_id?: string;
  caption?: string;
  image_kind?: string;
  ordinal?: number;
  header?: string[];
  rows?: string[][];
  num_rows?: number;
}

export interface SearchResponse {
  query: SearchQueryEcho;
  total: number;
  results: SearchResult[];
  warning?: string;
}

export interface StatsResponse {
  corpus: {
    num_documents: number;
    num_pages: number;
    num_images: number;
    num_tables: number;
  };
  units: Record<string, number>;
}

export interface UISearchState {
  query: string;
  modality: Modality;
  pipeline: Pipeline;
  k: number;
  loading: boolean;
  error: string | null;
  retriable: boolean;
  warning: string | null;
  /** Results of the last rendered response, in response rank order. */
  results: SearchResult[] | null;
  /** The request parameters that produced `results`. */
  resultParams: SearchQueryEcho | null;
}

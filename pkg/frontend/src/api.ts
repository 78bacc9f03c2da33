import type { Pipeline, Modality, SearchResponse, StatsResponse } from "./types.js";

/** Narrow fetch signature so tests can inject a double. */
export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    /** HTTP status; 0 when the service was unreachable. */
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }

  /** Unreachable service or 5xx: a retry against the same service may succeed. */
  get retriable(): boolean {
    return this.status === 0 || this.status >= 500;
  }
}

export interface SearchParams {
  q: string;
  modality: Modality;
  pipeline: Pipeline;
  k: number;
}

async function errorMessage(response: Response, fallback: string): Promise<string> {
  try {
    const body: unknown = await response.json();
    if (body && typeof body === "object" && typeof (body as { error?: unknown }).error === "string") {
      return (body as { error: string }).error;
    }
  } catch {
    // non-JSON error body: keep the fallback
  }
  return fallback;
}

export async function searchRequest(
  baseUrl: string,
  params: SearchParams,
  fetchFn: FetchLike,
): Promise<SearchResponse> {
  const qs = new URLSearchParams({
    q: params.q,
    modality: params.modality,
    pipeline: params.pipeline,
    k: String(params.k),
  });
  let response: Response;
  try {
    response = await fetchFn(`${baseUrl}/search?${qs.toString()}`);
  } catch {
    throw new ApiError("search service unreachable", 0);
  }
  if (!response.ok) {
    const fallback = `search failed (HTTP ${response.status})`;
    throw new ApiError(await errorMessage(response, fallback), response.status);
  }
  return (await response.json()) as SearchResponse;
}

export async function fetchStats(baseUrl: string, fetchFn: FetchLike): Promise<StatsResponse> {
  let response: Response;
  try {
    response = await fetchFn(`${baseUrl}/stats`);
  } catch {
    throw new ApiError("search service unreachable", 0);
  }
  if (!response.ok) {
    const fallback = `stats failed (HTTP ${response.status})`;
    throw new ApiError(await errorMessage(response, fallback), response.status);
  }
  return (await response.json()) as StatsResponse;
}

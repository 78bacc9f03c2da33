import { ApiError, searchRequest } from "./api.js";
import type { FetchLike } from "./api.js";
import type { Modality, Pipeline, UISearchState } from "./types.js";

export function initialSearchState(): UISearchState {
  return {
    query: "",
    modality: "text",
    pipeline: "hybrid",
    k: 5,
    loading: false,
    error: null,
    retriable: false,
    warning: null,
    results: null,
    resultParams: null,
  };
}

/**
 * Holds the search form state and runs submissions.
 *
 * At most one logical request is in flight: every submit takes a fresh
 * token, and a response (or failure) is applied only while its token is
 * still the latest, so a slow earlier response can never overwrite the
 * results of a later query.
 */
export class SearchController {
  readonly state: UISearchState;
  private requestToken = 0;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike,
    private readonly onChange: (state: UISearchState) => void = () => {},
  ) {
    this.state = initialSearchState();
  }

  setQuery(query: string): void {
    this.state.query = query;
    this.onChange(this.state);
  }

  setModality(modality: Modality): void {
    this.state.modality = modality;
    this.onChange(this.state);
  }

  setPipeline(pipeline: Pipeline): void {
    this.state.pipeline = pipeline;
    this.onChange(this.state);
  }

  setK(k: number): void {
    if (!Number.isInteger(k) || k < 1) return;
    this.state.k = k;
    this.onChange(this.state);
  }

  canSubmit(): boolean {
    return this.state.query.trim().length > 0;
  }

  async submit(): Promise<void> {
    if (!this.canSubmit()) return;
    const params = {
      q: this.state.query.trim(),
      modality: this.state.modality,
      pipeline: this.state.pipeline,
      k: this.state.k,
    };
    const token = ++this.requestToken;
    this.state.loading = true;
    this.state.error = null;
    this.onChange(this.state);
    try {
      const response = await searchRequest(this.baseUrl, params, this.fetchFn);
      if (token !== this.requestToken) return; // superseded by a newer submit
      const echo = response.query;
      if (
        echo.q !== params.q ||
        echo.modality !== params.modality ||
        echo.pipeline !== params.pipeline ||
        echo.k !== params.k
      ) {
        return; // a response for different parameters is never rendered
      }
      this.state.results = response.results;
      this.state.resultParams = echo;
      this.state.warning = response.warning ?? null;
      this.state.error = null;
      this.state.retriable = false;
    } catch (err) {
      if (token !== this.requestToken) return;
      const apiError = err instanceof ApiError ? err : new ApiError(String(err), 0);
      this.state.error = apiError.message;
      this.state.retriable = apiError.retriable;
    } finally {
      if (token === this.requestToken) {
        this.state.loading = false;
        this.onChange(this.state);
      }
    }
  }
}

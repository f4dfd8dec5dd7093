/** Thin client for the search service. One in-flight search at a time:
 * issuing a new one aborts its predecessor. */

import { serializeState, type SearchState } from "./state.js";
import type { ArticleRecord, HealthResponse, SearchResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The slice of fetch the client needs; tests substitute their own. */
export type FetchLike = (url: string, init?: { signal?: AbortSignal }) => Promise<ResponseLike>;

export interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

function trimBase(base: string): string {
  return base.endsWith("/") ? base.slice(0, -1) : base;
}

export function searchUrl(base: string, state: SearchState): string {
  return `${trimBase(base)}/api/search?${serializeState(state).toString()}`;
}

async function readError(response: ResponseLike): Promise<string> {
  try {
    const body = (await response.json()) as { error?: unknown };
    if (typeof body.error === "string") {
      return body.error;
    }
  } catch {
    // fall through to the generic message
  }
  return `HTTP ${response.status}`;
}

export class SearchClient {
  private controller: AbortController | null = null;

  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (url, init) => globalThis.fetch(url, init),
  ) {}

  /** Run a search, aborting any search still in flight. */
  async search(state: SearchState): Promise<SearchResponse> {
    this.cancel();
    const controller = new AbortController();
    this.controller = controller;
    const response = await this.fetchFn(searchUrl(this.base, state), { signal: controller.signal });
    if (!response.ok) {
      throw new ApiError(response.status, await readError(response));
    }
    return (await response.json()) as SearchResponse;
  }

  /** Abort the in-flight search, if any. */
  cancel(): void {
    if (this.controller !== null) {
      this.controller.abort();
      this.controller = null;
    }
  }

  async article(articleId: string): Promise<ArticleRecord> {
    const url = `${trimBase(this.base)}/api/article/${encodeURIComponent(articleId)}`;
    const response = await this.fetchFn(url);
    if (!response.ok) {
      throw new ApiError(response.status, await readError(response));
    }
    return (await response.json()) as ArticleRecord;
  }

  async health(): Promise<HealthResponse> {
    const response = await this.fetchFn(`${trimBase(this.base)}/healthz`);
    if (!response.ok) {
      throw new ApiError(response.status, await readError(response));
    }
    return (await response.json()) as HealthResponse;
  }
}

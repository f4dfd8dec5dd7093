/** Shared fixtures: canned API bodies and a fetch fake that honors
 * AbortSignal, so abort semantics are observable in tests. */

import type { FetchLike, ResponseLike } from "../src/api.js";
import type { Facets, SearchResponse, SearchResult, Timing } from "../src/types.js";

export function jsonResponse(body: unknown, status = 200): ResponseLike {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: () => Promise.resolve(body),
  };
}

export function makeResult(overrides: Partial<SearchResult> = {}): SearchResult {
  return {
    article_id: "a1",
    title: "Spike protein binding",
    year: 2020,
    authors: ["Liu, A."],
    journal: "J Virol",
    source: "pmc",
    abstract: "We characterize spike protein binding affinity.",
    score: 0.91,
    paragraph: "Binding assays show the spike protein attaches to the ACE2 receptor.",
    paragraph_index: 0,
    highlight: { sentence_index: 0, start_char: 0, end_char: 69 },
    ...overrides,
  };
}

export const EMPTY_FACETS: Facets = { year: [], authors: [], journal: [], source: [] };

export const ZERO_TIMING: Timing = {
  retrieval_ms: 0.5,
  rerank_ms: 1.0,
  highlight_ms: 0.5,
  total_ms: 2.0,
};

export function makeResponse(
  results: SearchResult[],
  overrides: Partial<SearchResponse> = {},
): SearchResponse {
  return {
    results,
    facets: EMPTY_FACETS,
    timing: ZERO_TIMING,
    degraded: false,
    ...overrides,
  };
}

export function abortError(): Error {
  const error = new Error("The operation was aborted.");
  error.name = "AbortError";
  return error;
}

export interface RecordedCall {
  url: string;
  signal: AbortSignal | undefined;
}

export interface Deferred<T> {
  promise: Promise<T>;
  resolve(value: T): void;
  reject(reason: unknown): void;
}

export function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (reason: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** A fetch double routed by URL. The returned promise rejects with an
 * AbortError as soon as the caller's signal fires, like real fetch. */
export function fakeFetch(
  router: (url: string, callIndex: number) => Promise<ResponseLike> | ResponseLike,
): { fn: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fn: FetchLike = (url, init) => {
    const signal = init?.signal;
    const index = calls.length;
    calls.push({ url, signal });
    if (signal?.aborted) {
      return Promise.reject(abortError());
    }
    const result = Promise.resolve(router(url, index));
    if (signal === undefined) {
      return result;
    }
    return new Promise<ResponseLike>((resolve, reject) => {
      const onAbort = (): void => reject(abortError());
      signal.addEventListener("abort", onAbort);
      result.then(
        (value) => {
          signal.removeEventListener("abort", onAbort);
          if (!signal.aborted) {
            resolve(value);
          }
        },
        (reason) => {
          signal.removeEventListener("abort", onAbort);
          reject(reason);
        },
      );
    });
  };
  return { fn, calls };
}

export function searchCalls(calls: RecordedCall[]): RecordedCall[] {
  return calls.filter((call) => call.url.includes("/api/search"));
}

export function paramsOf(call: RecordedCall): URLSearchParams {
  return new URL(call.url, "http://fixture.test").searchParams;
}

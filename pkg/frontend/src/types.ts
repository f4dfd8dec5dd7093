/** Wire types for the search service's JSON API. */

export interface HighlightRange {
  sentence_index: number;
  start_char: number;
  end_char: number;
}

export interface SearchResult {
  article_id: string;
  title: string;
  year: number | null;
  authors: string[];
  journal: string | null;
  source: string;
  abstract: string;
  score: number;
  paragraph: string | null;
  paragraph_index: number | null;
  highlight: HighlightRange | null;
}

/** Facet buckets arrive ranked: [value, count] pairs, best first. */
export type FacetEntry = [string, number];

export interface Facets {
  year: FacetEntry[];
  authors: FacetEntry[];
  journal: FacetEntry[];
  source: FacetEntry[];
}

export interface Timing {
  retrieval_ms: number;
  rerank_ms: number;
  highlight_ms: number;
  total_ms: number;
}

export interface SearchResponse {
  results: SearchResult[];
  facets: Facets;
  timing: Timing;
  degraded: boolean;
}

export interface ArticleRecord {
  article_id: string;
  title: string;
  abstract: string;
  paragraphs: string[];
  year: number | null;
  authors: string[];
  journal: string | null;
  source: string;
}

export interface HealthResponse {
  status: string;
  n_units: number;
  scheme: string;
  scorer: string;
  uptime_s: number;
}

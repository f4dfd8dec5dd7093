/** Search state and its URL representation.
 *
 * The URL parameter vocabulary is exactly the service's /api/search
 * vocabulary, so the serialized state doubles as the issued query string:
 * what the address bar shows is what the API receives.
 */

export interface SearchState {
  readonly query: string;
  readonly yearFrom: number | null;
  readonly yearTo: number | null;
  readonly journals: readonly string[];
  readonly sources: readonly string[];
  readonly authors: readonly string[];
  readonly rerank: boolean;
}

export type ListField = "journals" | "sources" | "authors";

/** URL/API parameter name for each list-valued filter field. */
export const LIST_PARAM: Record<ListField, string> = {
  journals: "journal",
  sources: "source",
  authors: "author",
};

export const EMPTY_STATE: SearchState = {
  query: "",
  yearFrom: null,
  yearTo: null,
  journals: [],
  sources: [],
  authors: [],
  rerank: true,
};

function normalizeList(values: Iterable<string>): string[] {
  return [...new Set([...values].filter((value) => value !== ""))].sort();
}

function intOrNull(params: URLSearchParams, name: string): number | null {
  const raw = params.get(name);
  if (raw === null) {
    return null;
  }
  const parsed = Number.parseInt(raw, 10);
  return Number.isNaN(parsed) ? null : parsed;
}

/** Parse a location.search string (leading "?" optional). Unknown
 * parameters are ignored, so configuration like `api=` can ride along. */
export function parseState(search: string): SearchState {
  const params = new URLSearchParams(search);
  return {
    query: params.get("q") ?? "",
    yearFrom: intOrNull(params, "year_from"),
    yearTo: intOrNull(params, "year_to"),
    journals: normalizeList(params.getAll("journal")),
    sources: normalizeList(params.getAll("source")),
    authors: normalizeList(params.getAll("author")),
    rerank: params.get("rerank") !== "false",
  };
}

/** Serialize to URL/API parameters. Defaults are omitted (empty query,
 * rerank=true), so an untouched state serializes to an empty string. */
export function serializeState(state: SearchState): URLSearchParams {
  const params = new URLSearchParams();
  if (state.query !== "") {
    params.set("q", state.query);
  }
  if (state.yearFrom !== null) {
    params.set("year_from", String(state.yearFrom));
  }
  if (state.yearTo !== null) {
    params.set("year_to", String(state.yearTo));
  }
  for (const journal of state.journals) {
    params.append("journal", journal);
  }
  for (const source of state.sources) {
    params.append("source", source);
  }
  for (const author of state.authors) {
    params.append("author", author);
  }
  if (!state.rerank) {
    params.set("rerank", "false");
  }
  return params;
}

export function statesEqual(a: SearchState, b: SearchState): boolean {
  return serializeState(a).toString() === serializeState(b).toString();
}

export function withQuery(state: SearchState, query: string): SearchState {
  return { ...state, query };
}

/** Toggle a value inside a list-valued filter (journals/sources/authors).
 * Values within one field are OR-ed by the service, so multi-select is
 * the natural gesture. */
export function toggleListValue(state: SearchState, field: ListField, value: string): SearchState {
  const current = state[field];
  const next = current.includes(value)
    ? current.filter((existing) => existing !== value)
    : normalizeList([...current, value]);
  return { ...state, [field]: next };
}

/** Toggle a year facet value. The API models year filtering as a range,
 * so the year facet is single-select: picking a year pins the range to
 * it, picking it again clears the range. */
export function toggleYear(state: SearchState, year: number): SearchState {
  if (state.yearFrom === year && state.yearTo === year) {
    return { ...state, yearFrom: null, yearTo: null };
  }
  return { ...state, yearFrom: year, yearTo: year };
}

export function clearFilters(state: SearchState): SearchState {
  return {
    ...state,
    yearFrom: null,
    yearTo: null,
    journals: [],
    sources: [],
    authors: [],
  };
}

export function hasActiveFilters(state: SearchState): boolean {
  return (
    state.yearFrom !== null ||
    state.yearTo !== null ||
    state.journals.length > 0 ||
    state.sources.length > 0 ||
    state.authors.length > 0
  );
}

export interface FilterChip {
  readonly kind: "year" | ListField;
  readonly label: string;
  /** For list chips, the value to remove; unused for the year chip. */
  readonly value: string;
}

export function activeChips(state: SearchState): FilterChip[] {
  const chips: FilterChip[] = [];
  if (state.yearFrom !== null || state.yearTo !== null) {
    const from = state.yearFrom === null ? "…" : String(state.yearFrom);
    const to = state.yearTo === null ? "…" : String(state.yearTo);
    chips.push({ kind: "year", label: from === to ? from : `${from}–${to}`, value: "" });
  }
  for (const journal of state.journals) {
    chips.push({ kind: "journals", label: journal, value: journal });
  }
  for (const source of state.sources) {
    chips.push({ kind: "sources", label: source, value: source });
  }
  for (const author of state.authors) {
    chips.push({ kind: "authors", label: author, value: author });
  }
  return chips;
}

export function removeChip(state: SearchState, chip: FilterChip): SearchState {
  if (chip.kind === "year") {
    return { ...state, yearFrom: null, yearTo: null };
  }
  return {
    ...state,
    [chip.kind]: state[chip.kind].filter((value) => value !== chip.value),
  };
}

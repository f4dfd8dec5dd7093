/** Pure DOM builders. Every function returns a detached element computed
 * from its arguments alone; the app owns placement and event wiring via
 * the hook callbacks. Results render in response order — the client
 * never re-ranks. */

import {
  activeChips,
  hasActiveFilters,
  type FilterChip,
  type ListField,
  type SearchState,
} from "./state.js";
import type { ArticleRecord, FacetEntry, Facets, HighlightRange, SearchResult } from "./types.js";

/** The service's bucket for absent year/journal/source values. It cannot
 * be toggled — the API has no "value is missing" filter — so it renders
 * as a count-only entry. */
export const UNKNOWN_BUCKET = "unknown";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

/** Render a paragraph with exactly [start_char, end_char) wrapped in a
 * <mark>; the concatenated text always equals the input paragraph. */
export function renderHighlightedParagraph(
  paragraph: string,
  highlight: HighlightRange | null,
): HTMLElement {
  const container = el("p", "paragraph");
  if (highlight === null) {
    container.textContent = paragraph;
    return container;
  }
  const start = Math.max(0, Math.min(highlight.start_char, paragraph.length));
  const end = Math.max(start, Math.min(highlight.end_char, paragraph.length));
  container.append(document.createTextNode(paragraph.slice(0, start)));
  const mark = el("mark", "highlight", paragraph.slice(start, end));
  container.append(mark);
  container.append(document.createTextNode(paragraph.slice(end)));
  return container;
}

function metadataLine(result: SearchResult): HTMLElement {
  const parts: string[] = [];
  if (result.year !== null) {
    parts.push(String(result.year));
  }
  if (result.journal !== null && result.journal !== "") {
    parts.push(result.journal);
  }
  if (result.source !== "") {
    parts.push(result.source);
  }
  if (result.authors.length > 0) {
    parts.push(result.authors.join("; "));
  }
  return el("div", "result-meta", parts.join(" · "));
}

export interface CardHooks {
  onToggleExpand(articleId: string): void;
  onToggleRecord(articleId: string): void;
}

export interface CardView {
  expanded: boolean;
  record: ArticleRecord | null;
}

/** One result card: title, metadata, abstract; a reveal control for the
 * matched paragraph when there is one (expanding is pure display — the
 * hook must not re-query); a full-record control backed by the article
 * endpoint. */
export function renderResultCard(
  result: SearchResult,
  view: CardView,
  hooks: CardHooks,
): HTMLElement {
  const card = el("article", "result-card");
  card.dataset["articleId"] = result.article_id;

  const title = el("h3", "result-title", result.title === "" ? result.article_id : result.title);
  card.append(title);
  card.append(metadataLine(result));
  card.append(el("div", "result-score", result.score.toFixed(4)));
  if (result.abstract !== "") {
    card.append(el("p", "result-abstract", result.abstract));
  }

  if (result.paragraph !== null) {
    const paragraph = result.paragraph;
    const reveal = el(
      "button",
      "reveal-paragraph",
      view.expanded ? "Hide matched paragraph" : "Show matched paragraph",
    );
    reveal.type = "button";
    reveal.addEventListener("click", () => hooks.onToggleExpand(result.article_id));
    card.append(reveal);
    if (view.expanded) {
      card.append(renderHighlightedParagraph(paragraph, result.highlight));
    }
  }

  const record = el(
    "button",
    "show-record",
    view.record === null ? "Full record" : "Hide full record",
  );
  record.type = "button";
  record.addEventListener("click", () => hooks.onToggleRecord(result.article_id));
  card.append(record);
  if (view.record !== null) {
    card.append(renderArticleRecord(view.record));
  }

  return card;
}

export function renderArticleRecord(record: ArticleRecord): HTMLElement {
  const section = el("section", "article-record");
  if (record.abstract !== "") {
    section.append(el("p", "record-abstract", record.abstract));
  }
  if (record.paragraphs.length === 0) {
    section.append(el("p", "record-empty", "No stored full text."));
  }
  for (const paragraph of record.paragraphs) {
    section.append(el("p", "record-paragraph", paragraph));
  }
  return section;
}

export interface FacetHooks {
  onToggleYear(year: number): void;
  onToggleList(field: ListField, value: string): void;
}

function facetGroup(
  name: string,
  entries: FacetEntry[],
  isActive: (value: string) => boolean,
  onToggle: ((value: string) => void) | null,
): HTMLElement {
  const group = el("section", "facet-group");
  group.dataset["facet"] = name;
  group.append(el("h4", "facet-name", name));
  const list = el("ul", "facet-values");
  for (const [value, count] of entries) {
    const item = el("li");
    const button = el("button", "facet-value", `${value} (${count})`);
    button.type = "button";
    button.dataset["value"] = value;
    if (value === UNKNOWN_BUCKET || onToggle === null) {
      button.disabled = true;
    } else {
      if (isActive(value)) {
        button.classList.add("active");
      }
      button.addEventListener("click", () => onToggle(value));
    }
    item.append(button);
    list.append(item);
  }
  group.append(list);
  return group;
}

/** The four facet groups with counts; toggling re-queries via the hooks. */
export function renderFacets(facets: Facets, state: SearchState, hooks: FacetHooks): HTMLElement {
  const container = el("div", "facets");
  container.append(
    facetGroup(
      "year",
      facets.year,
      (value) => state.yearFrom !== null && String(state.yearFrom) === value && state.yearFrom === state.yearTo,
      (value) => hooks.onToggleYear(Number.parseInt(value, 10)),
    ),
    facetGroup(
      "authors",
      facets.authors,
      (value) => state.authors.includes(value),
      (value) => hooks.onToggleList("authors", value),
    ),
    facetGroup(
      "journal",
      facets.journal,
      (value) => state.journals.includes(value),
      (value) => hooks.onToggleList("journals", value),
    ),
    facetGroup(
      "source",
      facets.source,
      (value) => state.sources.includes(value),
      (value) => hooks.onToggleList("sources", value),
    ),
  );
  return container;
}

export interface ChipHooks {
  onRemove(chip: FilterChip): void;
  onClear(): void;
}

/** Active filters as removable chips plus a clear-all control. */
export function renderChips(state: SearchState, hooks: ChipHooks): HTMLElement {
  const container = el("div", "chips");
  for (const chip of activeChips(state)) {
    const button = el("button", "chip", `${chipPrefix(chip)}${chip.label} ✕`);
    button.type = "button";
    button.dataset["kind"] = chip.kind;
    button.dataset["value"] = chip.value;
    button.addEventListener("click", () => hooks.onRemove(chip));
    container.append(button);
  }
  if (hasActiveFilters(state)) {
    const clear = el("button", "chip-clear", "Clear filters");
    clear.type = "button";
    clear.addEventListener("click", () => hooks.onClear());
    container.append(clear);
  }
  return container;
}

function chipPrefix(chip: FilterChip): string {
  switch (chip.kind) {
    case "year":
      return "year: ";
    case "journals":
      return "journal: ";
    case "sources":
      return "source: ";
    case "authors":
      return "author: ";
  }
}

export function renderDegradedBanner(): HTMLElement {
  return el(
    "div",
    "banner-degraded",
    "Degraded results: an external backend is unavailable, deterministic fallbacks are in use.",
  );
}

export function renderErrorState(message: string, onRetry: () => void): HTMLElement {
  const container = el("div", "error-state");
  container.append(el("p", "error-message", message));
  const retry = el("button", "retry", "Retry");
  retry.type = "button";
  retry.addEventListener("click", () => onRetry());
  container.append(retry);
  return container;
}

export function renderStatusLine(resultCount: number, totalMs: number): HTMLElement {
  const noun = resultCount === 1 ? "article" : "articles";
  return el("div", "status-line", `${resultCount} ${noun} · ${totalMs.toFixed(1)} ms`);
}

export function renderEmptyHint(hasQuery: boolean): HTMLElement {
  return el("p", "empty-hint", hasQuery ? "No matching articles." : "Type to search the corpus.");
}

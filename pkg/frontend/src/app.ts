/** Application shell: owns the state, the URL, and the DOM slots.
 *
 * Behavior contract:
 *  - typing debounces 300 ms into one search; filter gestures search
 *    immediately; a newer search aborts and supersedes an older one;
 *  - the address bar always reflects query + filters (shareable links),
 *    and loading a URL with parameters restores the same view;
 *  - revealing a result's paragraph is pure display and never re-queries;
 *  - results render strictly in response order.
 */

import { ApiError, type SearchClient } from "./api.js";
import { debounce, type Debounced } from "./debounce.js";
import {
  clearFilters,
  parseState,
  removeChip,
  serializeState,
  toggleListValue,
  toggleYear,
  withQuery,
  type FilterChip,
  type ListField,
  type SearchState,
} from "./state.js";
import {
  renderChips,
  renderDegradedBanner,
  renderEmptyHint,
  renderErrorState,
  renderFacets,
  renderResultCard,
  renderStatusLine,
} from "./render.js";
import type { ArticleRecord, SearchResponse } from "./types.js";

export interface AppOptions {
  debounceMs?: number;
}

export class App {
  private state: SearchState;
  private lastResponse: SearchResponse | null = null;
  private errorText: string | null = null;
  private readonly expanded = new Set<string>();
  private readonly records = new Map<string, ArticleRecord>();
  private seq = 0;
  private pending: Promise<void> = Promise.resolve();
  private readonly debouncedSearch: Debounced;

  private readonly input: HTMLInputElement;
  private readonly bannerSlot: HTMLElement;
  private readonly chipsSlot: HTMLElement;
  private readonly facetsSlot: HTMLElement;
  private readonly resultsSlot: HTMLElement;
  private readonly footer: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: SearchClient,
    options: AppOptions = {},
  ) {
    this.state = parseState(window.location.search);
    this.debouncedSearch = debounce(() => this.runSearch(), options.debounceMs ?? 300);

    this.root.textContent = "";
    const header = document.createElement("header");
    this.input = document.createElement("input");
    this.input.type = "search";
    this.input.className = "search-input";
    this.input.placeholder = "Search articles…";
    this.input.addEventListener("input", () => {
      this.state = withQuery(this.state, this.input.value);
      this.debouncedSearch.call();
    });
    header.append(this.input);

    this.bannerSlot = document.createElement("div");
    this.bannerSlot.className = "banner-slot";
    this.chipsSlot = document.createElement("div");
    this.chipsSlot.className = "chips-slot";

    const main = document.createElement("main");
    this.facetsSlot = document.createElement("aside");
    this.facetsSlot.className = "facets-slot";
    this.resultsSlot = document.createElement("section");
    this.resultsSlot.className = "results-slot";
    main.append(this.facetsSlot, this.resultsSlot);

    this.footer = document.createElement("footer");
    this.footer.className = "health-footer";

    this.root.append(header, this.bannerSlot, this.chipsSlot, main, this.footer);

    window.addEventListener("popstate", () => {
      this.state = parseState(window.location.search);
      this.syncInput();
      this.runSearch({ push: false });
    });
  }

  /** Restore state from the URL, render, and kick off the initial search. */
  start(): void {
    this.syncInput();
    this.renderAll();
    if (this.state.query.trim() !== "") {
      this.runSearch({ push: false });
    }
    this.loadHealth();
  }

  /** Resolves once every in-flight operation has settled (test hook). */
  whenIdle(): Promise<void> {
    return this.pending;
  }

  private track(task: Promise<void>): void {
    this.pending = this.pending.then(() => task);
  }

  private syncInput(): void {
    this.input.value = this.state.query;
  }

  private setState(next: SearchState): void {
    this.state = next;
    this.debouncedSearch.cancel();
    this.runSearch();
  }

  private runSearch(options: { push?: boolean } = {}): void {
    this.track(this.executeSearch(options.push !== false));
  }

  private async executeSearch(push: boolean): Promise<void> {
    if (push) {
      this.pushUrl();
    }
    const seq = ++this.seq;
    if (this.state.query.trim() === "") {
      this.client.cancel();
      this.lastResponse = null;
      this.errorText = null;
      this.expanded.clear();
      this.records.clear();
      this.renderAll();
      return;
    }
    this.root.classList.add("loading");
    try {
      const body = await this.client.search(this.state);
      if (seq !== this.seq) {
        return; // superseded while in flight
      }
      this.lastResponse = body;
      this.errorText = null;
      this.expanded.clear();
      this.records.clear();
      this.renderAll();
    } catch (error) {
      if (seq !== this.seq) {
        return; // aborted by a newer search
      }
      this.errorText = error instanceof ApiError ? error.message : "The search service is unreachable.";
      this.renderAll();
    } finally {
      if (seq === this.seq) {
        this.root.classList.remove("loading");
      }
    }
  }

  private pushUrl(): void {
    const params = serializeState(this.state);
    const api = new URLSearchParams(window.location.search).get("api");
    if (api !== null) {
      params.set("api", api);
    }
    const query = params.toString();
    window.history.pushState(null, "", query === "" ? window.location.pathname : `?${query}`);
  }

  private loadHealth(): void {
    this.track(
      this.client
        .health()
        .then((health) => {
          this.footer.textContent = `serving ${health.n_units} units · ${health.scheme} scheme · ${health.scorer} scorer`;
        })
        .catch(() => {
          this.footer.textContent = "service unreachable";
        }),
    );
  }

  private toggleExpand(articleId: string): void {
    if (this.expanded.has(articleId)) {
      this.expanded.delete(articleId);
    } else {
      this.expanded.add(articleId);
    }
    this.renderResults(); // display-only: no request is issued
  }

  private toggleRecord(articleId: string): void {
    if (this.records.has(articleId)) {
      this.records.delete(articleId);
      this.renderResults();
      return;
    }
    this.track(
      this.client
        .article(articleId)
        .then((record) => {
          this.records.set(articleId, record);
          this.renderResults();
        })
        .catch(() => {
          // the card simply stays collapsed on failure
        }),
    );
  }

  private renderAll(): void {
    this.renderBanner();
    this.renderChipRow();
    this.renderFacetColumn();
    this.renderResults();
  }

  private renderBanner(): void {
    this.bannerSlot.textContent = "";
    if (this.lastResponse !== null && this.lastResponse.degraded) {
      this.bannerSlot.append(renderDegradedBanner());
    }
  }

  private renderChipRow(): void {
    this.chipsSlot.textContent = "";
    this.chipsSlot.append(
      renderChips(this.state, {
        onRemove: (chip: FilterChip) => this.setState(removeChip(this.state, chip)),
        onClear: () => this.setState(clearFilters(this.state)),
      }),
    );
  }

  private renderFacetColumn(): void {
    this.facetsSlot.textContent = "";
    if (this.lastResponse === null) {
      return;
    }
    this.facetsSlot.append(
      renderFacets(this.lastResponse.facets, this.state, {
        onToggleYear: (year: number) => this.setState(toggleYear(this.state, year)),
        onToggleList: (field: ListField, value: string) =>
          this.setState(toggleListValue(this.state, field, value)),
      }),
    );
  }

  private renderResults(): void {
    this.resultsSlot.textContent = "";
    if (this.errorText !== null) {
      this.resultsSlot.append(renderErrorState(this.errorText, () => this.runSearch()));
      return;
    }
    if (this.lastResponse === null) {
      this.resultsSlot.append(renderEmptyHint(this.state.query.trim() !== ""));
      return;
    }
    const { results, timing } = this.lastResponse;
    this.resultsSlot.append(renderStatusLine(results.length, timing.total_ms));
    if (results.length === 0) {
      this.resultsSlot.append(renderEmptyHint(true));
      return;
    }
    for (const result of results) {
      this.resultsSlot.append(
        renderResultCard(
          result,
          {
            expanded: this.expanded.has(result.article_id),
            record: this.records.get(result.article_id) ?? null,
          },
          {
            onToggleExpand: (articleId: string) => this.toggleExpand(articleId),
            onToggleRecord: (articleId: string) => this.toggleRecord(articleId),
          },
        ),
      );
    }
  }
}

// Scene queue: the backend already orders scenes worst first, this panel
// just pages through them. j/k and the arrow keys move the selection.

import { Client, ListFilters, SceneListing, SceneSummary } from "./api.js";

export class SceneBrowser {
  private listing: SceneListing | null = null;
  private selected = -1;
  private list: HTMLElement;
  private summary: HTMLElement;
  private categorySelect: HTMLSelectElement;
  private reviewedSelect: HTMLSelectElement;

  onSelect: ((scene: SceneSummary) => void) | null = null;

  constructor(
    root: HTMLElement,
    private client: Client
  ) {
    this.list = root.querySelector(".scene-list")!;
    this.summary = root.querySelector(".scene-summary")!;
    this.categorySelect = root.querySelector(".filter-category")!;
    this.reviewedSelect = root.querySelector(".filter-reviewed")!;
    this.categorySelect.onchange = () => void this.refresh();
    this.reviewedSelect.onchange = () => void this.refresh();
    (root.querySelector(".refresh") as HTMLButtonElement).onclick = () => void this.refresh();

    document.addEventListener("keydown", (ev) => {
      const tag = (ev.target as HTMLElement).tagName;
      if (tag === "INPUT" || tag === "TEXTAREA" || tag === "SELECT") return;
      if (ev.key === "j" || ev.key === "ArrowDown") {
        ev.preventDefault();
        this.move(1);
      } else if (ev.key === "k" || ev.key === "ArrowUp") {
        ev.preventDefault();
        this.move(-1);
      }
    });
  }

  private filters(): ListFilters {
    const filters: ListFilters = { limit: 200 };
    const cat = this.categorySelect.value;
    if (cat === "red" || cat === "yellow") filters.category = cat;
    const rev = this.reviewedSelect.value;
    if (rev === "yes") filters.reviewed = true;
    if (rev === "no") filters.reviewed = false;
    return filters;
  }

  async refresh(keepSelection = false): Promise<void> {
    const previous =
      keepSelection && this.listing && this.selected >= 0
        ? this.listing.scenes[this.selected].frameId
        : null;
    this.listing = await this.client.listScenes(this.filters());
    const scenes = this.listing.scenes;
    const index = previous === null ? -1 : scenes.findIndex((s) => s.frameId === previous);
    this.render();
    if (scenes.length === 0) return;
    this.select(index >= 0 ? index : 0, index < 0 || previous === null);
  }

  private move(step: number): void {
    if (!this.listing || this.listing.scenes.length === 0) return;
    const next = Math.min(
      Math.max(this.selected + step, 0),
      this.listing.scenes.length - 1
    );
    if (next !== this.selected) this.select(next, true);
  }

  private select(index: number, notify: boolean): void {
    this.selected = index;
    const rows = this.list.querySelectorAll(".scene-row");
    rows.forEach((row, i) => row.classList.toggle("selected", i === index));
    rows[index]?.scrollIntoView({ block: "nearest" });
    if (notify && this.listing) this.onSelect?.(this.listing.scenes[index]);
  }

  private render(): void {
    const listing = this.listing!;
    this.summary.textContent = `${listing.scenes.length} of ${listing.total} scenes, sequence ${listing.sequence}`;
    this.list.textContent = "";
    listing.scenes.forEach((scene, index) => {
      const row = document.createElement("div");
      row.className = "scene-row";
      const id = document.createElement("span");
      id.className = "scene-id";
      id.textContent = scene.frameId;
      const badges = document.createElement("span");
      badges.className = "scene-badges";
      badges.innerHTML =
        `<span class="badge red">${scene.red}</span>` +
        `<span class="badge yellow">${scene.yellow}</span>` +
        `<span class="badge clusters">${scene.nClusters}c</span>` +
        (scene.reviewed ? `<span class="badge reviewed">✓</span>` : "");
      row.append(id, badges);
      row.onclick = () => this.select(index, true);
      this.list.appendChild(row);
    });
  }
}

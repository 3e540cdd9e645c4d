import type { Card } from "./types.js";

/** Title plus the card's original attribute values, named per column. */
export function cardBody(card: Card): HTMLElement {
  const body = document.createElement("span");
  body.className = "card-body";

  const title = document.createElement("span");
  title.className = "card-title";
  title.textContent = card.label ?? `point ${card.id}`;
  body.appendChild(title);

  const values = document.createElement("span");
  values.className = "card-values";
  values.textContent = Object.entries(card.values)
    .map(([name, value]) => `${name} ${formatValue(value)}`)
    .join(" · ");
  body.appendChild(values);

  return body;
}

function formatValue(value: number): string {
  return Number.isInteger(value) ? String(value) : String(Number(value.toPrecision(6)));
}

/**
 * Sortable card list for sort rounds.
 *
 * Renders the cards in exactly the order the service sent them and never
 * rearranges except through a user gesture: dragging a card or its up/down
 * buttons. `order()` reads the arrangement back out of the DOM, so the
 * submitted order is always what is on screen.
 */
export class SortBoard {
  private readonly list: HTMLOListElement;
  private dragged: HTMLLIElement | null = null;

  constructor(
    host: HTMLElement,
    cards: readonly Card[],
    private readonly onReorder?: () => void,
  ) {
    this.list = document.createElement("ol");
    this.list.className = "sortboard";
    for (const card of cards) {
      this.list.appendChild(this.renderItem(card));
    }
    this.list.addEventListener("dragover", (ev) => this.handleDragOver(ev));
    host.appendChild(this.list);
  }

  /** Card ids in on-screen order, best first. */
  order(): number[] {
    return this.items().map((li) => Number(li.dataset.id));
  }

  /** Move a card one slot up (delta -1) or down (delta 1). */
  move(id: number, delta: -1 | 1): void {
    const items = this.items();
    const idx = items.findIndex((li) => Number(li.dataset.id) === id);
    const target = idx + delta;
    if (idx < 0 || target < 0 || target >= items.length) {
      return;
    }
    const item = items[idx] as HTMLLIElement;
    const ref = delta < 0 ? items[target] ?? null : (items[target] as HTMLLIElement).nextSibling;
    this.list.insertBefore(item, ref);
    this.onReorder?.();
  }

  private items(): HTMLLIElement[] {
    return Array.from(this.list.children) as HTMLLIElement[];
  }

  private renderItem(card: Card): HTMLLIElement {
    const li = document.createElement("li");
    li.className = "card";
    li.draggable = true;
    li.dataset.id = String(card.id);

    const handle = document.createElement("span");
    handle.className = "card-handle";
    handle.textContent = "::";
    li.appendChild(handle);

    li.appendChild(cardBody(card));

    const nudge = document.createElement("span");
    nudge.className = "card-nudge";
    nudge.appendChild(this.nudgeButton(card.id, -1, "▲"));
    nudge.appendChild(this.nudgeButton(card.id, 1, "▼"));
    li.appendChild(nudge);

    li.addEventListener("dragstart", () => {
      this.dragged = li;
      li.classList.add("dragging");
    });
    li.addEventListener("dragend", () => {
      li.classList.remove("dragging");
      this.dragged = null;
      this.onReorder?.();
    });
    return li;
  }

  private nudgeButton(id: number, delta: -1 | 1, glyph: string): HTMLButtonElement {
    const btn = document.createElement("button");
    btn.type = "button";
    btn.textContent = glyph;
    btn.title = delta < 0 ? "move up" : "move down";
    btn.addEventListener("click", () => this.move(id, delta));
    return btn;
  }

  private handleDragOver(ev: DragEvent): void {
    if (!this.dragged) {
      return;
    }
    ev.preventDefault();
    const after = this.afterElement(ev.clientY);
    if (after !== this.dragged) {
      this.list.insertBefore(this.dragged, after);
    }
  }

  /** First non-dragged card whose midpoint is below the pointer; null appends. */
  private afterElement(y: number): HTMLLIElement | null {
    for (const li of this.items()) {
      if (li === this.dragged) {
        continue;
      }
      const box = li.getBoundingClientRect();
      if (y < box.top + box.height / 2) {
        return li;
      }
    }
    return null;
  }
}

/** Single-choice card list for choose rounds. */
export class FavoriteBoard {
  private choice: number | null = null;

  constructor(
    host: HTMLElement,
    cards: readonly Card[],
    private readonly onChange?: () => void,
  ) {
    const list = document.createElement("ul");
    list.className = "favorites";
    for (const card of cards) {
      list.appendChild(this.renderItem(card));
    }
    host.appendChild(list);
  }

  selected(): number | null {
    return this.choice;
  }

  private renderItem(card: Card): HTMLLIElement {
    const li = document.createElement("li");
    li.className = "card";
    li.dataset.id = String(card.id);

    const label = document.createElement("label");
    const input = document.createElement("input");
    input.type = "radio";
    input.name = "favorite";
    input.value = String(card.id);
    input.addEventListener("change", () => {
      this.choice = card.id;
      this.onChange?.();
    });
    label.appendChild(input);
    label.appendChild(cardBody(card));
    li.appendChild(label);
    return li;
  }
}

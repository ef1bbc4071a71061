import { EventEmitter } from "events";
import type { Item, ItemId } from "./types";

// In-memory item store with change notifications.
export class Store extends EventEmitter {
  private items = new Map<ItemId, Item>();

  constructor(private readonly name: string) {
    super();
  }

  get size(): number {
    return this.items.size;
  }

  /** Inserts or replaces an item and emits "change". */
  put(item: Item): void {
    this.items.set(item.id, item);
    this.emit("change", item.id);
  }

  get(id: ItemId): Item | undefined {
    return this.items.get(id);
  }

  async load(fetcher: (name: string) => Promise<Item[]>): Promise<number> {
    const batch = await fetcher(this.name);
    batch.forEach((i) => this.put(i)); // arrow callbacks are not functions here
    return batch.length;
  }
}

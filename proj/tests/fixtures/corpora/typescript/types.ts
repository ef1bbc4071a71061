/*
 * Shared domain types.
 */
export type ItemId = string;

export interface Item {
  id: ItemId;
  title: string;
  tags: string[];
  price?: number; // optional, in cents
}

export function isItem(x: unknown): x is Item {
  return typeof x === "object" && x !== null && "id" in x && "title" in x;
}

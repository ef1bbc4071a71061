import * as path from "node:path";
import { Item } from "./types";
import {
  readFileSync,
  writeFileSync,
} from "fs";

const CURRENCY = "EUR";

// Formats cents as a decimal amount, e.g. 1999 -> "19.99 EUR".
export function money(cents: number): string {
  const whole = Math.floor(cents / 100);
  const frac = String(cents % 100).padStart(2, "0");
  return `${whole}.${frac} ${CURRENCY}`;
}

export function describe(item: Item): string {
  const price = item.price === undefined ? "n/a" : money(item.price);
  return `${item.title} (${price})`;
}

export const shout = (s: string): string => s.toUpperCase();

function* chunks<T>(xs: T[], size: number): Generator<T[]> {
  for (let i = 0; i < xs.length; i += size) yield xs.slice(i, i + size);
}

export async function exportAll(items: Item[], file: string): Promise<void> {
  /* one line per item, in batches */
  const lines: string[] = [];
  for (const batch of chunks(items, 50)) {
    lines.push(...batch.map(describe));
  }
  writeFileSync(path.resolve(file), lines.join("\n"));
  void readFileSync;
}

import axios from "axios";
import type { Config } from './config';
import * as path from "node:path";

// Fetch a resource.
export async function get<T>(url: string): Promise<T> {
  const r = await axios.get(url);
  return r.data as T;
}

interface Opts { retries: number }

export class Client {
  /* base url */
  constructor(private base: string) {}
  async post(body: unknown): Promise<void> {
    await axios.post(this.base, body);
  }
}

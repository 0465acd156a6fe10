/** Minimal key-value persistence so queued judgments survive reloads. */
export interface KeyValueStore {
  get(key: string): string | null;
  set(key: string, value: string): void;
  remove(key: string): void;
}

export function memoryStore(): KeyValueStore {
  const table = new Map<string, string>();
  return {
    get: (key) => table.get(key) ?? null,
    set: (key, value) => void table.set(key, value),
    remove: (key) => void table.delete(key),
  };
}

/** localStorage when available, otherwise an in-memory fallback. */
export function browserStore(): KeyValueStore {
  try {
    const probe = "__annotation_probe__";
    window.localStorage.setItem(probe, "1");
    window.localStorage.removeItem(probe);
  } catch {
    return memoryStore();
  }
  return {
    get: (key) => window.localStorage.getItem(key),
    set: (key, value) => window.localStorage.setItem(key, value),
    remove: (key) => window.localStorage.removeItem(key),
  };
}

/**
 * Local persistence for labels that failed to send.
 *
 * A submission that cannot reach the server is parked here (localStorage in
 * the browser) and retried later; a page reload must not lose it.
 */

import type { LabelSubmission } from "./api.js";

const KEY = "judge-ui-outbox-v1";

/** Minimal slice of the Storage interface, so tests can pass a plain map. */
export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export function loadOutbox(store: KeyValueStore): LabelSubmission[] {
  const raw = store.getItem(KEY);
  if (!raw) return [];
  try {
    const parsed = JSON.parse(raw);
    return Array.isArray(parsed) ? (parsed as LabelSubmission[]) : [];
  } catch {
    // a corrupt entry must never brick the UI
    return [];
  }
}

function save(store: KeyValueStore, labels: LabelSubmission[]): void {
  store.setItem(KEY, JSON.stringify(labels));
}

/** Queue a label, replacing any older attempt for the same task+annotator. */
export function pushOutbox(store: KeyValueStore, label: LabelSubmission): void {
  const rest = loadOutbox(store).filter(
    (l) => !(l.task_id === label.task_id && l.annotator_id === label.annotator_id),
  );
  save(store, [...rest, label]);
}

/**
 * Try to send every queued label. Successes leave the queue; failures stay
 * for the next flush. Returns how many were delivered.
 */
export async function flushOutbox(
  store: KeyValueStore,
  send: (label: LabelSubmission) => Promise<void>,
): Promise<number> {
  const pending = loadOutbox(store);
  const kept: LabelSubmission[] = [];
  let sent = 0;
  for (const label of pending) {
    try {
      await send(label);
      sent += 1;
    } catch {
      kept.push(label);
    }
  }
  save(store, kept);
  return sent;
}

export function outboxSize(store: KeyValueStore): number {
  return loadOutbox(store).length;
}

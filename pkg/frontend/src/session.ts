import { ApiClient, NetworkError, SubmitResult } from "./api";
import type { KeyValueStore } from "./storage";
import type {
  FieldError,
  JudgmentSubmission,
  KnowledgeVerdict,
  PairwiseVerdict,
  SkillPayload,
  SkillVerdict,
  TaskKind,
  TaskView,
  Verdict,
} from "./types";
import { SKILL_NAMES } from "./types";

export type SubmitOutcome =
  | { state: "synced" }
  | { state: "queued"; unsynced: number }
  | { state: "rejected"; fieldErrors: FieldError[]; message: string }
  | { state: "invalid"; errors: string[] };

/**
 * Client-side session state: the current task plus a FIFO queue of judgments
 * that have not been acknowledged by the server yet. The queue persists in
 * the provided store, so a reload loses nothing that was submitted.
 */
export class AnnotationSession {
  private queue: JudgmentSubmission[] = [];
  current: TaskView | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly store: KeyValueStore,
    readonly annotatorId: string,
  ) {
    const saved = this.store.get(this.storageKey());
    if (saved) {
      try {
        this.queue = JSON.parse(saved) as JudgmentSubmission[];
      } catch {
        this.queue = [];
      }
    }
  }

  private storageKey(): string {
    return `annotation-queue:${this.annotatorId}`;
  }

  private persist(): void {
    if (this.queue.length === 0) {
      this.store.remove(this.storageKey());
    } else {
      this.store.set(this.storageKey(), JSON.stringify(this.queue));
    }
  }

  unsyncedCount(): number {
    return this.queue.length;
  }

  /** Validation mirroring the server rules, run before anything is queued. */
  validate(task: TaskView, verdict: Verdict): string[] {
    const errors: string[] = [];
    if (task.kind === "pairwise") {
      const choice = (verdict as PairwiseVerdict).choice;
      if (!["A", "B", "TIE"].includes(choice)) {
        errors.push("choose one of the two questions or tie");
      }
    } else if (task.kind === "skill") {
      const v = verdict as SkillVerdict;
      if (!Array.isArray(v.evidence_sentence_indices) || v.evidence_sentence_indices.length === 0) {
        errors.push("select at least one evidence sentence");
      } else {
        const count = (task.payload as SkillPayload).sentences.length;
        if (v.evidence_sentence_indices.some((i) => i < 0 || i >= count)) {
          errors.push("evidence sentence out of range");
        }
      }
      if (!SKILL_NAMES.includes(v.skill as (typeof SKILL_NAMES)[number])) {
        errors.push("choose exactly one skill");
      }
    } else {
      const v = verdict as KnowledgeVerdict;
      if (typeof v.makes_sense !== "boolean" || typeof v.relevant !== "boolean") {
        errors.push("answer both yes/no questions");
      }
    }
    return errors;
  }

  /** Push every queued judgment to the server in order; stop on network loss. */
  async drain(): Promise<SubmitResult | null> {
    let last: SubmitResult | null = null;
    while (this.queue.length > 0) {
      const head = this.queue[0];
      let result: SubmitResult;
      try {
        result = await this.api.submit(head);
      } catch (err) {
        if (err instanceof NetworkError) return last;
        throw err;
      }
      // acknowledged or permanently rejected judgments leave the queue
      this.queue.shift();
      this.persist();
      last = result;
      if (!result.ok) return result;
    }
    return last;
  }

  /** Validate, queue, and attempt to sync one judgment for the current task. */
  async submit(verdict: Verdict): Promise<SubmitOutcome> {
    if (!this.current) {
      return { state: "invalid", errors: ["no task loaded"] };
    }
    const errors = this.validate(this.current, verdict);
    if (errors.length > 0) {
      return { state: "invalid", errors };
    }
    this.queue.push({
      task_id: this.current.task_id,
      annotator_id: this.annotatorId,
      verdict,
    });
    this.persist();
    const result = await this.drain();
    if (this.queue.length > 0) {
      return { state: "queued", unsynced: this.queue.length };
    }
    if (result && !result.ok) {
      return {
        state: "rejected",
        fieldErrors: result.fieldErrors ?? [],
        message: result.message ?? "rejected",
      };
    }
    return { state: "synced" };
  }

  /** Fetch the next task (after syncing the queue); null means done. */
  async advance(kind?: TaskKind): Promise<TaskView | null> {
    try {
      await this.drain();
    } catch {
      // drain errors surface on the next explicit submit
    }
    this.current = await this.api.nextTask(this.annotatorId, kind);
    return this.current;
  }
}

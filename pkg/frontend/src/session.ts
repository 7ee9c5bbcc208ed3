/**
 * Review-queue state machine, independent of the DOM.
 *
 * Loads the pending tasks once, walks them in order, and submits decisions
 * optimistically with the server as arbiter: a 409 means another session
 * decided the task first, so it is skipped with a notice; a network
 * failure keeps the queue position so the same submission can be retried.
 *
 * The selectable names are exactly the server-provided top3 + others; the
 * session never invents a choice, and the decision source is derived from
 * where the chosen name sits (top-1, top-3, or the expanded list).
 */

import {
  ApiError,
  ConflictError,
  DecisionSource,
  Progress,
  TaskDetail,
  VerifyApi,
} from "./api.js";

export interface SessionNotice {
  kind: "conflict" | "network" | "info";
  message: string;
}

export interface SessionDecision {
  segmentId: number;
  chosen: string;
  source: DecisionSource;
  atMs: number;
}

export interface SourceBreakdown {
  top1: number;
  top3: number;
  others: number;
  cross_class: number;
}

export interface SessionStats {
  decisions: number;
  decisionsPerMinute: number;
  breakdown: SourceBreakdown;
}

export type SubmitOutcome = "advanced" | "skipped_conflict" | "retry";

export class QueueSession {
  private queue: number[] = [];
  private position = 0;
  private currentTask: TaskDetail | null = null;
  private staged: string | null = null;
  private startedAtMs: number | null = null;
  readonly decisions: SessionDecision[] = [];
  lastNotice: SessionNotice | null = null;
  othersExpanded = false;

  constructor(
    private readonly api: VerifyApi,
    readonly annotator: string,
    private readonly now: () => number = () => Date.now(),
  ) {}

  get current(): TaskDetail | null {
    return this.currentTask;
  }

  get stagedChoice(): string | null {
    return this.staged;
  }

  get queuePosition(): number {
    return this.position;
  }

  get queueLength(): number {
    return this.queue.length;
  }

  get finished(): boolean {
    return this.startedAtMs !== null && this.position >= this.queue.length;
  }

  async start(): Promise<void> {
    const pending = await this.api.allTasks("pending");
    this.queue = pending.map((t) => t.segment_id);
    this.position = 0;
    this.startedAtMs = this.now();
    await this.loadCurrent();
  }

  private async loadCurrent(): Promise<void> {
    this.staged = null;
    this.othersExpanded = false;
    this.currentTask =
      this.position < this.queue.length
        ? await this.api.getTask(this.queue[this.position]!)
        : null;
  }

  /** Exactly the server-provided candidate set: top3 then the rest. */
  choices(): string[] {
    if (!this.currentTask) return [];
    return [...this.currentTask.top3.map((s) => s.name), ...this.currentTask.others];
  }

  /** Stage the k-th top suggestion (0-based; keyboard keys 1/2/3). */
  selectTop(index: number): boolean {
    const task = this.currentTask;
    if (!task || index < 0 || index >= task.top3.length) return false;
    this.staged = task.top3[index]!.name;
    return true;
  }

  /** Stage a name from the expanded candidate list. */
  selectOther(name: string): boolean {
    const task = this.currentTask;
    if (!task || !this.choices().includes(name)) return false;
    this.staged = name;
    return true;
  }

  toggleOthers(): void {
    this.othersExpanded = !this.othersExpanded;
  }

  /** Where the staged name sits determines the recorded source. */
  sourceOf(name: string): DecisionSource {
    const task = this.currentTask;
    if (!task) throw new Error("no active task");
    const top3 = task.top3.map((s) => s.name);
    if (top3[0] === name) return "top1";
    if (top3.includes(name)) return "top3";
    if (task.others.includes(name)) return "others";
    throw new Error(`name not offered by the server: ${name}`);
  }

  /**
   * Submit the staged choice and advance.
   *
   * 409 -> the task was decided elsewhere: skip it, keep reviewing.
   * Network failure -> stay on the task so Enter retries the same submit.
   */
  async submit(): Promise<SubmitOutcome> {
    const task = this.currentTask;
    if (!task || this.staged === null) return "retry";
    const chosen = this.staged;
    const source = this.sourceOf(chosen);
    try {
      await this.api.postDecision(task.segment_id, {
        chosen,
        source,
        annotator: this.annotator,
        expect_pending: true,
      });
    } catch (error) {
      if (error instanceof ConflictError) {
        this.lastNotice = {
          kind: "conflict",
          message: `segment ${task.segment_id} was decided elsewhere; skipped`,
        };
        this.position += 1;
        await this.loadCurrent();
        return "skipped_conflict";
      }
      if (error instanceof ApiError) {
        throw error; // a rejected name is a programming error, not retryable
      }
      this.lastNotice = {
        kind: "network",
        message: "network failure; queue position kept, press Enter to retry",
      };
      return "retry";
    }
    this.decisions.push({
      segmentId: task.segment_id,
      chosen,
      source,
      atMs: this.now(),
    });
    this.lastNotice = null;
    this.position += 1;
    await this.loadCurrent();
    return "advanced";
  }

  async progress(): Promise<Progress> {
    return this.api.progress();
  }

  /** Local display statistics; never sent anywhere. */
  stats(): SessionStats {
    const breakdown: SourceBreakdown = { top1: 0, top3: 0, others: 0, cross_class: 0 };
    for (const d of this.decisions) {
      breakdown[d.source] += 1;
    }
    const n = this.decisions.length;
    let perMinute = 0;
    if (n > 0 && this.startedAtMs !== null) {
      const minutes = (this.now() - this.startedAtMs) / 60_000;
      perMinute = minutes > 0 ? n / minutes : 0;
    }
    const total = Math.max(n, 1);
    return {
      decisions: n,
      decisionsPerMinute: perMinute,
      breakdown: {
        top1: breakdown.top1 / total,
        top3: breakdown.top3 / total,
        others: breakdown.others / total,
        cross_class: breakdown.cross_class / total,
      },
    };
  }
}

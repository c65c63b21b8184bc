import { ApiError, ReviewApiClient } from "./api.js";
import type {
  Decision,
  NextResponse,
  ReviewItemView,
  Tag,
  VerdictSubmission,
} from "./types.js";
import { MULTICLASS_TAGS } from "./types.js";

export type Phase = "idle" | "loading" | "reviewing" | "empty" | "error";

export interface SessionState {
  phase: Phase;
  current: ReviewItemView | null;
  /** the override picker is open (an override is in progress) */
  overrideArmed: boolean;
  /** tag picked in the override picker */
  overrideTag: Tag | null;
  /** transient notice (guard message, retry hint, refresh notice) */
  banner: string | null;
  /** verdicts confirmed by the server (2xx responses only) */
  resolvedCount: number;
}

type Listener = (state: SessionState) => void;

/** One reviewer's pass over the queue.
 *
 * Submissions advance optimistically: the item leaves the screen while the
 * POST is in flight, but a 4xx rolls back to the exact prior view and
 * nothing is counted as resolved until the server confirms with a 2xx.
 */
export class ReviewSession {
  private state: SessionState = {
    phase: "idle",
    current: null,
    overrideArmed: false,
    overrideTag: null,
    banner: null,
    resolvedCount: 0,
  };
  private readonly listeners: Listener[] = [];

  constructor(
    private readonly client: ReviewApiClient,
    private readonly reviewerId: string,
    private readonly now: () => number = () => Date.now(),
    private readonly onResolved: () => void = () => {},
  ) {}

  getState(): SessionState {
    return { ...this.state, current: this.state.current ? { ...this.state.current } : null };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      const i = this.listeners.indexOf(listener);
      if (i >= 0) this.listeners.splice(i, 1);
    };
  }

  private setState(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.getState());
  }

  /** Seconds left on the current lease, by the server's clock. */
  leaseRemaining(nowMs = this.now()): number | null {
    const item = this.state.current;
    if (!item || item.leaseSeconds === null) return null;
    return item.leaseSeconds - (nowMs - item.receivedAt) / 1000;
  }

  async start(): Promise<void> {
    await this.fetchNext();
  }

  /** Re-poll the queue, e.g. from the completion screen or a retry banner. */
  async refresh(): Promise<void> {
    await this.fetchNext();
  }

  async fetchNext(): Promise<void> {
    this.setState({ phase: "loading", current: null, overrideArmed: false, overrideTag: null });
    let response: NextResponse | null;
    try {
      response = await this.client.next(this.reviewerId);
    } catch (error) {
      this.setState({
        phase: "error",
        banner: `cannot reach the review service (${describe(error)}); retry when back online`,
      });
      return;
    }
    if (response === null) {
      this.setState({ phase: "empty", current: null, overrideTag: null });
      return;
    }
    const { item, server_now, pending } = response;
    const view: ReviewItemView = {
      entryId: item.entry.id,
      text: item.entry.text,
      machineTag: item.annotation.tag,
      explanation: item.annotation.explanation,
      queueRemaining: pending,
      leaseSeconds: item.lease_expiry === null ? null : item.lease_expiry - server_now,
      receivedAt: this.now(),
    };
    this.setState({
      phase: "reviewing",
      current: view,
      overrideArmed: false,
      overrideTag: null,
      banner: null,
    });
  }

  /** Open the override picker without submitting yet. */
  armOverride(): void {
    if (this.state.phase !== "reviewing") return;
    this.setState({ overrideArmed: true });
  }

  selectOverrideTag(tag: Tag): void {
    if (this.state.phase !== "reviewing") return;
    this.setState({ overrideArmed: true, overrideTag: tag });
  }

  /** Local validation; returns the blocking reason or null when clear. */
  guard(decision: Decision): string | null {
    if (this.state.phase !== "reviewing" || !this.state.current) {
      return "no item is displayed";
    }
    if (decision === "override") {
      if (!this.state.overrideTag) {
        return "pick a tag before overriding";
      }
      if (this.state.overrideTag === this.state.current.machineTag) {
        return "override tag must differ from the machine tag";
      }
    }
    return null;
  }

  /**
   * Submit a verdict for the displayed item. Returns the guard reason when
   * blocked locally (state untouched, nothing sent), otherwise null.
   */
  async submit(decision: Decision): Promise<string | null> {
    const reason = this.guard(decision);
    if (reason !== null) {
      // A blocked override opens the picker so the reviewer can fix it.
      this.setState({ banner: reason, overrideArmed: decision === "override" });
      return reason;
    }
    const prior = this.getState();
    const item = prior.current!;
    const verdict: VerdictSubmission = {
      entry_id: item.entryId,
      decision,
      reviewer_id: this.reviewerId,
    };
    if (decision === "override") verdict.override_tag = prior.overrideTag!;

    // Optimistic advance: the item leaves the screen while the POST runs.
    this.setState({
      phase: "loading",
      current: null,
      overrideArmed: false,
      overrideTag: null,
      banner: null,
    });
    try {
      await this.client.submitVerdict(verdict);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // Someone else resolved it; drop the stale item and move on.
        await this.fetchNext();
        this.setState({ banner: "item was resolved elsewhere; queue refreshed" });
        return null;
      }
      // Any other failure: restore the exact prior view.
      this.setState({
        phase: prior.phase,
        current: prior.current,
        overrideArmed: prior.overrideArmed,
        overrideTag: prior.overrideTag,
        banner: `verdict rejected (${describe(error)}); nothing was recorded`,
      });
      return null;
    }
    this.setState({ resolvedCount: this.state.resolvedCount + 1 });
    this.onResolved();
    await this.fetchNext();
    return null;
  }
}

export function isTag(value: string): value is Tag {
  return (MULTICLASS_TAGS as readonly string[]).includes(value);
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.status}: ${error.message}`;
  return error instanceof Error ? error.message : String(error);
}

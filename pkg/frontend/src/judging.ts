import { ApiClient, ApiError } from "./api.js";
import type {
  JudgementResponse,
  NextDoc,
  Progress,
  ServedPairDoc,
} from "./types.js";

/** Fraction of the total judgement budget already spent, in [0, 1]. */
export function progressFraction(progress: Progress): number {
  if (progress.judgement_budget <= 0) return 0;
  return progress.judgements / progress.judgement_budget;
}

export function isServedPair(doc: NextDoc): doc is ServedPairDoc {
  return doc.status === "active";
}

function newIdempotencyKey(): string {
  const crypto = globalThis.crypto;
  if (crypto && "randomUUID" in crypto) return crypto.randomUUID();
  return `key-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

/**
 * State machine behind the judging screen.
 *
 * Exactly one served pair is outstanding at a time.  The assessor picks
 * a winner per criterion; submit stays disabled until every criterion
 * has a selection.  Submitting advances to the next served pair, and a
 * 409 (someone else already judged this pair, or we were restarted
 * mid-flight) silently refetches instead of surfacing an error.  The
 * controller owns no truth: reloading the page and calling refresh()
 * rebuilds the identical view from the service.
 */
export class JudgingController {
  private doc: NextDoc | null = null;
  private selections = new Map<number, number>();
  private pendingKey: string | null = null;
  lastResult: JudgementResponse | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly assessmentId: string,
  ) {}

  get view(): NextDoc | null {
    return this.doc;
  }

  get served(): ServedPairDoc | null {
    return this.doc !== null && isServedPair(this.doc) ? this.doc : null;
  }

  /** Pull the current served pair (or stop notice) from the service. */
  async refresh(): Promise<NextDoc> {
    this.doc = await this.api.next(this.assessmentId);
    this.selections.clear();
    this.pendingKey = null;
    return this.doc;
  }

  select(criterionId: number, winnerId: number): void {
    const served = this.served;
    if (!served) throw new Error("no pair is on screen");
    const { i, j } = served.pair;
    if (winnerId !== i && winnerId !== j) {
      throw new Error(`item ${winnerId} is not part of the served pair`);
    }
    if (!served.criteria.some((c) => c.id === criterionId)) {
      throw new Error(`unknown criterion ${criterionId}`);
    }
    this.selections.set(criterionId, winnerId);
  }

  selectionFor(criterionId: number): number | undefined {
    return this.selections.get(criterionId);
  }

  /** Submit unlocks only once every criterion has a verdict. */
  get submitEnabled(): boolean {
    const served = this.served;
    if (!served) return false;
    return served.criteria.every((c) => this.selections.has(c.id));
  }

  /**
   * Post the verdicts, then advance to the next served pair.
   *
   * The idempotency key is minted once per screen and reused across
   * retries, so a network failure after the service recorded the
   * judgement cannot record it twice.
   */
  async submit(): Promise<NextDoc> {
    const served = this.served;
    if (!served) throw new Error("no pair is on screen");
    if (!this.submitEnabled) {
      throw new Error("every criterion needs a selection before submit");
    }
    if (this.pendingKey === null) this.pendingKey = newIdempotencyKey();
    const winners: Record<string, number> = {};
    for (const [criterion, winner] of this.selections) {
      winners[String(criterion)] = winner;
    }
    try {
      this.lastResult = await this.api.submitJudgements(this.assessmentId, {
        pair: [served.pair.i, served.pair.j],
        winners,
        idempotency_key: this.pendingKey,
      });
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // The served pair moved under us; refetch and let the assessor
        // judge whatever is actually on offer.
        return this.refresh();
      }
      throw error;
    }
    return this.refresh();
  }
}

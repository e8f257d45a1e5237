// Dual tap detectors driven by explicit microsecond timestamps, so the
// same machine runs live (fed from performance.now()) and under test
// (fed synthetic times).
//
// The predictive pane fires a single-tap event right at touch-up whenever
// the score clears the activation threshold; otherwise it behaves exactly
// like the conventional pane, which always waits out the double-tap
// window. Ground truth per tap resolves the same way the trainer labels
// traces: the next touch-down within the window makes a tap the first
// half of a double.

export type Pane = "predictive" | "conventional";
export type FiredKind = "single" | "double";

export interface FiredEvent {
  pane: Pane;
  kind: FiredKind;
  emitTUs: number;
  sourceTapId: number;
}

export type Cell = "A" | "B" | "C" | "D";

export interface TallyRow {
  tapId: number;
  truth: "single" | "double_first";
  predicted: "single" | "double";
  cell: Cell;
  predictiveEmitTUs: number;
  conventionalEmitTUs: number;
  latencySavedUs: number;
}

interface TapEnd {
  tapId: number;
  tDownUs: number;
  tUpUs: number;
  score: number;
}

class PaneMachine {
  private waitingFor: TapEnd | null = null;
  private pairInProgress = false;

  constructor(
    readonly pane: Pane,
    private readonly thresholdUs: number,
    // returns true when a single-tap event should fire immediately at
    // touch-up; the conventional pane always returns false
    private readonly fireEarly: (score: number) => boolean
  ) {}

  onTapStart(tDownUs: number): void {
    if (this.waitingFor && tDownUs - this.waitingFor.tUpUs < this.thresholdUs) {
      this.pairInProgress = true;
    }
  }

  onTapEnd(tap: TapEnd): FiredEvent[] {
    if (this.waitingFor && this.pairInProgress) {
      const first = this.waitingFor;
      this.waitingFor = null;
      this.pairInProgress = false;
      return [
        { pane: this.pane, kind: "double", emitTUs: tap.tUpUs, sourceTapId: first.tapId },
      ];
    }
    this.waitingFor = null;
    this.pairInProgress = false;
    if (this.fireEarly(tap.score)) {
      return [
        { pane: this.pane, kind: "single", emitTUs: tap.tUpUs, sourceTapId: tap.tapId },
      ];
    }
    this.waitingFor = tap;
    return [];
  }

  advanceTo(nowUs: number): FiredEvent[] {
    if (
      this.waitingFor &&
      !this.pairInProgress &&
      nowUs >= this.waitingFor.tUpUs + this.thresholdUs
    ) {
      const tap = this.waitingFor;
      this.waitingFor = null;
      return [
        {
          pane: this.pane,
          kind: "single",
          emitTUs: tap.tUpUs + this.thresholdUs,
          sourceTapId: tap.tapId,
        },
      ];
    }
    return [];
  }

  nextDeadlineUs(): number | null {
    if (this.waitingFor && !this.pairInProgress) {
      return this.waitingFor.tUpUs + this.thresholdUs;
    }
    return null;
  }
}

interface PendingTruth {
  tap: TapEnd;
  predictedSingle: boolean;
  predictiveEmitTUs: number | null; // known immediately for early singles
}

export class DemoSession {
  readonly predictive: PaneMachine;
  readonly conventional: PaneMachine;
  private pending: PendingTruth | null = null;
  private pairOpen = false;
  private tapCounter = 0;
  private openDownUs: number | null = null;

  constructor(
    readonly thresholdUs: number,
    // pat === 1.0 means the slider is at max: never fire early, so the
    // panes behave identically (a float score can round to exactly 1.0,
    // which is why this is a mode and not a comparison against 1.0)
    private pat: number
  ) {
    this.predictive = new PaneMachine("predictive", thresholdUs, (s) =>
      this.pat < 1.0 ? s >= this.pat : false
    );
    this.conventional = new PaneMachine("conventional", thresholdUs, () => false);
  }

  setPat(pat: number): void {
    this.pat = pat;
  }

  currentPat(): number {
    return this.pat;
  }

  pointerDown(tUs: number): FiredEvent[] {
    const fired = this.advanceTo(tUs);
    this.openDownUs = tUs;
    if (this.pending && tUs - this.pending.tap.tUpUs < this.thresholdUs) {
      this.pairOpen = true;
    }
    this.predictive.onTapStart(tUs);
    this.conventional.onTapStart(tUs);
    return fired;
  }

  pointerUp(tUs: number, score: number): { fired: FiredEvent[]; tally: TallyRow | null } {
    const fired = this.advanceTo(tUs);
    const tDown = this.openDownUs ?? tUs;
    this.openDownUs = null;
    const tap: TapEnd = { tapId: this.tapCounter++, tDownUs: tDown, tUpUs: tUs, score };
    let tally: TallyRow | null = null;

    if (this.pending && this.pairOpen) {
      // this tap is the trailing half of a double: resolve the first tap
      const first = this.pending;
      this.pending = null;
      this.pairOpen = false;
      const predFired = this.predictive.onTapEnd(tap);
      const convFired = this.conventional.onTapEnd(tap);
      fired.push(...predFired, ...convFired);
      const conventionalEmit = tUs; // double fires at the second touch-up
      const predictiveEmit = first.predictedSingle
        ? (first.predictiveEmitTUs as number)
        : conventionalEmit;
      tally = {
        tapId: first.tap.tapId,
        truth: "double_first",
        predicted: first.predictedSingle ? "single" : "double",
        cell: first.predictedSingle ? "C" : "D",
        predictiveEmitTUs: predictiveEmit,
        conventionalEmitTUs: conventionalEmit,
        latencySavedUs: 0,
      };
      return { fired, tally };
    }

    const predFired = this.predictive.onTapEnd(tap);
    const convFired = this.conventional.onTapEnd(tap);
    fired.push(...predFired, ...convFired);
    const earlySingle = predFired.some((e) => e.kind === "single");
    this.pending = {
      tap,
      predictedSingle: earlySingle,
      predictiveEmitTUs: earlySingle ? tUs : null,
    };
    this.pairOpen = false;
    return { fired, tally };
  }

  // Flush timers up to nowUs; resolves a pending tap as a true single once
  // the window passes with no second touch.
  advanceTo(nowUs: number): FiredEvent[] {
    const fired = [
      ...this.predictive.advanceTo(nowUs),
      ...this.conventional.advanceTo(nowUs),
    ];
    if (
      this.pending &&
      !this.pairOpen &&
      nowUs >= this.pending.tap.tUpUs + this.thresholdUs
    ) {
      // truth resolved: single
      const p = this.pending;
      this.pending = null;
      const conventionalEmit = p.tap.tUpUs + this.thresholdUs;
      const predictiveEmit = p.predictedSingle
        ? (p.predictiveEmitTUs as number)
        : conventionalEmit;
      this.lastResolved = {
        tapId: p.tap.tapId,
        truth: "single",
        predicted: p.predictedSingle ? "single" : "double",
        cell: p.predictedSingle ? "A" : "B",
        predictiveEmitTUs: predictiveEmit,
        conventionalEmitTUs: conventionalEmit,
        latencySavedUs: conventionalEmit - predictiveEmit,
      };
    }
    return fired;
  }

  // set by advanceTo when a single-truth tap resolves; consumers take it
  lastResolved: TallyRow | null = null;

  takeResolved(): TallyRow | null {
    const row = this.lastResolved;
    this.lastResolved = null;
    return row;
  }

  nextDeadlineUs(): number | null {
    const deadlines = [
      this.predictive.nextDeadlineUs(),
      this.conventional.nextDeadlineUs(),
      this.pending && !this.pairOpen ? this.pending.tap.tUpUs + this.thresholdUs : null,
    ].filter((d): d is number => d !== null);
    return deadlines.length ? Math.min(...deadlines) : null;
  }
}

export function cellCounts(rows: TallyRow[]): Record<Cell, number> {
  const counts: Record<Cell, number> = { A: 0, B: 0, C: 0, D: 0 };
  for (const row of rows) {
    counts[row.cell] += 1;
  }
  return counts;
}

/** Pure session state machine for the rating flow.
 *
 * Phases: login -> (wait | playing) -> rating -> playing ... -> done.
 * Transitions are one-way per item: once a video has ended there is no
 * path back to `playing` for the same item (no replay), and the next item
 * can only be fetched after the current one has been rated server-side.
 */

export type Phase = "login" | "wait" | "loading" | "playing" | "rating" | "done" | "fatal";

export interface CurrentItem {
  videoId: string;
  streamUrl: string;
  phase: "training" | "rating";
  position: number;
  total: number;
}

export class SessionState {
  phase: Phase = "login";
  sessionId: string | null = null;
  subjectId: string | null = null;
  item: CurrentItem | null = null;
  remainingHours: number | null = null;
  /** Per-item log: whether the slider was moved before NEXT. */
  touchLog: { videoId: string; touched: boolean }[] = [];
  /** Videos skipped after a failed playback retry. */
  flaggedSkips: string[] = [];

  loggedIn(subjectId: string, sessionId: string): void {
    this.assert(this.phase === "login" || this.phase === "wait", "loggedIn");
    this.subjectId = subjectId;
    this.sessionId = sessionId;
    this.phase = "loading";
  }

  gapNotElapsed(remainingHours: number): void {
    this.assert(this.phase === "login" || this.phase === "wait", "gapNotElapsed");
    this.remainingHours = remainingHours;
    this.phase = "wait";
  }

  itemFetched(item: CurrentItem): void {
    this.assert(this.phase === "loading", "itemFetched");
    this.item = item;
    this.phase = "playing";
  }

  videoEnded(): void {
    this.assert(this.phase === "playing", "videoEnded");
    this.phase = "rating";
  }

  rated(touched: boolean, sessionPhaseAfter: string): void {
    this.assert(this.phase === "rating", "rated");
    if (this.item) this.touchLog.push({ videoId: this.item.videoId, touched });
    this.item = null;
    this.phase = sessionPhaseAfter === "complete" ? "done" : "loading";
  }

  sessionComplete(): void {
    this.item = null;
    this.phase = "done";
  }

  fatal(): void {
    this.phase = "fatal";
  }

  private assert(ok: boolean, transition: string): void {
    if (!ok) throw new Error(`illegal transition ${transition} from phase ${this.phase}`);
  }
}

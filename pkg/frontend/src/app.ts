/** Single-page rating application.
 *
 * Renders one screen per state-machine phase inside a portrait letterboxed
 * stage. Playback has no controls and no replay affordance; when a video
 * ends the rating bar mounts with its cursor at 0; NEXT posts the rating
 * and only a 200 advances the flow. Submissions are strictly sequential;
 * transport failures retry the same idempotent request with exponential
 * backoff while the UI stays blocked.
 */

import { ApiError, NetworkError, StudyApi } from "./api.js";
import { createSlider, RatingSlider } from "./slider.js";
import { SessionState } from "./state.js";

export interface AppOptions {
  /** Base backoff delay in ms for offline retries (doubles per attempt). */
  backoffMs?: number;
  /** Max offline retries before giving up with a fatal screen. */
  maxRetries?: number;
  /** Request-id generator for idempotent POSTs. */
  newRequestId?: () => string;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class RatingApp {
  readonly state = new SessionState();
  slider: RatingSlider | null = null;
  private video: HTMLVideoElement | null = null;
  private playbackRetried = false;
  private submitting = false;
  private counter = 0;
  private readonly backoffMs: number;
  private readonly maxRetries: number;
  private readonly newRequestId: () => string;
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: StudyApi,
    options: AppOptions = {},
  ) {
    this.backoffMs = options.backoffMs ?? 500;
    this.maxRetries = options.maxRetries ?? 6;
    this.newRequestId = options.newRequestId ?? (() => `req-${Date.now()}-${++this.counter}`);
    this.sleep = options.sleep ?? defaultSleep;
    this.renderLogin();
  }

  // --- screens -----------------------------------------------------------

  private stage(kind: string): HTMLElement {
    this.root.innerHTML = "";
    const stage = this.root.ownerDocument.createElement("div");
    stage.className = `stage portrait-stage screen-${kind}`;
    stage.dataset.phase = this.state.phase;
    this.root.appendChild(stage);
    return stage;
  }

  private banner(stage: HTMLElement, message: string): void {
    let el = stage.querySelector<HTMLElement>(".error-banner");
    if (!el) {
      el = stage.ownerDocument.createElement("div");
      el.className = "error-banner";
      stage.prepend(el);
    }
    el.textContent = message;
  }

  renderLogin(errorMessage?: string): void {
    this.state.phase = "login";
    const stage = this.stage("login");
    const doc = stage.ownerDocument;
    const form = doc.createElement("form");
    form.className = "login-form";
    const input = doc.createElement("input");
    input.type = "text";
    input.name = "subject";
    input.placeholder = "Subject number";
    const button = doc.createElement("button");
    button.type = "submit";
    button.textContent = "Start session";
    form.append(input, button);
    stage.appendChild(form);
    if (errorMessage) this.banner(stage, errorMessage);
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.login(input.value.trim());
    });
  }

  private renderWait(remainingHours: number): void {
    const stage = this.stage("wait");
    const doc = stage.ownerDocument;
    const msg = doc.createElement("p");
    msg.className = "wait-message";
    msg.textContent = `Please come back later: ${remainingHours.toFixed(1)} h remaining before your next session.`;
    stage.appendChild(msg);
  }

  private renderPlaying(): void {
    const item = this.state.item;
    if (!item) return;
    const stage = this.stage("playing");
    const doc = stage.ownerDocument;
    const frame = doc.createElement("div");
    frame.className = "video-letterbox";
    const video = doc.createElement("video");
    // Single-stimulus integrity: no controls, no scrubbing, no replay.
    video.removeAttribute("controls");
    video.autoplay = true;
    video.setAttribute("playsinline", "");
    video.disablePictureInPicture = true;
    video.src = item.streamUrl;
    video.className = "stimulus";
    frame.appendChild(video);
    stage.appendChild(frame);
    const progress = doc.createElement("div");
    progress.className = "progress";
    progress.textContent = `${item.position + 1} / ${item.total}`;
    stage.appendChild(progress);
    this.video = video;
    this.playbackRetried = false;
    video.addEventListener("ended", () => this.onVideoEnded());
    video.addEventListener("error", () => this.onPlaybackError());
  }

  private renderRating(): void {
    const stage = this.stage("rating");
    const doc = stage.ownerDocument;
    const slider = createSlider(doc);
    slider.reset(); // cursor always starts at 0
    this.slider = slider;
    stage.appendChild(slider.element);
    const next = doc.createElement("button");
    next.type = "button";
    next.className = "next-button";
    next.dataset.action = "next";
    next.textContent = "NEXT";
    stage.appendChild(next);
    next.addEventListener("click", () => void this.submit());
  }

  private renderDone(): void {
    const stage = this.stage("done");
    const msg = stage.ownerDocument.createElement("p");
    msg.className = "done-message";
    msg.textContent = "Session complete. Thank you for participating!";
    stage.appendChild(msg);
  }

  private renderFatal(message: string): void {
    this.state.fatal();
    const stage = this.stage("fatal");
    const msg = stage.ownerDocument.createElement("p");
    msg.className = "fatal-message";
    msg.textContent = message;
    stage.appendChild(msg);
  }

  // --- flow --------------------------------------------------------------

  async login(subjectId: string): Promise<void> {
    if (!subjectId) {
      this.renderLogin("Enter your subject number.");
      return;
    }
    try {
      const session = await this.api.startSession(subjectId, this.newRequestId());
      this.state.loggedIn(subjectId, session.session_id);
      await this.fetchNext();
    } catch (err) {
      if (err instanceof ApiError && err.name === "GapNotElapsed") {
        this.state.gapNotElapsed(err.remainingHours ?? 0);
        this.renderWait(err.remainingHours ?? 0);
      } else if (err instanceof ApiError) {
        this.renderLogin(`Cannot start session: ${err.name}`);
      } else {
        this.renderLogin("Service unreachable; check your connection and retry.");
      }
    }
  }

  private async fetchNext(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    try {
      const item = await this.api.nextItem(sessionId);
      this.state.itemFetched({
        videoId: item.video_id,
        streamUrl: item.stream_url,
        phase: item.phase,
        position: item.position,
        total: item.total,
      });
      this.renderPlaying();
    } catch (err) {
      if (err instanceof ApiError && err.name === "SessionComplete") {
        this.state.sessionComplete();
        this.renderDone();
      } else {
        this.renderFatal(`Could not fetch the next video (${String(err)}).`);
      }
    }
  }

  onVideoEnded(): void {
    if (this.state.phase !== "playing") return;
    this.video = null;
    this.state.videoEnded();
    this.renderRating();
  }

  private onPlaybackError(): void {
    if (this.state.phase !== "playing" || !this.video) return;
    if (!this.playbackRetried) {
      this.playbackRetried = true;
      this.video.load();
      void this.video.play?.();
      return;
    }
    // Second failure: flag the item and move to the rating screen so the
    // session can continue (the skip is recorded client-side).
    if (this.state.item) this.state.flaggedSkips.push(this.state.item.videoId);
    this.onVideoEnded();
  }

  async submit(): Promise<void> {
    if (this.state.phase !== "rating" || this.submitting || !this.slider) return;
    const item = this.state.item;
    if (!item) return;
    this.submitting = true;
    const score = this.slider.getValue();
    const touched = this.slider.wasTouched();
    const requestId = this.newRequestId();
    const stage = this.root.querySelector<HTMLElement>(".stage");
    const nextButton = stage?.querySelector<HTMLButtonElement>(".next-button") ?? null;
    if (nextButton) nextButton.disabled = true;

    let attempt = 0;
    for (;;) {
      try {
        const ack = await this.api.submitRating(this.state.sessionId ?? "", item.videoId, score, requestId);
        this.state.rated(touched, ack.phase);
        this.submitting = false;
        if (ack.phase === "complete") this.renderDone();
        else await this.fetchNext();
        return;
      } catch (err) {
        if (err instanceof NetworkError) {
          attempt += 1;
          if (attempt > this.maxRetries) {
            this.submitting = false;
            this.renderFatal("Offline and retries exhausted; your last rating was not stored.");
            return;
          }
          await this.sleep(this.backoffMs * 2 ** (attempt - 1));
          continue; // same request id: the service deduplicates replays
        }
        this.submitting = false;
        if (nextButton) nextButton.disabled = false;
        if (err instanceof ApiError && stage) {
          this.banner(stage, `${err.name}: ${err.detail}`);
          return; // no local advance on duplicate/out-of-range/wrong-video
        }
        this.renderFatal(String(err));
        return;
      }
    }
  }
}

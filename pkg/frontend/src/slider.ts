/** Continuous horizontal rating bar.
 *
 * The cursor maps pixel position linearly to [0, 100] with no snapping.
 * Five word labels sit exactly at 0/25/50/75/100% of the track length;
 * numeric values are never rendered. The cursor starts at 0 on every
 * mount/reset.
 */

export const TICK_POSITIONS = [0, 25, 50, 75, 100] as const;
export const TICK_LABELS = ["Bad", "Poor", "Fair", "Good", "Excellent"] as const;

export interface RatingSlider {
  element: HTMLElement;
  track: HTMLElement;
  cursor: HTMLElement;
  getValue(): number;
  /** Linear pixel-to-score mapping against the track's bounding box. */
  valueFromClientX(clientX: number): number;
  setValue(value: number): void;
  reset(): void;
  wasTouched(): boolean;
}

export function createSlider(doc: Document = document): RatingSlider {
  const element = doc.createElement("div");
  element.className = "rating-slider";
  element.setAttribute("role", "slider");
  element.setAttribute("aria-valuemin", "0");
  element.setAttribute("aria-valuemax", "100");
  element.tabIndex = 0;

  const track = doc.createElement("div");
  track.className = "slider-track";
  element.appendChild(track);

  for (let i = 0; i < TICK_POSITIONS.length; i++) {
    const tick = doc.createElement("div");
    tick.className = "slider-tick";
    tick.style.left = `${TICK_POSITIONS[i]}%`;
    const label = doc.createElement("span");
    label.className = "slider-label";
    label.textContent = TICK_LABELS[i] as string;
    tick.appendChild(label);
    track.appendChild(tick);
  }

  const cursor = doc.createElement("div");
  cursor.className = "slider-cursor";
  track.appendChild(cursor);

  let value = 0;
  let touched = false;

  const paint = () => {
    cursor.style.left = `${value}%`;
    element.setAttribute("aria-valuenow", String(value));
  };

  const clamp = (v: number) => Math.min(100, Math.max(0, v));

  const api: RatingSlider = {
    element,
    track,
    cursor,
    getValue: () => value,
    valueFromClientX(clientX: number): number {
      const rect = track.getBoundingClientRect();
      if (rect.width === 0) return value;
      return clamp(((clientX - rect.left) / rect.width) * 100);
    },
    setValue(v: number) {
      value = clamp(v);
      touched = true;
      paint();
    },
    reset() {
      value = 0;
      touched = false;
      paint();
    },
    wasTouched: () => touched,
  };

  const fromPointer = (ev: MouseEvent) => api.setValue(api.valueFromClientX(ev.clientX));
  let dragging = false;
  track.addEventListener("mousedown", (ev) => {
    dragging = true;
    fromPointer(ev as MouseEvent);
  });
  element.addEventListener("mousemove", (ev) => {
    if (dragging) fromPointer(ev as MouseEvent);
  });
  element.addEventListener("mouseup", () => {
    dragging = false;
  });

  element.addEventListener("keydown", (ev) => {
    const key = (ev as KeyboardEvent).key;
    if (key === "ArrowRight" || key === "ArrowUp") api.setValue(value + 1);
    else if (key === "ArrowLeft" || key === "ArrowDown") api.setValue(value - 1);
    else if (key === "Home") api.setValue(0);
    else if (key === "End") api.setValue(100);
  });

  paint();
  return api;
}

import { describe, expect, it } from "vitest";

import { createSlider, TICK_LABELS, TICK_POSITIONS } from "../src/slider";

describe("rating slider", () => {
  it("starts with the cursor at 0 and resets to 0", () => {
    const slider = createSlider(document);
    expect(slider.getValue()).toBe(0);
    expect(slider.cursor.style.left).toBe("0%");
    slider.setValue(63.2);
    expect(slider.getValue()).toBeCloseTo(63.2, 12);
    slider.reset();
    expect(slider.getValue()).toBe(0);
    expect(slider.wasTouched()).toBe(false);
  });

  it("places the five word labels exactly at 0/25/50/75/100% of the track", () => {
    const slider = createSlider(document);
    const ticks = Array.from(slider.track.querySelectorAll<HTMLElement>(".slider-tick"));
    expect(ticks.map((t) => t.style.left)).toEqual(TICK_POSITIONS.map((p) => `${p}%`));
    const labels = ticks.map((t) => t.querySelector(".slider-label")?.textContent);
    expect(labels).toEqual([...TICK_LABELS]);
  });

  it("renders no numeric values anywhere on the bar", () => {
    const slider = createSlider(document);
    expect(slider.element.textContent ?? "").not.toMatch(/[0-9]/);
  });

  it("maps pixel position linearly and continuously to [0, 100]", () => {
    const slider = createSlider(document);
    slider.track.getBoundingClientRect = () =>
      ({ left: 10, width: 200, right: 210, top: 0, bottom: 6, height: 6, x: 10, y: 0, toJSON: () => ({}) }) as DOMRect;
    // linear: score = (x - left) / width * 100, with no snapping to integers
    expect(slider.valueFromClientX(10)).toBe(0);
    expect(slider.valueFromClientX(210)).toBe(100);
    expect(slider.valueFromClientX(85.3)).toBeCloseTo(((85.3 - 10) / 200) * 100, 12);
    expect(slider.valueFromClientX(-50)).toBe(0);
    expect(slider.valueFromClientX(999)).toBe(100);
    const mid = slider.valueFromClientX(117.77);
    expect(Number.isInteger(mid)).toBe(false);
  });

  it("is keyboard operable", () => {
    const slider = createSlider(document);
    slider.element.dispatchEvent(new KeyboardEvent("keydown", { key: "ArrowRight" }));
    slider.element.dispatchEvent(new KeyboardEvent("keydown", { key: "ArrowRight" }));
    expect(slider.getValue()).toBe(2);
    slider.element.dispatchEvent(new KeyboardEvent("keydown", { key: "ArrowLeft" }));
    expect(slider.getValue()).toBe(1);
    slider.element.dispatchEvent(new KeyboardEvent("keydown", { key: "End" }));
    expect(slider.getValue()).toBe(100);
    slider.element.dispatchEvent(new KeyboardEvent("keydown", { key: "Home" }));
    expect(slider.getValue()).toBe(0);
    expect(slider.wasTouched()).toBe(true);
  });
});

import { describe, expect, it } from "vitest";

import { beginDrag, dragTarget, endDrag, keyToButton, PIXELS_PER_MM } from "../src/input.js";

describe("drag mapping", () => {
  it("converts pixel deltas to millimeters at zero force", () => {
    const drag = beginDrag(400, 0);
    expect(dragTarget(drag, 400 - 90 * PIXELS_PER_MM, 0)).toBeCloseTo(-90);
  });

  it("damps the drag under rendered force", () => {
    const drag = beginDrag(400, 0);
    const free = dragTarget(drag, 300, 0);
    const loaded = dragTarget(drag, 300, 10);
    expect(Math.abs(loaded)).toBeLessThan(Math.abs(free));
    expect(loaded).toBeCloseTo(free / (1 + 0.08 * 10));
  });

  it("tracks drag lifecycle", () => {
    let drag = beginDrag(100, -20);
    expect(drag.active).toBe(true);
    drag = endDrag(drag);
    expect(drag.active).toBe(false);
  });
});

describe("keyboard button", () => {
  it("maps space down/up to button events", () => {
    expect(keyToButton(" ", true, false)).toBe("button_down");
    expect(keyToButton(" ", false, true)).toBe("button_up");
  });

  it("ignores repeats and other keys", () => {
    expect(keyToButton(" ", true, true)).toBeNull();
    expect(keyToButton(" ", false, false)).toBeNull();
    expect(keyToButton("a", true, false)).toBeNull();
  });
});

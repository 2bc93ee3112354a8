import { beforeEach, describe, expect, it, vi } from "vitest";

import { COMFORT_SCALE, renderComfortSelector } from "../src/comfort.js";

describe("comfort selector", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "<div id='box'></div>";
    root = document.getElementById("box")!;
  });

  it("renders exactly seven points, -3 to +3, with cold/hot labels", () => {
    root.appendChild(renderComfortSelector({ lastVote: null, onVote: () => {} }));
    const buttons = [...root.querySelectorAll<HTMLButtonElement>(".comfort-point")];
    expect(buttons).toHaveLength(7);
    expect(buttons.map((b) => Number(b.dataset.value)))
      .toEqual([-3, -2, -1, 0, 1, 2, 3]);
    expect(root.textContent).toContain("Very cold");
    expect(root.textContent).toContain("Very hot");
  });

  it("emits only values in [-3, +3], by construction", () => {
    const emitted: number[] = [];
    root.appendChild(renderComfortSelector({ lastVote: null,
                                             onVote: (v) => emitted.push(v) }));
    for (const button of root.querySelectorAll<HTMLButtonElement>(".comfort-point")) {
      button.click();
    }
    expect(emitted).toEqual([-3, -2, -1, 0, 1, 2, 3]);
    expect(emitted.every((v) => Number.isInteger(v) && v >= -3 && v <= 3))
      .toBe(true);
  });

  it("marks the previous vote selected and moves selection on click", () => {
    root.appendChild(renderComfortSelector({ lastVote: 2, onVote: () => {} }));
    const selected = root.querySelector<HTMLButtonElement>(".comfort-point.selected")!;
    expect(selected.dataset.value).toBe("2");
    const minusOne = [...root.querySelectorAll<HTMLButtonElement>(".comfort-point")]
      .find((b) => b.dataset.value === "-1")!;
    minusOne.click();
    expect(root.querySelectorAll(".comfort-point.selected")).toHaveLength(1);
    expect(root.querySelector<HTMLButtonElement>(".comfort-point.selected")!
      .dataset.value).toBe("-1");
  });

  it("scale definition covers the whole range with no extras", () => {
    expect(COMFORT_SCALE.map((p) => p.value))
      .toEqual([-3, -2, -1, 0, 1, 2, 3]);
  });

  it("shows a saved confirmation when the post succeeds", async () => {
    root.appendChild(renderComfortSelector({
      lastVote: null,
      onVote: () => Promise.resolve({ stored: true }),
    }));
    root.querySelector<HTMLButtonElement>("[data-value='1']")!.click();
    await vi.waitFor(() => {
      expect(root.querySelector(".comfort-status")!.textContent).toBe("Saved ✓");
    });
  });

  it("keeps the selection and surfaces the error when the post fails", async () => {
    root.appendChild(renderComfortSelector({
      lastVote: null,
      onVote: () => Promise.reject(new Error("service unavailable")),
    }));
    const button = root.querySelector<HTMLButtonElement>("[data-value='2']")!;
    button.click();
    await vi.waitFor(() => {
      const status = root.querySelector(".comfort-status")!;
      expect(status.classList.contains("error")).toBe(true);
      expect(status.textContent).toContain("service unavailable");
    });
    expect(button.classList.contains("selected")).toBe(true);  // retry affordance
  });
});

/**
 * "I Feel" selector: exactly seven points, -3 (very cold) to +3 (very
 * hot). Out-of-range votes are impossible by construction; the only
 * values the control can emit are its seven buttons.
 */

export const COMFORT_SCALE: ReadonlyArray<{ value: number; label: string }> = [
  { value: -3, label: "Very cold" },
  { value: -2, label: "Cold" },
  { value: -1, label: "Slightly cool" },
  { value: 0, label: "Neutral" },
  { value: 1, label: "Slightly warm" },
  { value: 2, label: "Hot" },
  { value: 3, label: "Very hot" },
];

export interface ComfortSelectorOptions {
  lastVote: number | null;
  /** May return a promise; resolution/rejection drives the inline status. */
  onVote: (value: number) => void | Promise<unknown>;
}

export function renderComfortSelector(opts: ComfortSelectorOptions): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "comfort";
  const heading = document.createElement("div");
  heading.className = "comfort-heading";
  heading.textContent = "I Feel";
  wrap.appendChild(heading);

  const status = document.createElement("span");
  status.className = "comfort-status";

  const row = document.createElement("div");
  row.className = "comfort-row";
  for (const point of COMFORT_SCALE) {
    const button = document.createElement("button");
    button.type = "button";
    button.className = "comfort-point";
    button.dataset.value = String(point.value);
    button.title = point.label;
    button.textContent = point.value > 0 ? `+${point.value}` : String(point.value);
    if (opts.lastVote === point.value) {
      button.classList.add("selected");
    }
    button.addEventListener("click", () => {
      for (const other of row.querySelectorAll(".comfort-point")) {
        other.classList.remove("selected");
      }
      button.classList.add("selected");  // retained even if the post fails
      const outcome = opts.onVote(point.value);
      if (outcome && typeof outcome.then === "function") {
        status.textContent = "Saving…";
        status.classList.remove("error");
        outcome.then(
          () => {
            status.textContent = "Saved ✓";
          },
          (err: unknown) => {
            status.textContent =
              `${err instanceof Error ? err.message : String(err)} — tap again to retry`;
            status.classList.add("error");
          },
        );
      }
    });
    row.appendChild(button);
  }
  wrap.appendChild(row);

  const legend = document.createElement("div");
  legend.className = "comfort-legend";
  legend.innerHTML = "<span>Very cold</span><span>Very hot</span>";
  wrap.appendChild(legend);
  wrap.appendChild(status);
  return wrap;
}

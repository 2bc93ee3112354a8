/**
 * Energy comparison screen: up to seven daily bars, the computed
 * average, three group dots (department / floor / building) in
 * distinct colors, and the grey horizontal target line. Values are
 * plotted exactly as the API returns them.
 */

import type { EnergyComparisonView } from "./types.js";

const W = 420;
const H = 220;
const PAD = 30;

const GROUP_COLORS: Record<string, string> = {
  department: "#d9762b",
  floor: "#7a4fd1",
  building: "#2b8fd9",
};

export function renderComparison(root: HTMLElement,
                                 view: EnergyComparisonView): void {
  root.replaceChildren();
  root.className = "comparison-screen";

  const heading = document.createElement("h2");
  heading.textContent = "Daily energy, past week";
  root.appendChild(heading);

  if (view.dailies.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "No daily history yet";
    root.appendChild(empty);
    return;
  }

  const values = view.dailies.map((d) => d.totalWh);
  const dots = Object.values(view.groupDots).filter(
    (v): v is number => v !== null);
  const top = Math.max(
    ...values, ...dots, view.targetLine ?? 0, view.computedAverage ?? 0) * 1.15;
  const y = (wh: number) => H - PAD - (wh / top) * (H - 2 * PAD);

  const ns = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(ns, "svg");
  svg.setAttribute("viewBox", `0 0 ${W} ${H}`);
  svg.setAttribute("class", "comparison-chart");

  const slot = (W - 2 * PAD) / 7;
  view.dailies.forEach((daily, i) => {
    const bar = document.createElementNS(ns, "rect");
    const height = H - PAD - y(daily.totalWh);
    bar.setAttribute("x", String(PAD + i * slot + slot * 0.2));
    bar.setAttribute("y", String(y(daily.totalWh)));
    bar.setAttribute("width", String(slot * 0.6));
    bar.setAttribute("height", String(Math.max(height, 1)));
    bar.setAttribute("class", "daily-bar");
    bar.dataset.date = daily.date;
    bar.dataset.wh = String(daily.totalWh);
    svg.appendChild(bar);
  });

  if (view.computedAverage !== null) {
    const avg = document.createElementNS(ns, "line");
    avg.setAttribute("x1", String(PAD));
    avg.setAttribute("x2", String(W - PAD));
    avg.setAttribute("y1", String(y(view.computedAverage)));
    avg.setAttribute("y2", String(y(view.computedAverage)));
    avg.setAttribute("class", "average-line");
    svg.appendChild(avg);
  }

  if (view.targetLine !== null) {
    const target = document.createElementNS(ns, "line");
    target.setAttribute("x1", String(PAD));
    target.setAttribute("x2", String(W - PAD));
    target.setAttribute("y1", String(y(view.targetLine)));
    target.setAttribute("y2", String(y(view.targetLine)));
    target.setAttribute("stroke", "#888888");
    target.setAttribute("class", "target-line");
    svg.appendChild(target);
  }

  let dotIndex = 0;
  for (const [kind, value] of Object.entries(view.groupDots)) {
    if (value === null) {
      continue;
    }
    const dot = document.createElementNS(ns, "circle");
    dot.setAttribute("cx", String(W - PAD - 12 * dotIndex - 6));
    dot.setAttribute("cy", String(y(value)));
    dot.setAttribute("r", "5");
    dot.setAttribute("fill", GROUP_COLORS[kind] ?? "#666");
    dot.setAttribute("class", `group-dot group-dot-${kind}`);
    dot.dataset.wh = String(value);
    svg.appendChild(dot);
    dotIndex += 1;
  }

  root.appendChild(svg);
  root.appendChild(legend(view));
  root.appendChild(caption(view));
}

function legend(view: EnergyComparisonView): HTMLElement {
  const box = document.createElement("div");
  box.className = "comparison-legend";
  for (const [kind, value] of Object.entries(view.groupDots)) {
    const entry = document.createElement("span");
    entry.className = `legend-${kind}`;
    entry.textContent =
      value === null ? `${kind}: —` : `${kind}: ${round2(value)} Wh`;
    box.appendChild(entry);
  }
  return box;
}

/** Reference-point framing: "you: X, peers: Y" reads better than a bare number. */
function caption(view: EnergyComparisonView): HTMLElement {
  const line = document.createElement("p");
  line.className = "comparison-caption";
  const you = view.computedAverage;
  const dept = view.groupDots.department;
  if (you !== null && dept !== null) {
    line.textContent =
      `you: ${round2(you)} Wh/day, department average: ${round2(dept)} Wh/day`;
  } else if (you !== null) {
    line.textContent = `you: ${round2(you)} Wh/day`;
  }
  return line;
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}

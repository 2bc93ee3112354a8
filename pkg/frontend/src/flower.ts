/**
 * Three-state flower indicator. The artwork is deliberately swappable:
 * each state maps to a CSS class and a small inline SVG, and the
 * wording stays encouraging ("could use improvement", never "bad").
 */

import type { FlowerState } from "./types.js";

export const FLOWER_LABELS: Record<FlowerState, string> = {
  flourishing: "Flourishing",
  neutral: "Holding steady",
  needsImprovement: "Could use improvement",
};

const PETAL_COUNTS: Record<FlowerState, number> = {
  flourishing: 8,
  neutral: 5,
  needsImprovement: 2,
};

export function renderFlower(state: FlowerState | null): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "flower";
  if (state === null) {
    wrap.classList.add("flower-unknown");
    wrap.appendChild(caption("No energy history yet"));
    return wrap;
  }
  wrap.classList.add(`flower-${state}`);
  wrap.appendChild(flowerSvg(PETAL_COUNTS[state], state === "needsImprovement"));
  wrap.appendChild(caption(FLOWER_LABELS[state]));
  return wrap;
}

function caption(text: string): HTMLElement {
  const label = document.createElement("div");
  label.className = "flower-label";
  label.textContent = text;
  return label;
}

function flowerSvg(petals: number, withered: boolean): SVGSVGElement {
  const ns = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(ns, "svg");
  svg.setAttribute("viewBox", "-50 -50 100 100");
  svg.setAttribute("class", "flower-art");
  svg.setAttribute("role", "img");
  for (let i = 0; i < petals; i++) {
    const petal = document.createElementNS(ns, "ellipse");
    petal.setAttribute("cx", "0");
    petal.setAttribute("cy", "-24");
    petal.setAttribute("rx", "10");
    petal.setAttribute("ry", "20");
    const droop = withered ? 24 : 0;
    petal.setAttribute(
      "transform",
      `rotate(${(360 / petals) * i + droop})`,
    );
    petal.setAttribute("class", "petal");
    svg.appendChild(petal);
  }
  const core = document.createElementNS(ns, "circle");
  core.setAttribute("r", "12");
  core.setAttribute("class", "flower-core");
  svg.appendChild(core);
  return svg;
}

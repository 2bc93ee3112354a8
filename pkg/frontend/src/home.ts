/**
 * Home screen: flower + trend dot, ambient tiles ("where I am right
 * now"), outdoor weather, notifications, and the comfort selector.
 * Absent data renders as placeholders, never as fabricated zeros.
 */

import { renderComfortSelector } from "./comfort.js";
import { renderFlower } from "./flower.js";
import type { HomeView } from "./types.js";

export interface HomeHandlers {
  onVote: (value: number) => void | Promise<unknown>;
  onSetTarget?: (wh: number) => void;
}

const PLACEHOLDER = "—";

export function renderHome(root: HTMLElement, view: HomeView,
                           handlers: HomeHandlers): void {
  root.replaceChildren();
  root.className = "home-screen";

  const energyPanel = document.createElement("section");
  energyPanel.className = "panel energy-panel";
  energyPanel.appendChild(title("My Energy"));
  const flowerBox = document.createElement("div");
  flowerBox.className = "flower-box";
  flowerBox.appendChild(renderFlower(view.flower));
  const dot = document.createElement("span");
  dot.className = `trend-dot ${view.trend ? view.trend.color : "unknown"}`;
  dot.title = view.trend
    ? `last cycle ${fmt(view.trend.lastCycleWh)} Wh vs reference ` +
      `${fmt(view.trend.referenceWh)} Wh`
    : "no trend yet";
  flowerBox.appendChild(dot);
  energyPanel.appendChild(flowerBox);
  if (view.target) {
    const target = document.createElement("div");
    target.className = "target-note";
    target.textContent =
      `Target ${fmt(view.target.wh)} Wh/day (${view.target.source})`;
    energyPanel.appendChild(target);
  }
  if (handlers.onSetTarget) {
    energyPanel.appendChild(targetForm(view, handlers.onSetTarget));
  }
  root.appendChild(energyPanel);

  const ambientPanel = document.createElement("section");
  ambientPanel.className = "panel ambient-panel";
  ambientPanel.appendChild(title("Where I am right now"));
  ambientPanel.appendChild(tile("temperature",
    view.ambient ? `${fmt(view.ambient.tempC)} °C` : PLACEHOLDER));
  ambientPanel.appendChild(tile("humidity",
    view.ambient ? `${fmt(view.ambient.rh)} %` : PLACEHOLDER));
  ambientPanel.appendChild(tile("light",
    view.ambient ? fmt(view.ambient.light) : PLACEHOLDER));
  root.appendChild(ambientPanel);

  const weatherPanel = document.createElement("section");
  weatherPanel.className = "panel weather-panel";
  weatherPanel.appendChild(title("Outdoors"));
  if (view.weather) {
    weatherPanel.appendChild(tile("outdoor-temp",
      `${fmt(view.weather.outdoorTempC)} °C`));
    weatherPanel.appendChild(tile("outdoor-rh",
      `${fmt(view.weather.outdoorRhPct)} %`));
    weatherPanel.appendChild(tile("conditions",
      view.weather.conditions || PLACEHOLDER));
  } else {
    weatherPanel.appendChild(tile("outdoor-temp", PLACEHOLDER));
  }
  root.appendChild(weatherPanel);

  const notesPanel = document.createElement("section");
  notesPanel.className = "panel notifications-panel";
  notesPanel.appendChild(title("My Notifications"));
  const list = document.createElement("ul");
  list.className = "notification-list";
  if (view.notifications.length === 0) {
    const empty = document.createElement("li");
    empty.className = "empty";
    empty.textContent = "Nothing new";
    list.appendChild(empty);
  }
  for (const note of view.notifications) {
    const item = document.createElement("li");
    item.className = "notification";
    item.textContent = note.text;
    item.dataset.source = note.source;
    list.appendChild(item);
  }
  notesPanel.appendChild(list);
  root.appendChild(notesPanel);

  const comfortPanel = document.createElement("section");
  comfortPanel.className = "panel comfort-panel";
  comfortPanel.appendChild(renderComfortSelector({
    lastVote: view.comfort.lastVote,
    onVote: handlers.onVote,
  }));
  root.appendChild(comfortPanel);
}

export function renderStaleBanner(root: HTMLElement, message: string): void {
  let banner = root.querySelector<HTMLElement>(".stale-banner");
  if (!banner) {
    banner = document.createElement("div");
    banner.className = "stale-banner";
    root.prepend(banner);
  }
  banner.textContent = message;
}

export function clearStaleBanner(root: HTMLElement): void {
  root.querySelector(".stale-banner")?.remove();
}

/** User-settable daily target; invalid or non-positive input never fires. */
function targetForm(view: HomeView, onSetTarget: (wh: number) => void): HTMLElement {
  const form = document.createElement("form");
  form.className = "target-form";
  const input = document.createElement("input");
  input.type = "number";
  input.name = "target";
  input.min = "0.1";
  input.step = "any";
  input.placeholder = "Wh/day";
  if (view.target?.source === "user") {
    input.value = String(view.target.wh);
  }
  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "Set target";
  form.append(input, button);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const wh = Number(input.value);
    if (Number.isFinite(wh) && wh > 0) {
      onSetTarget(wh);
    }
  });
  return form;
}

function title(text: string): HTMLElement {
  const heading = document.createElement("h2");
  heading.textContent = text;
  return heading;
}

function tile(kind: string, text: string): HTMLElement {
  const box = document.createElement("div");
  box.className = `tile tile-${kind}`;
  box.textContent = text;
  return box;
}

function fmt(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(2);
}

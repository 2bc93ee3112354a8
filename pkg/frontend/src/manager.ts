/**
 * Manager panel: energy report table, rogue-zone list, system alerts,
 * and the notification composer. Errors surface inline; an empty
 * report renders an empty-state message, not a blank page.
 */

import { ConsoleApi } from "./api.js";
import type { ReportRow, RogueZone } from "./types.js";

export interface ManagerPanelOptions {
  api: ConsoleApi;
  groupBy?: string;
  from: string;
  to: string;
}

export async function renderManagerPanel(root: HTMLElement,
                                         opts: ManagerPanelOptions): Promise<void> {
  root.replaceChildren();
  root.className = "manager-panel";

  const reportSection = section(root, "Energy report");
  try {
    const { rows } = await opts.api.report(opts.groupBy ?? "department",
                                           opts.from, opts.to);
    reportSection.appendChild(reportTable(rows));
  } catch (err) {
    reportSection.appendChild(errorNote(err));
  }

  const rogueSection = section(root, "Rogue zones");
  try {
    const { zones } = await opts.api.rogueZones(opts.from, opts.to);
    rogueSection.appendChild(rogueList(zones));
  } catch (err) {
    rogueSection.appendChild(errorNote(err));
  }

  const alertsSection = section(root, "Comfort alerts");
  try {
    const { notifications } = await opts.api.managerFeed();
    const list = document.createElement("ul");
    list.className = "alert-list";
    if (notifications.length === 0) {
      list.appendChild(emptyItem("No alerts"));
    }
    for (const note of notifications) {
      const item = document.createElement("li");
      item.textContent = note.text;
      list.appendChild(item);
    }
    alertsSection.appendChild(list);
  } catch (err) {
    alertsSection.appendChild(errorNote(err));
  }

  const composeSection = section(root, "Notify occupants");
  composeSection.appendChild(composer(opts.api));
}

function section(root: HTMLElement, heading: string): HTMLElement {
  const box = document.createElement("section");
  box.className = "panel";
  const h = document.createElement("h2");
  h.textContent = heading;
  box.appendChild(h);
  root.appendChild(box);
  return box;
}

function reportTable(rows: ReportRow[]): HTMLElement {
  if (rows.length === 0) {
    return emptyNote("No consumption recorded in this period");
  }
  const table = document.createElement("table");
  table.className = "report-table";
  const head = table.createTHead().insertRow();
  for (const label of ["Subject", "Total Wh", "Mean Wh/day", "Days"]) {
    const cell = document.createElement("th");
    cell.textContent = label;
    head.appendChild(cell);
  }
  const body = table.createTBody();
  for (const row of rows) {
    const tr = body.insertRow();
    tr.insertCell().textContent = row.subject;
    tr.insertCell().textContent = String(round2(row.totalWh));
    tr.insertCell().textContent = String(round2(row.meanWh));
    tr.insertCell().textContent = String(row.days);
  }
  return table;
}

function rogueList(zones: RogueZone[]): HTMLElement {
  if (zones.length === 0) {
    return emptyNote("All zones within comfort bands");
  }
  const list = document.createElement("ol");
  list.className = "rogue-list";
  for (const zone of zones) {
    const item = document.createElement("li");
    item.className = "rogue-zone";
    item.dataset.zone = zone.zone;
    item.textContent =
      `${zone.zone}: ${(zone.fraction * 100).toFixed(0)}% of ` +
      `${zone.readings} readings out of band`;
    list.appendChild(item);
  }
  return list;
}

function composer(api: ConsoleApi): HTMLElement {
  const form = document.createElement("form");
  form.className = "composer";

  const kind = document.createElement("select");
  kind.name = "kind";
  for (const option of ["all", "user", "department", "floor", "building"]) {
    const el = document.createElement("option");
    el.value = option;
    el.textContent = option;
    kind.appendChild(el);
  }
  const name = document.createElement("input");
  name.name = "name";
  name.placeholder = "group or user name";
  const text = document.createElement("input");
  text.name = "text";
  text.placeholder = "message";
  const send = document.createElement("button");
  send.type = "submit";
  send.textContent = "Send";
  const status = document.createElement("span");
  status.className = "composer-status";

  form.append(kind, name, text, send, status);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const audience = kind.value === "all" ? "all" : `${kind.value}:${name.value}`;
    api.postNotification(audience, text.value).then(
      ({ delivered }) => {
        status.textContent = `delivered to ${delivered}`;
        status.classList.remove("error");
      },
      (err: unknown) => {
        status.textContent = err instanceof Error ? err.message : String(err);
        status.classList.add("error");
      },
    );
  });
  return form;
}

function emptyNote(text: string): HTMLElement {
  const note = document.createElement("p");
  note.className = "empty";
  note.textContent = text;
  return note;
}

function emptyItem(text: string): HTMLElement {
  const item = document.createElement("li");
  item.className = "empty";
  item.textContent = text;
  return item;
}

function errorNote(err: unknown): HTMLElement {
  const note = document.createElement("p");
  note.className = "error";
  note.textContent = err instanceof Error ? err.message : String(err);
  return note;
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}

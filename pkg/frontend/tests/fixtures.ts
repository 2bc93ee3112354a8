/** Canned console-api fixtures and a stateful in-memory fake API. */

import { ConsoleApi, type FetchLike } from "../src/api.js";
import type { EnergyComparisonView, HomeView, Notification } from "../src/types.js";

export function homeFixture(overrides: Partial<HomeView> = {}): HomeView {
  return {
    userId: "alice",
    flower: "flourishing",
    trend: {
      color: "green",
      lastCycleWh: 1.2,
      referenceWh: 2.4,
      referenceSource: "previous_day",
      windowEnd: "2022-03-14T09:30:00Z",
    },
    ambient: { light: 50, tempC: 25, rh: 60, ts: "2022-03-14T09:30:00Z" },
    weather: {
      outdoorTempC: 18,
      outdoorRhPct: 55,
      conditions: "clear",
      location: "HQ",
      ts: "2022-03-14T09:15:00Z",
    },
    notifications: [],
    comfort: { lastVote: null, min: -3, max: 3 },
    target: { wh: 15, source: "user" },
    ...overrides,
  };
}

export function comparisonFixture(
  overrides: Partial<EnergyComparisonView> = {},
): EnergyComparisonView {
  return {
    userId: "alice",
    dailies: [
      { date: "2022-03-08", totalWh: 10 },
      { date: "2022-03-09", totalWh: 12 },
      { date: "2022-03-10", totalWh: 9 },
      { date: "2022-03-11", totalWh: 11 },
      { date: "2022-03-12", totalWh: 8 },
      { date: "2022-03-13", totalWh: 10 },
      { date: "2022-03-14", totalWh: 10 },
    ],
    computedAverage: 10,
    groupDots: { department: 20, floor: 18.5, building: 17 },
    targetLine: 15,
    ...overrides,
  };
}

/**
 * Minimal stateful stand-in for the console service: provisioned users
 * with group memberships, deliver-once notifications, canned report and
 * rogue fixtures. Backs a real ConsoleApi through a fake fetch.
 */
export class FakeConsole {
  users = new Map<string, { department: string }>();
  pending = new Map<string, Notification[]>();
  votes: Array<{ userId: string; value: number }> = [];
  reportRows: unknown[] = [];
  rogueZones: unknown[] = [];
  private nextId = 1;

  addUser(userId: string, department: string): void {
    this.users.set(userId, { department });
    this.pending.set(userId, []);
  }

  api(): ConsoleApi {
    return new ConsoleApi("", this.fetch);
  }

  private respond(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  fetch: FetchLike = async (input, init) => {
    const url = new URL(input, "http://fake");
    const path = url.pathname;
    const body = init?.body ? JSON.parse(String(init.body)) : {};

    let match = path.match(/^\/api\/home\/(.+)$/);
    if (match) {
      const userId = decodeURIComponent(match[1]);
      if (!this.users.has(userId)) {
        return this.respond(404, { error: `no such user '${userId}'` });
      }
      const notifications = this.pending.get(userId) ?? [];
      this.pending.set(userId, []);
      return this.respond(200, homeFixture({ userId, notifications }));
    }

    match = path.match(/^\/api\/comfort\/(.+)$/);
    if (match) {
      const value = body.value;
      if (!Number.isInteger(value) || value < -3 || value > 3) {
        return this.respond(400, { error: `vote out of range: ${value}` });
      }
      this.votes.push({ userId: decodeURIComponent(match[1]), value });
      return this.respond(200, { stored: true, zone: "Z1" });
    }

    if (path === "/api/notify") {
      const [kind, name] = String(body.audience).split(":");
      const targets =
        kind === "all"
          ? [...this.users.keys()]
          : kind === "user"
            ? [name]
            : [...this.users.entries()]
                .filter(([, u]) => u.department === name)
                .map(([id]) => id);
      if (targets.length === 0) {
        return this.respond(400, { error: `no members in ${body.audience}` });
      }
      const note: Notification = {
        id: this.nextId++,
        audience: body.audience,
        text: body.text,
        createdAt: "2022-03-14T10:00:00Z",
        source: "manager",
      };
      for (const target of targets) {
        this.pending.get(target)?.push(note);
      }
      return this.respond(200, { id: note.id, delivered: targets.length });
    }

    if (path === "/api/report") {
      return this.respond(200, { rows: this.reportRows });
    }
    if (path === "/api/rogue") {
      return this.respond(200, { zones: this.rogueZones });
    }
    if (path === "/api/manager/feed") {
      return this.respond(200, { notifications: [] });
    }
    if (path.startsWith("/api/energy/")) {
      return this.respond(200, comparisonFixture());
    }
    return this.respond(404, { error: `no such endpoint ${path}` });
  };
}

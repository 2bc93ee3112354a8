/** Thin typed client for the console API. */

import type {
  EnergyComparisonView,
  HomeView,
  Notification,
  ReportRow,
  RogueZone,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ConsoleApi {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path);
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorText(resp));
    }
    return (await resp.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorText(resp));
    }
    return (await resp.json()) as T;
  }

  homeView(userId: string): Promise<HomeView> {
    return this.get(`/api/home/${encodeURIComponent(userId)}`);
  }

  energyComparison(userId: string): Promise<EnergyComparisonView> {
    return this.get(`/api/energy/${encodeURIComponent(userId)}`);
  }

  submitComfortVote(userId: string, value: number): Promise<{ stored: boolean; zone: string }> {
    return this.post(`/api/comfort/${encodeURIComponent(userId)}`, { value });
  }

  postNotification(audience: string, text: string): Promise<{ id: number; delivered: number }> {
    return this.post("/api/notify", { audience, text });
  }

  setTarget(userId: string, wh: number): Promise<{ ok: boolean }> {
    return this.post(`/api/target/${encodeURIComponent(userId)}`, { wh });
  }

  report(groupBy: string, from: string, to: string): Promise<{ rows: ReportRow[] }> {
    const q = new URLSearchParams({ groupBy, from, to, role: "manager" });
    return this.get(`/api/report?${q}`);
  }

  rogueZones(from: string, to: string): Promise<{ zones: RogueZone[] }> {
    const q = new URLSearchParams({ from, to });
    return this.get(`/api/rogue?${q}`);
  }

  managerFeed(): Promise<{ notifications: Notification[] }> {
    return this.get("/api/manager/feed");
  }
}

async function errorText(resp: Response): Promise<string> {
  try {
    const data = await resp.json();
    if (data && typeof data.error === "string") {
      return data.error;
    }
  } catch {
    // non-JSON error body; fall through
  }
  return `HTTP ${resp.status}`;
}

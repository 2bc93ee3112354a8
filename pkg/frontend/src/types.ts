/**
 * Client-side mirrors of the console API responses (see docs/api.md in
 * the repository root). Rendered values come only from these; the UI
 * never recomputes aggregates.
 */

export type FlowerState = "flourishing" | "neutral" | "needsImprovement";
export type TrendColor = "green" | "orange" | "red";

export interface Trend {
  color: TrendColor;
  lastCycleWh: number;
  referenceWh: number;
  referenceSource: string;
  windowEnd: string;
}

export interface AmbientTile {
  light: number;
  tempC: number;
  rh: number;
  ts: string;
}

export interface WeatherTile {
  outdoorTempC: number;
  outdoorRhPct: number;
  conditions: string;
  location: string;
  ts: string;
}

export interface Notification {
  id: number;
  audience: string;
  text: string;
  createdAt: string;
  source: string;
}

export interface HomeView {
  userId: string;
  flower: FlowerState | null;
  trend: Trend | null;
  ambient: AmbientTile | null;
  weather: WeatherTile | null;
  notifications: Notification[];
  comfort: { lastVote: number | null; min: number; max: number };
  target: { wh: number; source: "user" | "policy" } | null;
}

export interface Daily {
  date: string;
  totalWh: number;
}

export interface EnergyComparisonView {
  userId: string;
  dailies: Daily[];
  computedAverage: number | null;
  groupDots: { department: number | null; floor: number | null; building: number | null };
  targetLine: number | null;
}

export interface ReportRow {
  subject: string;
  totalWh: number;
  meanWh: number;
  days: number;
}

export interface RogueZone {
  zone: string;
  from: string;
  to: string;
  readings: number;
  outOfBand: number;
  fraction: number;
  extremes: Record<string, number>;
}

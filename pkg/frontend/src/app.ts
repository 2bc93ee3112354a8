/**
 * Bootstrap and polling. The dashboard pulls the console API on the
 * report cadence (30 s); a failed poll shows a stale-data banner over
 * the last good render instead of fabricating values. Routes:
 *   #home (default), #compare, #manager
 */

import { ConsoleApi } from "./api.js";
import { renderComparison } from "./comparison.js";
import { clearStaleBanner, renderHome, renderStaleBanner } from "./home.js";
import { renderManagerPanel } from "./manager.js";

export const POLL_INTERVAL_MS = 30_000;

export interface AppOptions {
  root: HTMLElement;
  userId: string;
  api?: ConsoleApi;
  pollMs?: number;
}

export class App {
  private api: ConsoleApi;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(private opts: AppOptions) {
    this.api = opts.api ?? new ConsoleApi();
  }

  start(): void {
    this.refresh();
    this.timer = setInterval(() => this.refresh(), this.opts.pollMs ?? POLL_INTERVAL_MS);
    window.addEventListener("hashchange", () => this.refresh());
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async refresh(): Promise<void> {
    const route = window.location.hash.replace("#", "") || "home";
    try {
      if (route === "compare") {
        renderComparison(this.opts.root,
                         await this.api.energyComparison(this.opts.userId));
      } else if (route === "manager") {
        const today = new Date().toISOString().slice(0, 10);
        await renderManagerPanel(this.opts.root,
                                 { api: this.api, from: "1970-01-01", to: today });
      } else {
        const view = await this.api.homeView(this.opts.userId);
        renderHome(this.opts.root, view, {
          onVote: (value) => this.api.submitComfortVote(this.opts.userId, value),
          onSetTarget: (wh) =>
            this.api.setTarget(this.opts.userId, wh).then(
              () => this.refresh(),
              (err) => renderStaleBanner(this.opts.root,
                                         `Target not saved: ${messageOf(err)}`),
            ),
        });
      }
      clearStaleBanner(this.opts.root);
    } catch (err) {
      renderStaleBanner(this.opts.root,
                        `Showing last known data — ${messageOf(err)}`);
    }
  }
}

function messageOf(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

declare global {
  interface Window {
    officemonStart?: (rootId: string, userId: string, baseUrl?: string) => App;
  }
}

if (typeof window !== "undefined") {
  window.officemonStart = (rootId: string, userId: string, baseUrl = "") => {
    const root = document.getElementById(rootId);
    if (!root) {
      throw new Error(`no element #${rootId}`);
    }
    const app = new App({ root, userId, api: new ConsoleApi(baseUrl) });
    app.start();
    return app;
  };
}

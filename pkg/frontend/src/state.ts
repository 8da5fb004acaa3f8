// Dashboard controller: polling, connection tracking, run control.
// DOM-free so the control flow is testable against a mocked API.

import { ApiClient, ApiError } from "./api.js";
import type { PlanStatus, Snapshot, TimeseriesEntry } from "./types.js";

export type Theme = "light" | "dark";
export type RunState = "idle" | "running" | "busy" | "unknown";

export interface DashboardState {
  snapshot: Snapshot | null;
  timeseries: TimeseriesEntry[];
  connected: boolean;
  stale: boolean;
  lastUpdate: number | null; // ms epoch of last successful poll
  runState: RunState;
  plan: PlanStatus | null;
  notice: string | null;
  theme: Theme;
}

export const STALE_AFTER_MS = 3000;

export function initialState(): DashboardState {
  return {
    snapshot: null,
    timeseries: [],
    connected: false,
    stale: false,
    lastUpdate: null,
    runState: "unknown",
    plan: null,
    notice: null,
    theme: "light",
  };
}

export class DashboardController {
  state: DashboardState = initialState();
  private listeners: Array<(s: DashboardState) => void> = [];
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private api: ApiClient,
    private now: () => number = () => Date.now(),
  ) {}

  onChange(fn: (s: DashboardState) => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  /** One polling round: statistics + timeseries (+ plan status if active). */
  async poll(): Promise<void> {
    try {
      const [snapshot, timeseries] = await Promise.all([
        this.api.statistics("live"),
        this.api.timeseries(),
      ]);
      this.state.snapshot = snapshot;
      this.state.timeseries = timeseries;
      this.state.connected = true;
      this.state.lastUpdate = this.now();
      this.state.stale = false;
      if (this.state.plan && ["pending", "running"].includes(this.state.plan.status)) {
        this.state.plan = await this.api.planStatus(this.state.plan.plan_id);
        if (this.state.plan.status === "done") {
          this.state.notice = `plan ${this.state.plan.plan_id} finished`;
          this.state.runState = "idle";
        }
      }
    } catch {
      this.state.connected = false;
      this.state.stale =
        this.state.lastUpdate !== null && this.now() - this.state.lastUpdate > STALE_AFTER_MS;
    }
    this.emit();
  }

  startPolling(intervalMs = 1000): void {
    if (this.timer !== null) return;
    void this.poll();
    this.timer = setInterval(() => void this.poll(), intervalMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async start(): Promise<boolean> {
    try {
      await this.api.start();
      this.state.runState = "running";
      this.state.notice = null;
      this.emit();
      return true;
    } catch (err) {
      this.fail(err, "start");
      return false;
    }
  }

  async stop(): Promise<boolean> {
    try {
      await this.api.stop();
      this.state.runState = "idle";
      this.state.notice = null;
      this.emit();
      return true;
    } catch (err) {
      this.fail(err, "stop");
      return false;
    }
  }

  async launchProfile(name: string, params: unknown): Promise<boolean> {
    try {
      const out = await this.api.runProfile(name, params);
      this.state.plan = {
        plan_id: out.plan_id,
        kind: "profile",
        status: "running",
        current_index: 0,
        tests: [],
        completed: 0,
        error: null,
      };
      this.state.runState = "busy";
      this.state.notice = null;
      this.emit();
      return true;
    } catch (err) {
      this.fail(err, `profile ${name}`);
      return false;
    }
  }

  async launchPlan(plan: unknown): Promise<boolean> {
    try {
      const out = await this.api.runTests(plan);
      this.state.plan = await this.api.planStatus(out.plan_id);
      this.state.runState = "busy";
      this.emit();
      return true;
    } catch (err) {
      this.fail(err, "plan");
      return false;
    }
  }

  toggleTheme(): Theme {
    this.state.theme = this.state.theme === "light" ? "dark" : "light";
    this.emit();
    return this.state.theme;
  }

  private fail(err: unknown, what: string): void {
    if (err instanceof ApiError) {
      this.state.notice =
        err.status === 409 ? `busy: ${err.body.code}` : `${what}: ${err.body.code} ${err.body.message}`;
    } else {
      this.state.notice = `${what} failed: connection error`;
      this.state.connected = false;
    }
    this.emit();
  }
}

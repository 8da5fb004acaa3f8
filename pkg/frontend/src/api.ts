// Typed client for the /api/v1 control plane. Every dashboard value
// originates from one of these calls.

import type {
  ApiErrorBody,
  GenerationCfg,
  PlanStatus,
  Snapshot,
  TimeseriesEntry,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export class ApiClient {
  constructor(
    private base: string = "/api/v1",
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (!resp.ok) {
      let parsed: ApiErrorBody;
      try {
        parsed = (await resp.json()) as ApiErrorBody;
      } catch {
        parsed = { code: `HTTP${resp.status}`, message: resp.statusText, path: "" };
      }
      throw new ApiError(resp.status, parsed);
    }
    return (await resp.json()) as T;
  }

  configure(cfg: GenerationCfg): Promise<GenerationCfg> {
    return this.request("POST", "/configure", cfg);
  }

  currentConfig(): Promise<GenerationCfg> {
    return this.request("GET", "/configure");
  }

  start(): Promise<{ state: string }> {
    return this.request("POST", "/start");
  }

  stop(): Promise<{ state: string }> {
    return this.request("POST", "/stop");
  }

  statistics(test = "live"): Promise<Snapshot> {
    return this.request("GET", `/statistics?test=${encodeURIComponent(test)}`);
  }

  timeseries(): Promise<TimeseriesEntry[]> {
    return this.request("GET", "/timeseries");
  }

  runTests(plan: unknown): Promise<{ plan_id: string; status: string }> {
    return this.request("POST", "/tests", plan);
  }

  planStatus(planId: string): Promise<PlanStatus> {
    return this.request("GET", `/tests/${planId}`);
  }

  runProfile(name: string, params: unknown): Promise<{ plan_id: string; status: string }> {
    return this.request("POST", `/profiles/${name}`, params);
  }

  setArp(port: number, enabled: boolean, mac?: string): Promise<unknown> {
    return this.request("PUT", `/ports/${port}/arp`, { enabled, mac });
  }

  /** Raw report bytes, exactly as the backend serialized them. */
  async downloadReport(planId: string, format: "json" | "csv"): Promise<Blob> {
    const resp = await this.fetchFn(`${this.base}/report/${planId}?format=${format}`, {
      method: "GET",
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, (await resp.json()) as ApiErrorBody);
    }
    return resp.blob();
  }
}

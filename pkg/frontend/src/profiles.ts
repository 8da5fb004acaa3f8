// Profile launcher and report downloads.

import { ApiClient } from "./api.js";
import type { DashboardController } from "./state.js";

export function saveBlob(blob: Blob, filename: string): void {
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}

export class ProfilePanel {
  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private controller: DashboardController,
  ) {
    this.render();
    controller.onChange(() => this.renderStatus());
  }

  private statusBox!: HTMLElement;

  private render(): void {
    this.root.innerHTML = `
      <h2>Test profiles</h2>
      <div class="profile-row">
        <strong>IMIX</strong>
        <label>total L1 rate (bit/s) <input id="imix-rate" value="10000000"></label>
        <label>duration (s) <input id="imix-duration" value="10"></label>
        <button id="imix-run" type="button">run</button>
      </div>
      <div class="profile-row">
        <strong>RFC 2544</strong>
        <label>max rate (bit/s) <input id="rfc-max" value="1000000000"></label>
        <label>frame sizes <input id="rfc-sizes" value="64, 512, 1518"></label>
        <label>trial (s) <input id="rfc-trial" value="5"></label>
        <button id="rfc-run" type="button">run</button>
      </div>
      <div id="profile-status"></div>
      <div class="profile-row">
        <strong>Report</strong>
        <label>plan id <input id="report-id" placeholder="plan-…"></label>
        <button id="dl-json" type="button">download JSON</button>
        <button id="dl-csv" type="button">download CSV</button>
      </div>`;
    this.statusBox = this.root.querySelector("#profile-status")!;

    this.root.querySelector("#imix-run")!.addEventListener("click", () => {
      void this.controller.launchProfile("imix", {
        total_rate_l1: Number((this.root.querySelector("#imix-rate") as HTMLInputElement).value),
        duration_s: Number((this.root.querySelector("#imix-duration") as HTMLInputElement).value),
      });
    });
    this.root.querySelector("#rfc-run")!.addEventListener("click", () => {
      void this.controller.launchProfile("rfc2544", {
        max_rate: Number((this.root.querySelector("#rfc-max") as HTMLInputElement).value),
        frame_sizes: (this.root.querySelector("#rfc-sizes") as HTMLInputElement).value
          .split(",")
          .map((s) => Number(s.trim()))
          .filter((n) => !Number.isNaN(n)),
        trial_duration_s: Number((this.root.querySelector("#rfc-trial") as HTMLInputElement).value),
      });
    });
    for (const [id, format] of [
      ["#dl-json", "json"],
      ["#dl-csv", "csv"],
    ] as const) {
      this.root.querySelector(id)!.addEventListener("click", () => {
        const planId =
          (this.root.querySelector("#report-id") as HTMLInputElement).value ||
          this.controller.state.plan?.plan_id ||
          "";
        if (!planId) return;
        void this.api
          .downloadReport(planId, format)
          .then((blob) => saveBlob(blob, `${planId}.${format}`))
          .catch(() => {
            this.statusBox.textContent = "report not available (still running?)";
          });
      });
    }
  }

  private renderStatus(): void {
    const st = this.controller.state;
    const parts: string[] = [];
    if (st.plan) {
      parts.push(
        `plan ${st.plan.plan_id}: ${st.plan.status}` +
          (st.plan.tests.length
            ? ` (${st.plan.completed}/${st.plan.tests.length}, current #${st.plan.current_index + 1})`
            : ""),
      );
    }
    if (st.notice) parts.push(st.notice);
    this.statusBox.textContent = parts.join(" — ");
  }
}

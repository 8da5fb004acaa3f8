// Live dashboard rendering: rate charts from /timeseries, tables and
// histograms from /statistics, banner on connection loss.

import { drawHistogram, drawLineChart } from "./charts.js";
import type { DashboardState } from "./state.js";
import { buildViewModel } from "./viewmodel.js";

const STREAM_COLUMNS: Array<[string, string]> = [
  ["streamId", "stream"],
  ["txRateL1", "TX L1"],
  ["txRateL2", "TX L2"],
  ["rxRateL1", "RX L1"],
  ["rxRateL2", "RX L2"],
  ["txFrames", "frames TX"],
  ["rxFrames", "frames RX"],
  ["lost", "lost"],
  ["outOfOrder", "out-of-order"],
  ["rttMean", "RTT mean"],
  ["rttMin", "RTT min"],
  ["rttMax", "RTT max"],
  ["iatMean", "IAT mean"],
];

export class DashboardView {
  private banner: HTMLElement;
  private rateCanvas: HTMLCanvasElement;
  private lossBox: HTMLElement;
  private streamTable: HTMLElement;
  private portBox: HTMLElement;

  constructor(root: HTMLElement) {
    root.innerHTML = `
      <div class="banner hidden" id="banner"></div>
      <section class="panel">
        <h2>Traffic rates (last hour, 100 ms buckets)</h2>
        <canvas id="rates" width="860" height="220"></canvas>
      </section>
      <section class="panel" id="loss-box"></section>
      <section class="panel">
        <h2>Streams</h2>
        <div id="stream-table"></div>
      </section>
      <section class="panel" id="port-box"></section>
    `;
    this.banner = root.querySelector("#banner")!;
    this.rateCanvas = root.querySelector("#rates")!;
    this.lossBox = root.querySelector("#loss-box")!;
    this.streamTable = root.querySelector("#stream-table")!;
    this.portBox = root.querySelector("#port-box")!;
  }

  render(state: DashboardState): void {
    if (!state.connected) {
      this.banner.textContent = state.stale
        ? "connection lost: data below is stale — retrying"
        : "backend unreachable — retrying";
      this.banner.classList.remove("hidden");
    } else {
      this.banner.classList.add("hidden");
    }

    const window = state.timeseries.slice(-600);
    drawLineChart(
      this.rateCanvas,
      [
        { label: "TX L1", color: "#2f81f7", values: window.map((e) => e.tx_rate_l1) },
        { label: "RX L1", color: "#3fb950", values: window.map((e) => e.rx_rate_l1) },
        { label: "TX L2", color: "#a371f7", values: window.map((e) => e.tx_rate_l2) },
        { label: "RX L2", color: "#d29922", values: window.map((e) => e.rx_rate_l2) },
      ],
      "bit/s",
    );

    if (!state.snapshot) return;
    const vm = buildViewModel(state.snapshot);

    // Each tile is one API field after formatting; nothing is derived.
    const tiles = vm.streams
      .map(
        (s) => `
      <div class="counter">
        <h3>stream ${s.streamId}</h3>
        <span class="big">${s.lost}</span> lost${s.lostFinal ? " (final)" : ""}
        · <span class="big">${s.outOfOrder}</span> out-of-order
      </div>`,
      )
      .join("");
    this.lossBox.innerHTML = `<h2>Loss & ordering</h2><div class="counters">${tiles}</div>`;

    const table = document.createElement("table");
    const head = table.insertRow();
    for (const [, title] of STREAM_COLUMNS) {
      const th = document.createElement("th");
      th.textContent = title;
      head.appendChild(th);
    }
    for (const row of vm.streams) {
      const tr = table.insertRow();
      for (const [key] of STREAM_COLUMNS) {
        const td = tr.insertCell();
        td.textContent = String(row[key as keyof typeof row]);
      }
      if (row.lostFinal) tr.classList.add("final");
    }
    this.streamTable.textContent = "";
    this.streamTable.appendChild(table);

    this.portBox.innerHTML = "<h2>Ports</h2>";
    for (const port of vm.ports) {
      const div = document.createElement("div");
      div.className = "port";
      div.innerHTML = `
        <h3>port ${port.portId}</h3>
        <p>TX ${port.txRateL1} (${port.txFrames} frames) ·
           RX ${port.rxRateL1} (${port.rxFrames} frames) ·
           largest gap ${port.maxGap}</p>
        <p>frame types: p4tg ${port.frameTypes["p4tg"] ?? "0"},
           arp ${port.frameTypes["arp"] ?? "0"},
           other ${port.frameTypes["other"] ?? "0"}</p>`;
      const canvas = document.createElement("canvas");
      canvas.width = 500;
      canvas.height = 140;
      div.appendChild(canvas);
      this.portBox.appendChild(div);
      drawHistogram(canvas, port.histogram);
    }
  }
}

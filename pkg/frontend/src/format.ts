// Unit formatting. This is the only arithmetic the UI applies to
// measurement values: scaling for display, nothing else.

const RATE_UNITS: Array<[number, string]> = [
  [1e9, "Gbit/s"],
  [1e6, "Mbit/s"],
  [1e3, "kbit/s"],
];

export function formatRate(bps: number): string {
  if (!isFinite(bps)) return "-";
  for (const [scale, unit] of RATE_UNITS) {
    if (Math.abs(bps) >= scale) {
      return `${(bps / scale).toFixed(2)} ${unit}`;
    }
  }
  return `${bps.toFixed(0)} bit/s`;
}

export function formatDurationNs(ns: number | null): string {
  if (ns === null || !isFinite(ns)) return "-";
  if (Math.abs(ns) >= 1e9) return `${(ns / 1e9).toFixed(3)} s`;
  if (Math.abs(ns) >= 1e6) return `${(ns / 1e6).toFixed(3)} ms`;
  if (Math.abs(ns) >= 1e3) return `${(ns / 1e3).toFixed(1)} µs`;
  return `${ns.toFixed(0)} ns`;
}

export function formatCount(n: number): string {
  return n.toLocaleString("en-US");
}

export function formatBytes(n: number): string {
  if (n >= 1 << 30) return `${(n / (1 << 30)).toFixed(2)} GiB`;
  if (n >= 1 << 20) return `${(n / (1 << 20)).toFixed(2)} MiB`;
  if (n >= 1024) return `${(n / 1024).toFixed(2)} KiB`;
  return `${n} B`;
}

export function formatPercent(fraction: number): string {
  return `${(fraction * 100).toFixed(2)} %`;
}

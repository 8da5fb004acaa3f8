// Small no-dependency canvas charts: a rate line chart and a histogram.

export interface Series {
  label: string;
  color: string;
  values: number[];
}

function css(name: string): string {
  return getComputedStyle(document.documentElement).getPropertyValue(name) || "#888";
}

export function drawLineChart(canvas: HTMLCanvasElement, series: Series[], unit: string): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.values);
  const max = Math.max(1, ...all);
  const pad = 28;

  ctx.strokeStyle = css("--chart-grid");
  ctx.fillStyle = css("--chart-text");
  ctx.font = "10px sans-serif";
  ctx.lineWidth = 1;
  for (let g = 0; g <= 4; g++) {
    const y = pad + ((h - 2 * pad) * g) / 4;
    ctx.beginPath();
    ctx.moveTo(pad, y);
    ctx.lineTo(w - 4, y);
    ctx.stroke();
    const value = max * (1 - g / 4);
    ctx.fillText(formatAxis(value) + unit, 2, y - 2);
  }

  for (const s of series) {
    if (s.values.length < 2) continue;
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.values.forEach((v, i) => {
      const x = pad + ((w - pad - 4) * i) / (s.values.length - 1);
      const y = pad + (h - 2 * pad) * (1 - v / max);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  let lx = pad;
  for (const s of series) {
    ctx.fillStyle = s.color;
    ctx.fillRect(lx, h - 12, 8, 8);
    ctx.fillStyle = css("--chart-text");
    ctx.fillText(s.label, lx + 10, h - 4);
    lx += ctx.measureText(s.label).width + 30;
  }
}

function formatAxis(v: number): string {
  if (v >= 1e9) return (v / 1e9).toFixed(1) + "G";
  if (v >= 1e6) return (v / 1e6).toFixed(1) + "M";
  if (v >= 1e3) return (v / 1e3).toFixed(1) + "k";
  return v.toFixed(0);
}

export function drawHistogram(canvas: HTMLCanvasElement, bins: Record<string, number>): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  const entries = Object.entries(bins);
  const max = Math.max(1, ...entries.map(([, v]) => v));
  const slot = w / entries.length;
  ctx.font = "9px sans-serif";
  entries.forEach(([label, value], i) => {
    const barH = (h - 24) * (value / max);
    ctx.fillStyle = css("--accent");
    ctx.fillRect(i * slot + 4, h - 14 - barH, slot - 8, barH);
    ctx.fillStyle = css("--chart-text");
    ctx.fillText(label, i * slot + 2, h - 4);
    if (value > 0) ctx.fillText(String(value), i * slot + 2, h - 18 - barH);
  });
}

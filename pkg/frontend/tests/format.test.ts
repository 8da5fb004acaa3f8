import { describe, expect, it } from "vitest";

import { formatBytes, formatCount, formatDurationNs, formatPercent, formatRate } from "../src/format.js";

describe("formatRate", () => {
  it("scales to the right unit", () => {
    expect(formatRate(100_000_000)).toBe("100.00 Mbit/s");
    expect(formatRate(1_500_000_000)).toBe("1.50 Gbit/s");
    expect(formatRate(2_500)).toBe("2.50 kbit/s");
    expect(formatRate(999)).toBe("999 bit/s");
    expect(formatRate(0)).toBe("0 bit/s");
  });
});

describe("formatDurationNs", () => {
  it("scales ns to readable units", () => {
    expect(formatDurationNs(5_000_000)).toBe("5.000 ms");
    expect(formatDurationNs(6_000_000)).toBe("6.000 ms");
    expect(formatDurationNs(1_500)).toBe("1.5 µs");
    expect(formatDurationNs(42)).toBe("42 ns");
    expect(formatDurationNs(2_000_000_000)).toBe("2.000 s");
    expect(formatDurationNs(null)).toBe("-");
  });
});

describe("counts and bytes", () => {
  it("formats counts with separators", () => {
    expect(formatCount(1234567)).toBe("1,234,567");
  });
  it("formats byte quantities", () => {
    expect(formatBytes(512)).toBe("512 B");
    expect(formatBytes(2048)).toBe("2.00 KiB");
  });
  it("formats fractions as percent", () => {
    expect(formatPercent(0.015)).toBe("1.50 %");
  });
});

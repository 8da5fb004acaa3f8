// Maps an API snapshot onto display strings. Every figure shown on the
// dashboard goes through here, and this module applies nothing beyond
// unit formatting: each output field is format(one API field).

import { formatCount, formatDurationNs, formatRate } from "./format.js";
import type { PortStats, Snapshot, StreamStats } from "./types.js";

export interface StreamRow {
  streamId: string;
  txRateL1: string;
  txRateL2: string;
  rxRateL1: string;
  rxRateL2: string;
  txFrames: string;
  rxFrames: string;
  lost: string;
  lostFinal: boolean;
  outOfOrder: string;
  rttMean: string;
  rttMin: string;
  rttMax: string;
  iatMean: string;
}

export interface PortRow {
  portId: string;
  txRateL1: string;
  rxRateL1: string;
  txFrames: string;
  rxFrames: string;
  maxGap: string;
  frameTypes: Record<string, string>;
  histogram: Record<string, number>; // raw counts feed the bar chart
}

export interface DashboardViewModel {
  streams: StreamRow[];
  ports: PortRow[];
}

export function streamRow(s: StreamStats): StreamRow {
  return {
    streamId: formatCount(s.stream_id),
    txRateL1: formatRate(s.tx_rate_l1),
    txRateL2: formatRate(s.tx_rate_l2),
    rxRateL1: formatRate(s.rx_rate_l1),
    rxRateL2: formatRate(s.rx_rate_l2),
    txFrames: formatCount(s.tx_frames),
    rxFrames: formatCount(s.rx_frames),
    lost: formatCount(s.lost),
    lostFinal: s.lost_is_final,
    outOfOrder: formatCount(s.out_of_order),
    rttMean: formatDurationNs(s.rtt.mean),
    rttMin: formatDurationNs(s.rtt.min),
    rttMax: formatDurationNs(s.rtt.max),
    iatMean: formatDurationNs(s.iat.mean),
  };
}

export function portRow(p: PortStats): PortRow {
  const frameTypes: Record<string, string> = {};
  for (const [kind, count] of Object.entries(p.frame_types)) {
    frameTypes[kind] = formatCount(count);
  }
  return {
    portId: formatCount(p.port_id),
    txRateL1: formatRate(p.tx_rate_l1),
    rxRateL1: formatRate(p.rx_rate_l1),
    txFrames: formatCount(p.tx_frames),
    rxFrames: formatCount(p.rx_frames),
    maxGap: formatDurationNs(p.max_gap_ns),
    frameTypes,
    histogram: { ...p.histogram },
  };
}

export function buildViewModel(snapshot: Snapshot): DashboardViewModel {
  const streamIds = Object.keys(snapshot.streams).sort((a, b) => Number(a) - Number(b));
  const portIds = Object.keys(snapshot.ports).sort((a, b) => Number(a) - Number(b));
  return {
    streams: streamIds.map((id) => streamRow(snapshot.streams[id])),
    ports: portIds.map((id) => portRow(snapshot.ports[id])),
  };
}

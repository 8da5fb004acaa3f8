// API payload shapes, mirroring the /api/v1 JSON bodies.

export interface SummaryStats {
  count: number;
  mean: number | null;
  min: number | null;
  max: number | null;
}

export interface StreamStats {
  stream_id: number;
  tx_frames: number;
  tx_bytes_l2: number;
  tx_rate_l1: number;
  tx_rate_l2: number;
  rx_frames: number;
  rx_bytes_l2: number;
  rx_rate_l1: number;
  rx_rate_l2: number;
  lost: number;
  lost_is_final: boolean;
  no_rx: boolean;
  out_of_order: number;
  duplicates: number;
  highest_seq: number | null;
  last_packet_seen: boolean;
  rtt: SummaryStats;
  iat: SummaryStats;
}

export interface PortStats {
  port_id: number;
  tx_frames: number;
  tx_bytes_l2: number;
  tx_rate_l1: number;
  tx_rate_l2: number;
  rx_frames: number;
  rx_bytes_l2: number;
  rx_rate_l1: number;
  rx_rate_l2: number;
  histogram: Record<string, number>;
  frame_types: Record<string, number>;
  iat: SummaryStats;
  max_gap_ns: number;
}

export interface Snapshot {
  ts_ns: number;
  streams: Record<string, StreamStats>;
  ports: Record<string, PortStats>;
}

export interface TimeseriesEntry {
  t: number;
  tx_rate_l1: number;
  tx_rate_l2: number;
  rx_rate_l1: number;
  rx_rate_l2: number;
  tx_frames: number;
  rx_frames: number;
  lost: number;
  out_of_order: number;
}

export interface PlanStatus {
  plan_id: string;
  kind: string;
  status: "pending" | "running" | "done" | "failed";
  current_index: number;
  tests: string[];
  completed: number;
  error: string | null;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  path: string;
}

// Configuration types (what the stream editor produces).

export interface VlanTagCfg {
  vlan_id: number;
  pcp?: number;
  dei?: number;
}

export interface MplsLseCfg {
  label: number;
  tc?: number;
  ttl?: number;
}

export interface Srv6Cfg {
  src: string;
  dst: string;
  segments: string[];
}

export interface VxlanCfg {
  outer_eth: { src_mac: string; dst_mac: string };
  outer_src: string;
  outer_dst: string;
  vni: number;
  udp_src_port?: number;
}

export interface EncapCfg {
  vlan?: VlanTagCfg | null;
  qinq?: { outer: VlanTagCfg; inner: VlanTagCfg } | null;
  mpls?: MplsLseCfg[];
  srv6?: Srv6Cfg | null;
  vxlan?: VxlanCfg | null;
}

export interface L3Cfg {
  version: 4 | 6;
  src: string;
  dst: string;
  src_random_mask?: string | number;
  dst_random_mask?: string | number;
  tos?: number;
  traffic_class?: number;
  flow_label?: number;
}

export interface StreamCfg {
  stream_id: number;
  mode: "CBR" | "POISSON";
  target_rate_l1: number;
  frame_size: number;
  eth: { src_mac: string; dst_mac: string };
  l3: L3Cfg;
  encap?: EncapCfg;
  tx_ports?: number[];
  udp_src_port?: number;
  udp_dst_port?: number;
}

export interface PortCfg {
  port_id: number;
  arp_reply_enabled?: boolean;
  arp_reply_mac?: string | null;
}

export interface GenerationCfg {
  streams: StreamCfg[];
  port_configs?: PortCfg[];
}

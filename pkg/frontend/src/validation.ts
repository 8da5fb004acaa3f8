// Client-side mirror of the server's configuration rules, for instant
// inline feedback. The server stays authoritative: these checks use the
// same error codes so a 400 response can be mapped onto the same field.

import type { EncapCfg, GenerationCfg, StreamCfg } from "./types.js";

export interface FieldError {
  code: string;
  path: string;
  message: string;
}

const MAC_RE = /^[0-9a-fA-F]{2}(:[0-9a-fA-F]{2}){5}$/;
const MAX_CBR_STREAMS = 7;
const MAX_MPLS_LSES = 15;
const MAX_SRV6_SEGMENTS = 3;
const MAX_IPV6_RANDOM_BITS = 48;

export function isValidMac(mac: string): boolean {
  return MAC_RE.test(mac);
}

export function isValidIpv4(addr: string): boolean {
  const parts = addr.split(".");
  if (parts.length !== 4) return false;
  return parts.every((p) => /^\d{1,3}$/.test(p) && Number(p) <= 255);
}

export function isValidIpv6(addr: string): boolean {
  if (!/^[0-9a-fA-F:.]+$/.test(addr) || !addr.includes(":")) return false;
  const twoColon = addr.split("::");
  if (twoColon.length > 2) return false;
  const groups = addr.split(/::?/).filter((g) => g.length > 0);
  if (twoColon.length === 1 && groups.length !== 8) return false;
  if (groups.length > 8) return false;
  return groups.every((g) => /^[0-9a-fA-F]{1,4}$/.test(g) || isValidIpv4(g));
}

export function maskBitCount(mask: string | number | undefined, version: 4 | 6): number {
  if (mask === undefined) return 0;
  let value: bigint;
  if (typeof mask === "number") {
    value = BigInt(mask);
  } else if (version === 4 && isValidIpv4(mask)) {
    value = mask.split(".").reduce((acc, p) => (acc << 8n) | BigInt(Number(p)), 0n);
  } else {
    try {
      value = ipv6ToBigInt(mask);
    } catch {
      return -1;
    }
  }
  let bits = 0;
  while (value > 0n) {
    bits += Number(value & 1n);
    value >>= 1n;
  }
  return bits;
}

function ipv6ToBigInt(addr: string): bigint {
  if (!isValidIpv6(addr)) throw new Error(`not an IPv6 address: ${addr}`);
  const [head, tail = ""] = addr.split("::");
  const headGroups = head ? head.split(":") : [];
  const tailGroups = tail ? tail.split(":") : [];
  const missing = 8 - headGroups.length - tailGroups.length;
  const groups = [...headGroups, ...Array(Math.max(0, missing)).fill("0"), ...tailGroups];
  return groups.reduce((acc, g) => (acc << 16n) | BigInt(parseInt(g || "0", 16)), 0n);
}

// Header length arithmetic, mirroring the encoder: needed to flag frames
// too small for their stack before the server sees them.
export function headerOverhead(stream: StreamCfg): number {
  const encap: EncapCfg = stream.encap ?? {};
  let total = 14; // Ethernet
  if (encap.vlan) total += 4;
  else if (encap.qinq) total += 8;
  total += 4 * (encap.mpls?.length ?? 0);
  if (encap.srv6) total += 40 + 8 + 16 * encap.srv6.segments.length;
  else total += stream.l3.version === 6 ? 40 : 20;
  total += 8 + 24; // UDP + measurement record
  if (encap.vxlan) total += 50;
  return total;
}

export function minFrameSize(stream: StreamCfg): number {
  return Math.max(64, headerOverhead(stream) + 4);
}

function validateStream(stream: StreamCfg, path: string, errors: FieldError[]): void {
  if (stream.stream_id < 1 || stream.stream_id > 255) {
    errors.push({ code: "InvalidFieldValue", path: `${path}.stream_id`, message: "stream id must be 1-255" });
  }
  if (stream.target_rate_l1 <= 0) {
    errors.push({ code: "InvalidFieldValue", path: `${path}.target_rate_l1`, message: "rate must be positive" });
  }
  if (stream.frame_size < 64 || stream.frame_size > 9000) {
    errors.push({
      code: "FrameSizeOutOfRange",
      path: `${path}.frame_size`,
      message: "frame size must be 64-9000 bytes",
    });
  } else if (stream.frame_size < minFrameSize(stream)) {
    errors.push({
      code: "FrameSmallerThanHeaders",
      path: `${path}.frame_size`,
      message: `this header stack needs at least ${minFrameSize(stream)} bytes`,
    });
  }
  if (!isValidMac(stream.eth.src_mac)) {
    errors.push({ code: "InvalidFieldValue", path: `${path}.eth.src_mac`, message: "not a MAC address" });
  }
  if (!isValidMac(stream.eth.dst_mac)) {
    errors.push({ code: "InvalidFieldValue", path: `${path}.eth.dst_mac`, message: "not a MAC address" });
  }
  const checkAddr = stream.l3.version === 6 ? isValidIpv6 : isValidIpv4;
  if (!checkAddr(stream.l3.src)) {
    errors.push({ code: "InvalidFieldValue", path: `${path}.l3.src`, message: "invalid address" });
  }
  if (!checkAddr(stream.l3.dst)) {
    errors.push({ code: "InvalidFieldValue", path: `${path}.l3.dst`, message: "invalid address" });
  }
  if (stream.l3.version === 6) {
    for (const field of ["src_random_mask", "dst_random_mask"] as const) {
      const bits = maskBitCount(stream.l3[field], 6);
      if (bits > MAX_IPV6_RANDOM_BITS) {
        errors.push({
          code: "RandomMaskTooWide",
          path: `${path}.l3.${field}`,
          message: `at most ${MAX_IPV6_RANDOM_BITS} bits may be randomized`,
        });
      }
    }
  }
  validateEncap(stream.encap ?? {}, `${path}.encap`, errors);
}

function validateEncap(encap: EncapCfg, path: string, errors: FieldError[]): void {
  if (encap.vlan && encap.qinq) {
    errors.push({ code: "VlanWithQinq", path, message: "VLAN and QinQ are mutually exclusive" });
  }
  const lses = encap.mpls ?? [];
  if (lses.length > MAX_MPLS_LSES) {
    errors.push({
      code: "TooManyLses",
      path: `${path}.mpls`,
      message: `at most ${MAX_MPLS_LSES} label stack entries`,
    });
  }
  lses.forEach((lse, i) => {
    if (lse.label < 0 || lse.label >= 1 << 20) {
      errors.push({ code: "InvalidFieldValue", path: `${path}.mpls[${i}].label`, message: "label is 20-bit" });
    }
  });
  if (encap.srv6) {
    const n = encap.srv6.segments.length;
    if (n < 1 || n > MAX_SRV6_SEGMENTS) {
      errors.push({
        code: "TooManySegments",
        path: `${path}.srv6.segments`,
        message: `1 to ${MAX_SRV6_SEGMENTS} segments`,
      });
    }
    if (encap.vxlan) {
      errors.push({ code: "Srv6WithVxlan", path, message: "SRv6 cannot be combined with VxLAN" });
    }
  }
  if (encap.vxlan) {
    if (encap.vxlan.vni < 0 || encap.vxlan.vni >= 1 << 24) {
      errors.push({ code: "InvalidFieldValue", path: `${path}.vxlan.vni`, message: "VNI is 24-bit" });
    }
  }
}

export function validateConfig(cfg: GenerationCfg): FieldError[] {
  const errors: FieldError[] = [];
  const cbr = cfg.streams.filter((s) => s.mode === "CBR");
  const poisson = cfg.streams.filter((s) => s.mode === "POISSON");
  if (cbr.length > 0 && poisson.length > 0) {
    errors.push({ code: "MixedModes", path: "streams", message: "CBR and Poisson streams cannot be mixed" });
  }
  if (cbr.length > MAX_CBR_STREAMS) {
    errors.push({
      code: "TooManyStreams",
      path: "streams",
      message: `at most ${MAX_CBR_STREAMS} CBR streams`,
    });
  }
  if (poisson.length > 1) {
    errors.push({ code: "TooManyStreams", path: "streams", message: "only one Poisson stream" });
  }
  const seen = new Set<number>();
  cfg.streams.forEach((s, i) => {
    if (seen.has(s.stream_id)) {
      errors.push({
        code: "DuplicateStreamId",
        path: `streams[${i}].stream_id`,
        message: `stream id ${s.stream_id} already used`,
      });
    }
    seen.add(s.stream_id);
    validateStream(s, `streams[${i}]`, errors);
  });
  (cfg.port_configs ?? []).forEach((p, i) => {
    if (p.arp_reply_enabled && !p.arp_reply_mac) {
      errors.push({
        code: "MissingArpMac",
        path: `port_configs[${i}].arp_reply_mac`,
        message: "reply MAC required when ARP replies are enabled",
      });
    }
  });
  return errors;
}

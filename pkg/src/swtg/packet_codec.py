"""Bit-exact frame encoder/decoder for the full header stack.

Wire layout, innermost to outermost: Ethernet, optional VLAN or QinQ
tags, optional MPLS label stack, IPv4/IPv6 (or the SRv6 outer IPv6 +
routing header in place of the plain L3 header), UDP, a 24-byte in-band
measurement record, random padding. An optional VxLAN layer wraps the
whole frame in outer Ethernet/IPv4/UDP/VxLAN headers.

The FCS is never materialized: encoded buffers are frame_size - 4 bytes
and the transport accounts for the missing 4 bytes in its rate math.
"""

from __future__ import annotations

import ipaddress
import struct
from dataclasses import dataclass
from random import Random

from .traffic_model import (
    EthernetSpec,
    IPv6Spec,
    StreamDescription,
)

MEASUREMENT_MAGIC = 0x50345447  # "P4TG"
MEASUREMENT_LEN = 24
FLAG_LAST_PACKET = 0x01

ETH_LEN = 14
VLAN_TAG_LEN = 4
MPLS_LSE_LEN = 4
IPV4_LEN = 20
IPV6_LEN = 40
SRH_FIXED_LEN = 8
SRV6_SEGMENT_LEN = 16
UDP_LEN = 8
VXLAN_LEN = 8
VXLAN_OVERHEAD = ETH_LEN + IPV4_LEN + UDP_LEN + VXLAN_LEN  # 50
FCS_LEN = 4
L1_FRAME_OVERHEAD = 20  # preamble (8) + inter-frame gap (12)

ETHERTYPE_IPV4 = 0x0800
ETHERTYPE_IPV6 = 0x86DD
ETHERTYPE_ARP = 0x0806
ETHERTYPE_VLAN = 0x8100
ETHERTYPE_QINQ = 0x88A8
ETHERTYPE_MPLS = 0x8847

IP_PROTO_UDP = 17
IPV6_NEXT_ROUTING = 43
SRH_ROUTING_TYPE = 4
VXLAN_UDP_PORT = 4789
ARP_OP_REQUEST = 1
ARP_OP_REPLY = 2

_MEAS_STRUCT = struct.Struct(">IBBHQQ")


class TruncatedFrame(Exception):
    """Frame ends before a recognized header's declared length."""


class NotAnArpRequest(Exception):
    pass


def mac_bytes(mac: str) -> bytes:
    return bytes(int(p, 16) for p in mac.split(":"))


def mac_str(b: bytes) -> str:
    return ":".join(f"{x:02x}" for x in b)


def ipv4_bytes(addr: str) -> bytes:
    return ipaddress.IPv4Address(addr).packed


def ipv6_bytes(addr: str) -> bytes:
    return ipaddress.IPv6Address(addr).packed


def _ones_sum(data: bytes) -> int:
    if len(data) & 1:
        data = data + b"\x00"
    return sum(struct.unpack(f">{len(data) >> 1}H", data))


def _fold(s: int) -> int:
    while s >> 16:
        s = (s & 0xFFFF) + (s >> 16)
    return s


def ipv4_header_checksum(header: bytes) -> int:
    return ~_fold(_ones_sum(header)) & 0xFFFF


def header_overhead(desc: StreamDescription) -> int:
    """Total header length of the stack, measurement record included.

    SRv6 contributes the outer IPv6 base header plus the fixed routing
    header and 16 bytes per segment in place of the plain L3 header;
    VxLAN adds its full 50-byte outer stack.
    """
    total = ETH_LEN
    if desc.encap.vlan is not None:
        total += VLAN_TAG_LEN
    elif desc.encap.qinq is not None:
        total += 2 * VLAN_TAG_LEN
    total += MPLS_LSE_LEN * len(desc.encap.mpls)
    if desc.encap.srv6 is not None:
        total += IPV6_LEN + SRH_FIXED_LEN + SRV6_SEGMENT_LEN * len(desc.encap.srv6.segments)
    elif isinstance(desc.l3, IPv6Spec):
        total += IPV6_LEN
    else:
        total += IPV4_LEN
    total += UDP_LEN + MEASUREMENT_LEN
    if desc.encap.vxlan is not None:
        total += VXLAN_OVERHEAD
    return total


class FrameFactory:
    """Compiled per-stream encoder.

    Builds the static template once; build() patches the per-frame
    fields (sequence number, timestamp, randomized address bits, random
    padding) and fixes up checksums incrementally.
    """

    def __init__(self, desc: StreamDescription) -> None:
        self.desc = desc
        self.wire_len = desc.frame_size - FCS_LEN
        overhead = header_overhead(desc)
        if self.wire_len < overhead:
            raise ValueError(
                f"frame_size {desc.frame_size} cannot hold {overhead} header bytes plus FCS"
            )
        self.pad_len = self.wire_len - overhead
        self._build_template()

    def _build_template(self) -> None:
        desc = self.desc
        encap = desc.encap
        srv6 = encap.srv6
        use_ipv6 = srv6 is not None or isinstance(desc.l3, IPv6Spec)
        l3_ethertype = ETHERTYPE_IPV6 if use_ipv6 else ETHERTYPE_IPV4

        buf = bytearray()

        def eth(spec: EthernetSpec, ethertype: int) -> None:
            buf.extend(mac_bytes(spec.dst_mac))
            buf.extend(mac_bytes(spec.src_mac))
            buf.extend(struct.pack(">H", ethertype))

        def vlan_tci(tag) -> int:
            return (tag.pcp << 13) | (tag.dei << 12) | tag.vlan_id

        after_tags = ETHERTYPE_MPLS if encap.mpls else l3_ethertype
        if encap.vlan is not None:
            eth(desc.eth, ETHERTYPE_VLAN)
            buf.extend(struct.pack(">HH", vlan_tci(encap.vlan), after_tags))
        elif encap.qinq is not None:
            eth(desc.eth, ETHERTYPE_QINQ)
            buf.extend(struct.pack(">HH", vlan_tci(encap.qinq.outer), ETHERTYPE_VLAN))
            buf.extend(struct.pack(">HH", vlan_tci(encap.qinq.inner), after_tags))
        else:
            eth(desc.eth, after_tags)

        for i, lse in enumerate(encap.mpls):
            bottom = 1 if i == len(encap.mpls) - 1 else 0
            buf.extend(
                struct.pack(">I", (lse.label << 12) | (lse.tc << 9) | (bottom << 8) | lse.ttl)
            )

        self._l3_off = len(buf)
        udp_len = UDP_LEN + MEASUREMENT_LEN + self.pad_len

        self._src_off = self._dst_off = None
        self._src_mask = self._dst_mask = 0
        self._addr_len = 0
        self._ipv4_ck_off = None
        self._udp6_pseudo: bytes | None = None

        if srv6 is not None:
            nseg = len(srv6.segments)
            payload_len = SRH_FIXED_LEN + SRV6_SEGMENT_LEN * nseg + udp_len
            buf.extend(
                struct.pack(
                    ">IHBB",
                    (6 << 28),
                    payload_len,
                    IPV6_NEXT_ROUTING,
                    64,
                )
            )
            buf.extend(ipv6_bytes(srv6.src))
            buf.extend(ipv6_bytes(srv6.dst))
            # SRH: segments stored in reverse traversal order; Segments
            # Left starts at count - 1 (ingress behavior).
            buf.extend(
                struct.pack(
                    ">BBBBBBH",
                    IP_PROTO_UDP,
                    2 * nseg,
                    SRH_ROUTING_TYPE,
                    nseg - 1,
                    nseg - 1,
                    0,
                    0,
                )
            )
            for seg in reversed(srv6.segments):
                buf.extend(ipv6_bytes(seg))
            # Pseudo-header destination is the final segment of the path.
            pseudo_src = ipv6_bytes(srv6.src)
            pseudo_dst = ipv6_bytes(srv6.segments[-1])
            self._udp6_pseudo = pseudo_src + pseudo_dst + struct.pack(
                ">IHBB", udp_len, 0, 0, IP_PROTO_UDP
            )
        elif isinstance(desc.l3, IPv6Spec):
            l3 = desc.l3
            buf.extend(
                struct.pack(
                    ">IHBB",
                    (6 << 28) | (l3.traffic_class << 20) | l3.flow_label,
                    udp_len,
                    IP_PROTO_UDP,
                    64,
                )
            )
            self._src_off = len(buf)
            buf.extend(ipv6_bytes(l3.src))
            self._dst_off = len(buf)
            buf.extend(ipv6_bytes(l3.dst))
            self._src_mask = l3.src_random_mask
            self._dst_mask = l3.dst_random_mask
            self._addr_len = 16
            self._udp6_pseudo = (
                ipv6_bytes(l3.src)
                + ipv6_bytes(l3.dst)
                + struct.pack(">IHBB", udp_len, 0, 0, IP_PROTO_UDP)
            )
        else:
            l3 = desc.l3
            total_len = IPV4_LEN + udp_len
            buf.extend(
                struct.pack(
                    ">BBHHHBBH",
                    0x45,
                    l3.tos,
                    total_len,
                    0,
                    0,
                    64,
                    IP_PROTO_UDP,
                    0,
                )
            )
            self._ipv4_ck_off = len(buf) - 2
            self._src_off = len(buf)
            buf.extend(ipv4_bytes(l3.src))
            self._dst_off = len(buf)
            buf.extend(ipv4_bytes(l3.dst))
            self._src_mask = l3.src_random_mask
            self._dst_mask = l3.dst_random_mask
            self._addr_len = 4

        self._udp_off = len(buf)
        buf.extend(struct.pack(">HHHH", desc.udp_src_port, desc.udp_dst_port, udp_len, 0))
        self._meas_off = len(buf)
        buf.extend(_MEAS_STRUCT.pack(MEASUREMENT_MAGIC, desc.stream_id, 0, 0, 0, 0))
        self._pad_off = len(buf)
        buf.extend(bytes(self.pad_len))

        if encap.vxlan is not None:
            vx = encap.vxlan
            inner = buf
            outer = bytearray()
            outer.extend(mac_bytes(vx.outer_eth.dst_mac))
            outer.extend(mac_bytes(vx.outer_eth.src_mac))
            outer.extend(struct.pack(">H", ETHERTYPE_IPV4))
            outer_udp_len = UDP_LEN + VXLAN_LEN + len(inner)
            outer_ip = bytearray(
                struct.pack(
                    ">BBHHHBBH",
                    0x45,
                    vx.outer_tos,
                    IPV4_LEN + outer_udp_len,
                    0,
                    0,
                    64,
                    IP_PROTO_UDP,
                    0,
                )
            )
            outer_ip += ipv4_bytes(vx.outer_src) + ipv4_bytes(vx.outer_dst)
            struct.pack_into(">H", outer_ip, 10, ipv4_header_checksum(bytes(outer_ip)))
            outer.extend(outer_ip)
            outer.extend(
                struct.pack(">HHHH", vx.udp_src_port, VXLAN_UDP_PORT, outer_udp_len, 0)
            )
            outer.extend(b"\x08\x00\x00\x00")  # I flag set: VNI valid
            outer.extend(vx.vni.to_bytes(3, "big") + b"\x00")
            shift = len(outer)
            buf = outer + inner
            for attr in ("_l3_off", "_udp_off", "_meas_off", "_pad_off"):
                setattr(self, attr, getattr(self, attr) + shift)
            if self._src_off is not None:
                self._src_off += shift
                self._dst_off += shift
            if self._ipv4_ck_off is not None:
                self._ipv4_ck_off += shift

        assert len(buf) == self.wire_len
        self._template = bytes(buf)
        self._seq_off = self._meas_off + 8
        self._ts_off = self._meas_off + 16
        self._flags_off = self._meas_off + 5

        self._randomized = bool(self._src_mask or self._dst_mask)
        if self._randomized:
            self._src_tmpl = int.from_bytes(
                self._template[self._src_off : self._src_off + self._addr_len], "big"
            )
            self._dst_tmpl = int.from_bytes(
                self._template[self._dst_off : self._dst_off + self._addr_len], "big"
            )

        if self._ipv4_ck_off is not None:
            # Checksum base over the header with addresses zeroed; per-frame
            # address words are folded in afterwards.
            ip_off = self._l3_off
            hdr = bytearray(self._template[ip_off : ip_off + IPV4_LEN])
            hdr[12:20] = bytes(8)
            self._ipv4_ck_base = _ones_sum(bytes(hdr))
            if not self._randomized:
                ck = self._finish_ipv4_ck(
                    self._template[self._src_off : self._src_off + 4],
                    self._template[self._dst_off : self._dst_off + 4],
                )
                t = bytearray(self._template)
                struct.pack_into(">H", t, self._ipv4_ck_off, ck)
                self._template = bytes(t)

        if self._udp6_pseudo is not None:
            # Base sum: pseudo header (addresses zeroed if randomized) plus
            # the UDP region with every per-frame byte zeroed. The zeroed
            # window covers the stream_id/flags word through the timestamp
            # so the per-frame pass can sum that window as one block.
            pseudo = bytearray(self._udp6_pseudo)
            if self._randomized:
                pseudo[0:32] = bytes(32)
            scratch = bytearray(self._template[self._udp_off :])
            rel = self._meas_off - self._udp_off
            scratch[rel + 4 : rel + MEASUREMENT_LEN] = bytes(MEASUREMENT_LEN - 4)
            self._udp6_base = _ones_sum(bytes(pseudo)) + _ones_sum(bytes(scratch))

    def _finish_ipv4_ck(self, src: bytes, dst: bytes) -> int:
        return ~_fold(self._ipv4_ck_base + _ones_sum(src + dst)) & 0xFFFF

    def build(self, seq: int, tx_ts: int, rng: Random | None = None, flags: int = 0) -> bytes:
        """Encode one frame. rng is consumed for randomized address bits
        (src first, then dst) and then for the padding bytes."""
        buf = bytearray(self._template)
        struct.pack_into(">QQ", buf, self._seq_off, seq, tx_ts)
        if flags:
            buf[self._flags_off] = flags

        src_b = dst_b = None
        if self._randomized:
            if rng is None:
                raise ValueError("rng required for randomized addresses")
            n = self._addr_len
            bits = n * 8
            src_v = self._src_tmpl
            if self._src_mask:
                src_v = (src_v & ~self._src_mask) | (rng.getrandbits(bits) & self._src_mask)
            dst_v = self._dst_tmpl
            if self._dst_mask:
                dst_v = (dst_v & ~self._dst_mask) | (rng.getrandbits(bits) & self._dst_mask)
            src_b = src_v.to_bytes(n, "big")
            dst_b = dst_v.to_bytes(n, "big")
            buf[self._src_off : self._src_off + n] = src_b
            buf[self._dst_off : self._dst_off + n] = dst_b
            if self._ipv4_ck_off is not None:
                struct.pack_into(
                    ">H", buf, self._ipv4_ck_off, self._finish_ipv4_ck(src_b, dst_b)
                )

        if self.pad_len:
            if rng is None:
                raise ValueError("rng required for payload padding")
            buf[self._pad_off :] = rng.randbytes(self.pad_len)

        if self._udp6_pseudo is not None:
            s = self._udp6_base
            s += _ones_sum(buf[self._meas_off + 4 : self._meas_off + MEASUREMENT_LEN])
            if self.pad_len:
                s += _ones_sum(buf[self._pad_off :])
            if self._randomized:
                s += _ones_sum(src_b + dst_b)
            ck = ~_fold(s) & 0xFFFF
            struct.pack_into(">H", buf, self._udp_off + 6, ck or 0xFFFF)

        return bytes(buf)


def encode_frame(
    desc: StreamDescription,
    seq: int,
    tx_ts: int,
    rng: Random | None = None,
    flags: int = 0,
) -> bytes:
    """One-shot frame encoding; see FrameFactory for the compiled form."""
    return FrameFactory(desc).build(seq, tx_ts, rng, flags)


# --- Decoding ----------------------------------------------------------------


@dataclass
class ParsedFrame:
    frame_size: int  # wire bytes, FCS not included
    is_p4tg: bool
    stream_id: int | None
    seq: int | None
    tx_ts: int | None
    flags: int | None
    layers: tuple[tuple[str, dict], ...]


def _need(data: bytes, off: int, n: int, what: str) -> None:
    if off + n > len(data):
        raise TruncatedFrame(f"{what} needs {n} bytes at offset {off}, frame has {len(data)}")


def decode_frame(data: bytes) -> ParsedFrame:
    """Decode the full layer stack.

    Frames without the measurement magic come back with is_p4tg=False and
    whatever layers were recognizable; structurally truncated recognized
    headers raise TruncatedFrame.
    """
    layers: list[tuple[str, dict]] = []
    stream_id = seq = tx_ts = flags = None
    is_p4tg = False

    _need(data, 0, ETH_LEN, "ethernet")
    off = 0

    def parse_eth(off: int) -> tuple[int, int]:
        _need(data, off, ETH_LEN, "ethernet")
        dst = mac_str(data[off : off + 6])
        src = mac_str(data[off + 6 : off + 12])
        (ethertype,) = struct.unpack_from(">H", data, off + 12)
        layers.append(("eth", {"dst_mac": dst, "src_mac": src, "ethertype": ethertype}))
        return off + ETH_LEN, ethertype

    def parse_udp_payload(off: int) -> None:
        nonlocal stream_id, seq, tx_ts, flags, is_p4tg
        if len(data) - off >= MEASUREMENT_LEN:
            magic, sid, fl, _resv, sq, ts = _MEAS_STRUCT.unpack_from(data, off)
            if magic == MEASUREMENT_MAGIC:
                is_p4tg = True
                stream_id, seq, tx_ts, flags = sid, sq, ts, fl
                layers.append(
                    ("p4tg", {"stream_id": sid, "seq": sq, "tx_ts": ts, "flags": fl})
                )
                if len(data) > off + MEASUREMENT_LEN:
                    layers.append(("payload", {"length": len(data) - off - MEASUREMENT_LEN}))
                return
        if len(data) > off:
            layers.append(("payload", {"length": len(data) - off}))

    def parse_rest(off: int, ethertype: int) -> None:
        while True:
            if ethertype in (ETHERTYPE_VLAN, ETHERTYPE_QINQ):
                _need(data, off, 4, "vlan tag")
                tci, inner_et = struct.unpack_from(">HH", data, off)
                layers.append(
                    (
                        "vlan",
                        {
                            "tpid": ethertype,
                            "pcp": tci >> 13,
                            "dei": (tci >> 12) & 1,
                            "vlan_id": tci & 0xFFF,
                        },
                    )
                )
                off += 4
                ethertype = inner_et
                continue
            if ethertype == ETHERTYPE_MPLS:
                lses = []
                while True:
                    _need(data, off, MPLS_LSE_LEN, "mpls lse")
                    (word,) = struct.unpack_from(">I", data, off)
                    off += MPLS_LSE_LEN
                    lses.append(
                        {
                            "label": word >> 12,
                            "tc": (word >> 9) & 0x7,
                            "bottom": (word >> 8) & 1,
                            "ttl": word & 0xFF,
                        }
                    )
                    if (word >> 8) & 1:
                        break
                layers.append(("mpls", {"lses": lses}))
                _need(data, off, 1, "post-mpls payload")
                nibble = data[off] >> 4
                ethertype = ETHERTYPE_IPV4 if nibble == 4 else ETHERTYPE_IPV6
                continue
            if ethertype == ETHERTYPE_ARP:
                arp = parse_arp_payload(data, off)
                layers.append(("arp", arp))
                return
            if ethertype == ETHERTYPE_IPV4:
                _need(data, off, IPV4_LEN, "ipv4")
                ver_ihl, tos, total_len, _i, _f, ttl, proto, _ck = struct.unpack_from(
                    ">BBHHHBBH", data, off
                )
                src = str(ipaddress.IPv4Address(data[off + 12 : off + 16]))
                dst = str(ipaddress.IPv4Address(data[off + 16 : off + 20]))
                layers.append(
                    (
                        "ipv4",
                        {
                            "tos": tos,
                            "total_length": total_len,
                            "ttl": ttl,
                            "protocol": proto,
                            "src": src,
                            "dst": dst,
                        },
                    )
                )
                ihl = (ver_ihl & 0xF) * 4
                _need(data, off, ihl, "ipv4 options")
                off += ihl
                if proto == IP_PROTO_UDP:
                    break
                layers.append(("payload", {"length": len(data) - off}))
                return
            if ethertype == ETHERTYPE_IPV6:
                _need(data, off, IPV6_LEN, "ipv6")
                (word,) = struct.unpack_from(">I", data, off)
                payload_len, next_header, hop = struct.unpack_from(">HBB", data, off + 4)
                src = str(ipaddress.IPv6Address(data[off + 8 : off + 24]))
                dst = str(ipaddress.IPv6Address(data[off + 24 : off + 40]))
                layers.append(
                    (
                        "ipv6",
                        {
                            "traffic_class": (word >> 20) & 0xFF,
                            "flow_label": word & 0xFFFFF,
                            "payload_length": payload_len,
                            "hop_limit": hop,
                            "src": src,
                            "dst": dst,
                        },
                    )
                )
                off += IPV6_LEN
                while next_header == IPV6_NEXT_ROUTING:
                    _need(data, off, SRH_FIXED_LEN, "srh")
                    nh, ext_len, rtype, seg_left, last_entry, sr_flags, tag = struct.unpack_from(
                        ">BBBBBBH", data, off
                    )
                    srh_len = (ext_len + 1) * 8
                    _need(data, off, srh_len, "srh segments")
                    segments = [
                        str(ipaddress.IPv6Address(data[p : p + 16]))
                        for p in range(off + SRH_FIXED_LEN, off + srh_len, 16)
                    ]
                    layers.append(
                        (
                            "srh",
                            {
                                "routing_type": rtype,
                                "segments_left": seg_left,
                                "last_entry": last_entry,
                                "flags": sr_flags,
                                "tag": tag,
                                "segments": segments,
                            },
                        )
                    )
                    off += srh_len
                    next_header = nh
                if next_header == IP_PROTO_UDP:
                    break
                layers.append(("payload", {"length": len(data) - off}))
                return
            layers.append(("payload", {"length": len(data) - off, "ethertype": ethertype}))
            return

        # UDP
        _need(data, off, UDP_LEN, "udp")
        sport, dport, ulen, ck = struct.unpack_from(">HHHH", data, off)
        layers.append(
            ("udp", {"src_port": sport, "dst_port": dport, "length": ulen, "checksum": ck})
        )
        off += UDP_LEN
        if dport == VXLAN_UDP_PORT or sport == VXLAN_UDP_PORT:
            _need(data, off, VXLAN_LEN, "vxlan")
            vx_flags = data[off]
            vni = int.from_bytes(data[off + 4 : off + 7], "big")
            layers.append(("vxlan", {"flags": vx_flags, "vni": vni}))
            off += VXLAN_LEN
            off, inner_et = parse_eth(off)
            parse_rest(off, inner_et)
            return
        parse_udp_payload(off)

    off, ethertype = parse_eth(0)
    parse_rest(off, ethertype)

    return ParsedFrame(
        frame_size=len(data),
        is_p4tg=is_p4tg,
        stream_id=stream_id,
        seq=seq,
        tx_ts=tx_ts,
        flags=flags,
        layers=tuple(layers),
    )


KIND_P4TG = 0
KIND_ARP = 1
KIND_OTHER = 2


def classify_fast(data: bytes) -> tuple[int, int, int, int, int]:
    """Minimal-allocation classifier for the hot receive path.

    Returns (kind, stream_id, seq, tx_ts, flags); the last four are zero
    for non-measurement frames. Walks the same header chain as
    decode_frame but builds no layer objects and never raises.
    """
    n = len(data)
    if n < ETH_LEN:
        return (KIND_OTHER, 0, 0, 0, 0)
    et = (data[12] << 8) | data[13]
    off = ETH_LEN
    while True:
        if et == ETHERTYPE_VLAN or et == ETHERTYPE_QINQ:
            if off + 4 > n:
                return (KIND_OTHER, 0, 0, 0, 0)
            et = (data[off + 2] << 8) | data[off + 3]
            off += 4
            continue
        if et == ETHERTYPE_MPLS:
            while True:
                if off + 4 > n:
                    return (KIND_OTHER, 0, 0, 0, 0)
                bottom = data[off + 2] & 1
                off += 4
                if bottom:
                    break
            if off >= n:
                return (KIND_OTHER, 0, 0, 0, 0)
            et = ETHERTYPE_IPV4 if (data[off] >> 4) == 4 else ETHERTYPE_IPV6
            continue
        break
    if et == ETHERTYPE_ARP:
        return (KIND_ARP, 0, 0, 0, 0)
    if et == ETHERTYPE_IPV4:
        if off + IPV4_LEN > n or data[off + 9] != IP_PROTO_UDP:
            return (KIND_OTHER, 0, 0, 0, 0)
        off += (data[off] & 0xF) * 4
    elif et == ETHERTYPE_IPV6:
        if off + IPV6_LEN > n:
            return (KIND_OTHER, 0, 0, 0, 0)
        nh = data[off + 6]
        off += IPV6_LEN
        while nh == IPV6_NEXT_ROUTING:
            if off + SRH_FIXED_LEN > n:
                return (KIND_OTHER, 0, 0, 0, 0)
            nh = data[off]
            off += (data[off + 1] + 1) * 8
        if nh != IP_PROTO_UDP:
            return (KIND_OTHER, 0, 0, 0, 0)
    else:
        return (KIND_OTHER, 0, 0, 0, 0)
    if off + UDP_LEN > n:
        return (KIND_OTHER, 0, 0, 0, 0)
    dport = (data[off + 2] << 8) | data[off + 3]
    sport = (data[off] << 8) | data[off + 1]
    off += UDP_LEN
    if dport == VXLAN_UDP_PORT or sport == VXLAN_UDP_PORT:
        inner_off = off + VXLAN_LEN
        if inner_off + ETH_LEN > n:
            return (KIND_OTHER, 0, 0, 0, 0)
        return classify_fast(data[inner_off:])
    if off + MEASUREMENT_LEN > n:
        return (KIND_OTHER, 0, 0, 0, 0)
    magic, sid, fl, _resv, sq, ts = _MEAS_STRUCT.unpack_from(data, off)
    if magic != MEASUREMENT_MAGIC:
        return (KIND_OTHER, 0, 0, 0, 0)
    return (KIND_P4TG, sid, sq, ts, fl)


# --- ARP ---------------------------------------------------------------------


@dataclass(frozen=True)
class ParsedArp:
    opcode: int
    sender_mac: str
    sender_ip: str
    target_mac: str
    target_ip: str


ARP_FRAME_LEN = ETH_LEN + 28


def parse_arp_payload(data: bytes, off: int) -> dict:
    _need(data, off, 28, "arp")
    htype, ptype, hlen, plen, oper = struct.unpack_from(">HHBBH", data, off)
    return {
        "htype": htype,
        "ptype": ptype,
        "opcode": oper,
        "sender_mac": mac_str(data[off + 8 : off + 14]),
        "sender_ip": str(ipaddress.IPv4Address(data[off + 14 : off + 18])),
        "target_mac": mac_str(data[off + 18 : off + 24]),
        "target_ip": str(ipaddress.IPv4Address(data[off + 24 : off + 28])),
    }


def parse_arp(data: bytes) -> ParsedArp | None:
    """Return the ARP payload if the frame is an Ethernet ARP frame."""
    if len(data) < ARP_FRAME_LEN:
        return None
    if struct.unpack_from(">H", data, 12)[0] != ETHERTYPE_ARP:
        return None
    fields = parse_arp_payload(data, ETH_LEN)
    return ParsedArp(
        opcode=fields["opcode"],
        sender_mac=fields["sender_mac"],
        sender_ip=fields["sender_ip"],
        target_mac=fields["target_mac"],
        target_ip=fields["target_ip"],
    )


def _arp_body(oper: int, sha: str, spa: str, tha: str, tpa: str) -> bytes:
    return (
        struct.pack(">HHBBH", 1, ETHERTYPE_IPV4, 6, 4, oper)
        + mac_bytes(sha)
        + ipv4_bytes(spa)
        + mac_bytes(tha)
        + ipv4_bytes(tpa)
    )


def encode_arp_request(target_ip: str, requester_mac: str, requester_ip: str) -> bytes:
    """Broadcast who-has request, as a DUT-side host would emit it."""
    return (
        mac_bytes("ff:ff:ff:ff:ff:ff")
        + mac_bytes(requester_mac)
        + struct.pack(">H", ETHERTYPE_ARP)
        + _arp_body(ARP_OP_REQUEST, requester_mac, requester_ip, "00:00:00:00:00:00", target_ip)
    )


def encode_arp_reply(request: ParsedArp, reply_mac: str) -> bytes:
    """Answer an ARP request claiming the requested IP with reply_mac."""
    if request.opcode != ARP_OP_REQUEST:
        raise NotAnArpRequest(f"opcode {request.opcode}")
    return (
        mac_bytes(request.sender_mac)
        + mac_bytes(reply_mac)
        + struct.pack(">H", ETHERTYPE_ARP)
        + _arp_body(
            ARP_OP_REPLY, reply_mac, request.target_ip, request.sender_mac, request.sender_ip
        )
    )

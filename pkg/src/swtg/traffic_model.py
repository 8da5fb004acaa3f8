"""Domain types and validation for stream and port configuration.

Everything a user can configure lives here: traffic streams with their
header stacks and randomization masks, per-port settings, and the rules
that decide whether a configuration is runnable. Values are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
import ipaddress
import re
from dataclasses import dataclass, field, replace
from typing import Union

MIN_FRAME_SIZE = 64
MAX_FRAME_SIZE = 9000
MAX_CBR_STREAMS = 7
MAX_MPLS_LSES = 15
MAX_SRV6_SEGMENTS = 3
MAX_IPV6_RANDOM_BITS = 48
MIN_STREAM_ID = 1
MAX_STREAM_ID = 255

DEFAULT_UDP_PORT = 50083

_MAC_RE = re.compile(r"^[0-9a-fA-F]{2}(:[0-9a-fA-F]{2}){5}$")


class TrafficMode(enum.Enum):
    CBR = "CBR"
    POISSON = "POISSON"


class DeviceProfile(enum.Enum):
    """Capability profile mirroring the two supported hardware generations.

    SRv6 encapsulation needs GEN2.
    """

    GEN1 = "gen1"
    GEN2 = "gen2"


class ValidationError(Exception):
    """A configuration rule violation, with a machine-readable code and
    the path of the offending element."""

    def __init__(self, code: str, path: str, message: str) -> None:
        super().__init__(f"{code} at {path}: {message}")
        self.code = code
        self.path = path
        self.message = message


@dataclass(frozen=True)
class EthernetSpec:
    src_mac: str
    dst_mac: str


@dataclass(frozen=True)
class IPv4Spec:
    src: str
    dst: str
    src_random_mask: int = 0
    dst_random_mask: int = 0
    tos: int = 0

    @property
    def version(self) -> int:
        return 4


@dataclass(frozen=True)
class IPv6Spec:
    src: str
    dst: str
    src_random_mask: int = 0
    dst_random_mask: int = 0
    traffic_class: int = 0
    flow_label: int = 0

    @property
    def version(self) -> int:
        return 6


L3Spec = Union[IPv4Spec, IPv6Spec]


@dataclass(frozen=True)
class VlanTag:
    vlan_id: int
    pcp: int = 0
    dei: int = 0


@dataclass(frozen=True)
class QinQTag:
    outer: VlanTag
    inner: VlanTag


@dataclass(frozen=True)
class MplsLse:
    label: int
    tc: int = 0
    ttl: int = 64


@dataclass(frozen=True)
class Srv6Spec:
    """SRv6 encapsulation: outer IPv6 base header plus a segment list.

    Segments are given in traversal order; the encoder stores them
    reversed, as the wire format requires.
    """

    src: str
    dst: str
    segments: tuple[str, ...]


@dataclass(frozen=True)
class VxlanSpec:
    outer_eth: EthernetSpec
    outer_src: str
    outer_dst: str
    vni: int
    udp_src_port: int = 49152
    outer_tos: int = 0


@dataclass(frozen=True)
class EncapsulationStack:
    vlan: VlanTag | None = None
    qinq: QinQTag | None = None
    mpls: tuple[MplsLse, ...] = ()
    srv6: Srv6Spec | None = None
    vxlan: VxlanSpec | None = None

    def is_empty(self) -> bool:
        return (
            self.vlan is None
            and self.qinq is None
            and not self.mpls
            and self.srv6 is None
            and self.vxlan is None
        )


@dataclass(frozen=True)
class StreamDescription:
    stream_id: int
    mode: TrafficMode
    target_rate_l1: float
    frame_size: int
    eth: EthernetSpec
    l3: L3Spec
    encap: EncapsulationStack = field(default_factory=EncapsulationStack)
    tx_ports: frozenset[int] = frozenset({0})
    udp_src_port: int = DEFAULT_UDP_PORT
    udp_dst_port: int = DEFAULT_UDP_PORT


@dataclass(frozen=True)
class PortConfig:
    port_id: int
    arp_reply_enabled: bool = False
    arp_reply_mac: str | None = None


@dataclass(frozen=True)
class GenerationConfig:
    streams: tuple[StreamDescription, ...]
    port_configs: tuple[PortConfig, ...] = ()


@dataclass(frozen=True)
class ValidatedConfig:
    """A GenerationConfig that has passed validate_config.

    Carries the device profile it was validated against so downstream
    components never need to re-check capability rules.
    """

    config: GenerationConfig
    device_profile: DeviceProfile

    @property
    def streams(self) -> tuple[StreamDescription, ...]:
        return self.config.streams

    @property
    def port_configs(self) -> tuple[PortConfig, ...]:
        return self.config.port_configs


def normalize_mac(mac: str, path: str = "mac") -> str:
    if not isinstance(mac, str) or not _MAC_RE.match(mac):
        raise ValidationError(
            "InvalidFieldValue", path, f"not a MAC address: {mac!r}"
        )
    return mac.lower()


def _check_uint(value: int, bits: int, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError("InvalidFieldValue", path, f"expected integer, got {value!r}")
    if not 0 <= value < (1 << bits):
        raise ValidationError(
            "InvalidFieldValue", path, f"{value} out of range for {bits}-bit field"
        )
    return value


def _check_addr(addr: str, version: int, path: str) -> str:
    try:
        if version == 4:
            return str(ipaddress.IPv4Address(addr))
        return str(ipaddress.IPv6Address(addr))
    except (ipaddress.AddressValueError, ValueError) as exc:
        raise ValidationError("InvalidFieldValue", path, str(exc)) from None


def _validate_eth(eth: EthernetSpec, path: str) -> None:
    normalize_mac(eth.src_mac, f"{path}.src_mac")
    normalize_mac(eth.dst_mac, f"{path}.dst_mac")


def _validate_l3(l3: L3Spec, path: str) -> None:
    if isinstance(l3, IPv4Spec):
        _check_addr(l3.src, 4, f"{path}.src")
        _check_addr(l3.dst, 4, f"{path}.dst")
        _check_uint(l3.src_random_mask, 32, f"{path}.src_random_mask")
        _check_uint(l3.dst_random_mask, 32, f"{path}.dst_random_mask")
        _check_uint(l3.tos, 8, f"{path}.tos")
    elif isinstance(l3, IPv6Spec):
        _check_addr(l3.src, 6, f"{path}.src")
        _check_addr(l3.dst, 6, f"{path}.dst")
        _check_uint(l3.src_random_mask, 128, f"{path}.src_random_mask")
        _check_uint(l3.dst_random_mask, 128, f"{path}.dst_random_mask")
        _check_uint(l3.traffic_class, 8, f"{path}.traffic_class")
        _check_uint(l3.flow_label, 20, f"{path}.flow_label")
        for name, mask in (
            ("src_random_mask", l3.src_random_mask),
            ("dst_random_mask", l3.dst_random_mask),
        ):
            if mask.bit_count() > MAX_IPV6_RANDOM_BITS:
                raise ValidationError(
                    "RandomMaskTooWide",
                    f"{path}.{name}",
                    f"{mask.bit_count()} randomized bits exceed the "
                    f"{MAX_IPV6_RANDOM_BITS}-bit limit",
                )
    else:
        raise ValidationError("InvalidFieldValue", path, f"unsupported L3 spec {l3!r}")


def _validate_vlan(tag: VlanTag, path: str) -> None:
    _check_uint(tag.vlan_id, 12, f"{path}.vlan_id")
    _check_uint(tag.pcp, 3, f"{path}.pcp")
    _check_uint(tag.dei, 1, f"{path}.dei")


def _validate_encap(
    encap: EncapsulationStack, profile: DeviceProfile, path: str
) -> None:
    if encap.vlan is not None and encap.qinq is not None:
        raise ValidationError(
            "VlanWithQinq", path, "vlan and qinq are mutually exclusive"
        )
    if encap.vlan is not None:
        _validate_vlan(encap.vlan, f"{path}.vlan")
    if encap.qinq is not None:
        _validate_vlan(encap.qinq.outer, f"{path}.qinq.outer")
        _validate_vlan(encap.qinq.inner, f"{path}.qinq.inner")
    if len(encap.mpls) > MAX_MPLS_LSES:
        raise ValidationError(
            "TooManyLses",
            f"{path}.mpls",
            f"{len(encap.mpls)} LSEs exceed the {MAX_MPLS_LSES}-LSE limit",
        )
    for i, lse in enumerate(encap.mpls):
        _check_uint(lse.label, 20, f"{path}.mpls[{i}].label")
        _check_uint(lse.tc, 3, f"{path}.mpls[{i}].tc")
        _check_uint(lse.ttl, 8, f"{path}.mpls[{i}].ttl")
    if encap.srv6 is not None:
        srv6 = encap.srv6
        if not 1 <= len(srv6.segments) <= MAX_SRV6_SEGMENTS:
            raise ValidationError(
                "TooManySegments",
                f"{path}.srv6.segments",
                f"segment count {len(srv6.segments)} outside [1, {MAX_SRV6_SEGMENTS}]",
            )
        if encap.vxlan is not None:
            raise ValidationError(
                "Srv6WithVxlan", path, "srv6 cannot be combined with vxlan"
            )
        if profile is not DeviceProfile.GEN2:
            raise ValidationError(
                "Srv6NotSupportedByProfile",
                f"{path}.srv6",
                f"srv6 requires device profile {DeviceProfile.GEN2.value}",
            )
        _check_addr(srv6.src, 6, f"{path}.srv6.src")
        _check_addr(srv6.dst, 6, f"{path}.srv6.dst")
        for i, seg in enumerate(srv6.segments):
            _check_addr(seg, 6, f"{path}.srv6.segments[{i}]")
    if encap.vxlan is not None:
        vx = encap.vxlan
        _validate_eth(vx.outer_eth, f"{path}.vxlan.outer_eth")
        _check_addr(vx.outer_src, 4, f"{path}.vxlan.outer_src")
        _check_addr(vx.outer_dst, 4, f"{path}.vxlan.outer_dst")
        _check_uint(vx.vni, 24, f"{path}.vxlan.vni")
        _check_uint(vx.udp_src_port, 16, f"{path}.vxlan.udp_src_port")
        _check_uint(vx.outer_tos, 8, f"{path}.vxlan.outer_tos")


def _validate_stream(
    stream: StreamDescription, profile: DeviceProfile, path: str
) -> None:
    if not MIN_STREAM_ID <= stream.stream_id <= MAX_STREAM_ID:
        raise ValidationError(
            "InvalidFieldValue",
            f"{path}.stream_id",
            f"stream_id {stream.stream_id} outside [{MIN_STREAM_ID}, {MAX_STREAM_ID}]",
        )
    if not isinstance(stream.mode, TrafficMode):
        raise ValidationError(
            "InvalidFieldValue", f"{path}.mode", f"unknown mode {stream.mode!r}"
        )
    if stream.target_rate_l1 <= 0:
        raise ValidationError(
            "InvalidFieldValue",
            f"{path}.target_rate_l1",
            "target rate must be positive",
        )
    if not MIN_FRAME_SIZE <= stream.frame_size <= MAX_FRAME_SIZE:
        raise ValidationError(
            "FrameSizeOutOfRange",
            f"{path}.frame_size",
            f"{stream.frame_size} outside [{MIN_FRAME_SIZE}, {MAX_FRAME_SIZE}]",
        )
    if not stream.tx_ports:
        raise ValidationError(
            "InvalidFieldValue", f"{path}.tx_ports", "at least one TX port required"
        )
    _check_uint(stream.udp_src_port, 16, f"{path}.udp_src_port")
    _check_uint(stream.udp_dst_port, 16, f"{path}.udp_dst_port")
    _validate_eth(stream.eth, f"{path}.eth")
    _validate_l3(stream.l3, f"{path}.l3")
    _validate_encap(stream.encap, profile, f"{path}.encap")

    # The header stack must fit inside the frame with room for the FCS;
    # padding only ever fills the surplus.
    from . import packet_codec

    overhead = packet_codec.header_overhead(stream)
    if stream.frame_size < overhead + packet_codec.FCS_LEN:
        raise ValidationError(
            "FrameSmallerThanHeaders",
            f"{path}.frame_size",
            f"frame_size {stream.frame_size} cannot hold {overhead} header bytes "
            f"plus {packet_codec.FCS_LEN}-byte FCS",
        )


def min_frame_size(stream: StreamDescription) -> int:
    """Smallest valid frame_size for the stream's header stack."""
    from . import packet_codec

    return max(MIN_FRAME_SIZE, packet_codec.header_overhead(stream) + packet_codec.FCS_LEN)


def validate_config(
    cfg: GenerationConfig | ValidatedConfig,
    device_profile: DeviceProfile = DeviceProfile.GEN2,
) -> ValidatedConfig:
    """Check every configuration rule; return the config wrapped as validated.

    Validation is idempotent (a ValidatedConfig re-validates against its own
    profile) and never mutates its input. The first violated rule is
    reported via ValidationError with its code and element path.
    """
    if isinstance(cfg, ValidatedConfig):
        return validate_config(cfg.config, cfg.device_profile)

    cbr = [s for s in cfg.streams if s.mode is TrafficMode.CBR]
    poisson = [s for s in cfg.streams if s.mode is TrafficMode.POISSON]
    if cbr and poisson:
        raise ValidationError(
            "MixedModes", "streams", "CBR and Poisson streams cannot be mixed"
        )
    if len(cbr) > MAX_CBR_STREAMS:
        raise ValidationError(
            "TooManyStreams",
            "streams",
            f"{len(cbr)} CBR streams exceed the limit of {MAX_CBR_STREAMS}",
        )
    if len(poisson) > 1:
        raise ValidationError(
            "TooManyStreams", "streams", "only one Poisson stream is allowed"
        )

    seen_ids: set[int] = set()
    for i, stream in enumerate(cfg.streams):
        if stream.stream_id in seen_ids:
            raise ValidationError(
                "DuplicateStreamId",
                f"streams[{i}].stream_id",
                f"stream_id {stream.stream_id} already used",
            )
        seen_ids.add(stream.stream_id)
        _validate_stream(stream, device_profile, f"streams[{i}]")

    seen_ports: set[int] = set()
    for i, port in enumerate(cfg.port_configs):
        path = f"port_configs[{i}]"
        if port.port_id in seen_ports:
            raise ValidationError(
                "InvalidFieldValue", f"{path}.port_id", "duplicate port_id"
            )
        seen_ports.add(port.port_id)
        if port.arp_reply_enabled:
            if not port.arp_reply_mac:
                raise ValidationError(
                    "MissingArpMac",
                    f"{path}.arp_reply_mac",
                    "arp_reply_mac required when arp_reply_enabled",
                )
            normalize_mac(port.arp_reply_mac, f"{path}.arp_reply_mac")

    return ValidatedConfig(config=cfg, device_profile=device_profile)


# --- JSON (de)serialization -------------------------------------------------
#
# The REST control plane exchanges configurations as JSON documents with
# the shapes below. parse/serialize round-trip exactly and produce a
# canonical normalized form (lowercase MACs, normalized addresses,
# sorted port lists).


def _mask_to_int(value, version: int, path: str) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    if isinstance(value, str):
        try:
            if version == 4:
                return int(ipaddress.IPv4Address(value))
            return int(ipaddress.IPv6Address(value))
        except (ipaddress.AddressValueError, ValueError):
            pass
    raise ValidationError("InvalidFieldValue", path, f"not a bit mask: {value!r}")


def _mask_to_str(mask: int, version: int) -> str:
    if version == 4:
        return str(ipaddress.IPv4Address(mask & 0xFFFFFFFF))
    return str(ipaddress.IPv6Address(mask & (1 << 128) - 1))


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise ValidationError("MissingField", f"{path}.{key}", "required field missing")
    return d[key]


def _parse_vlan(d: dict, path: str) -> VlanTag:
    return VlanTag(
        vlan_id=_require(d, "vlan_id", path),
        pcp=d.get("pcp", 0),
        dei=d.get("dei", 0),
    )


def _parse_l3(d: dict, path: str) -> L3Spec:
    version = _require(d, "version", path)
    if version == 4:
        return IPv4Spec(
            src=_check_addr(_require(d, "src", path), 4, f"{path}.src"),
            dst=_check_addr(_require(d, "dst", path), 4, f"{path}.dst"),
            src_random_mask=_mask_to_int(
                d.get("src_random_mask", 0), 4, f"{path}.src_random_mask"
            ),
            dst_random_mask=_mask_to_int(
                d.get("dst_random_mask", 0), 4, f"{path}.dst_random_mask"
            ),
            tos=d.get("tos", 0),
        )
    if version == 6:
        return IPv6Spec(
            src=_check_addr(_require(d, "src", path), 6, f"{path}.src"),
            dst=_check_addr(_require(d, "dst", path), 6, f"{path}.dst"),
            src_random_mask=_mask_to_int(
                d.get("src_random_mask", 0), 6, f"{path}.src_random_mask"
            ),
            dst_random_mask=_mask_to_int(
                d.get("dst_random_mask", 0), 6, f"{path}.dst_random_mask"
            ),
            traffic_class=d.get("traffic_class", 0),
            flow_label=d.get("flow_label", 0),
        )
    raise ValidationError(
        "InvalidFieldValue", f"{path}.version", f"unsupported L3 version {version!r}"
    )


def _parse_eth(d: dict, path: str) -> EthernetSpec:
    return EthernetSpec(
        src_mac=normalize_mac(_require(d, "src_mac", path), f"{path}.src_mac"),
        dst_mac=normalize_mac(_require(d, "dst_mac", path), f"{path}.dst_mac"),
    )


def _parse_encap(d: dict, path: str) -> EncapsulationStack:
    vlan = d.get("vlan")
    qinq = d.get("qinq")
    srv6 = d.get("srv6")
    vxlan = d.get("vxlan")
    return EncapsulationStack(
        vlan=_parse_vlan(vlan, f"{path}.vlan") if vlan else None,
        qinq=QinQTag(
            outer=_parse_vlan(_require(qinq, "outer", f"{path}.qinq"), f"{path}.qinq.outer"),
            inner=_parse_vlan(_require(qinq, "inner", f"{path}.qinq"), f"{path}.qinq.inner"),
        )
        if qinq
        else None,
        mpls=tuple(
            MplsLse(
                label=_require(lse, "label", f"{path}.mpls[{i}]"),
                tc=lse.get("tc", 0),
                ttl=lse.get("ttl", 64),
            )
            for i, lse in enumerate(d.get("mpls", ()))
        ),
        srv6=Srv6Spec(
            src=_check_addr(_require(srv6, "src", f"{path}.srv6"), 6, f"{path}.srv6.src"),
            dst=_check_addr(_require(srv6, "dst", f"{path}.srv6"), 6, f"{path}.srv6.dst"),
            segments=tuple(
                _check_addr(seg, 6, f"{path}.srv6.segments[{i}]")
                for i, seg in enumerate(_require(srv6, "segments", f"{path}.srv6"))
            ),
        )
        if srv6
        else None,
        vxlan=VxlanSpec(
            outer_eth=_parse_eth(
                _require(vxlan, "outer_eth", f"{path}.vxlan"), f"{path}.vxlan.outer_eth"
            ),
            outer_src=_check_addr(
                _require(vxlan, "outer_src", f"{path}.vxlan"), 4, f"{path}.vxlan.outer_src"
            ),
            outer_dst=_check_addr(
                _require(vxlan, "outer_dst", f"{path}.vxlan"), 4, f"{path}.vxlan.outer_dst"
            ),
            vni=_require(vxlan, "vni", f"{path}.vxlan"),
            udp_src_port=vxlan.get("udp_src_port", 49152),
            outer_tos=vxlan.get("outer_tos", 0),
        )
        if vxlan
        else None,
    )


def parse_stream(d: dict, path: str = "stream") -> StreamDescription:
    mode_raw = str(_require(d, "mode", path)).upper()
    try:
        mode = TrafficMode(mode_raw)
    except ValueError:
        raise ValidationError(
            "InvalidFieldValue", f"{path}.mode", f"unknown mode {mode_raw!r}"
        ) from None
    return StreamDescription(
        stream_id=_require(d, "stream_id", path),
        mode=mode,
        target_rate_l1=float(_require(d, "target_rate_l1", path)),
        frame_size=_require(d, "frame_size", path),
        eth=_parse_eth(_require(d, "eth", path), f"{path}.eth"),
        l3=_parse_l3(_require(d, "l3", path), f"{path}.l3"),
        encap=_parse_encap(d.get("encap") or {}, f"{path}.encap"),
        tx_ports=frozenset(d.get("tx_ports", (0,))),
        udp_src_port=d.get("udp_src_port", DEFAULT_UDP_PORT),
        udp_dst_port=d.get("udp_dst_port", DEFAULT_UDP_PORT),
    )


def parse_config(d: dict) -> GenerationConfig:
    if not isinstance(d, dict):
        raise ValidationError("InvalidFieldValue", "", "configuration must be an object")
    streams_raw = _require(d, "streams", "config")
    if not isinstance(streams_raw, (list, tuple)):
        raise ValidationError("InvalidFieldValue", "streams", "must be a list")
    streams = tuple(
        parse_stream(s, f"streams[{i}]") for i, s in enumerate(streams_raw)
    )
    ports = tuple(
        PortConfig(
            port_id=_require(p, "port_id", f"port_configs[{i}]"),
            arp_reply_enabled=p.get("arp_reply_enabled", False),
            arp_reply_mac=p.get("arp_reply_mac"),
        )
        for i, p in enumerate(d.get("port_configs", ()))
    )
    return GenerationConfig(streams=streams, port_configs=ports)


def _vlan_to_dict(tag: VlanTag) -> dict:
    return {"vlan_id": tag.vlan_id, "pcp": tag.pcp, "dei": tag.dei}


def _l3_to_dict(l3: L3Spec) -> dict:
    if isinstance(l3, IPv4Spec):
        return {
            "version": 4,
            "src": l3.src,
            "dst": l3.dst,
            "src_random_mask": _mask_to_str(l3.src_random_mask, 4),
            "dst_random_mask": _mask_to_str(l3.dst_random_mask, 4),
            "tos": l3.tos,
        }
    return {
        "version": 6,
        "src": l3.src,
        "dst": l3.dst,
        "src_random_mask": _mask_to_str(l3.src_random_mask, 6),
        "dst_random_mask": _mask_to_str(l3.dst_random_mask, 6),
        "traffic_class": l3.traffic_class,
        "flow_label": l3.flow_label,
    }


def stream_to_dict(s: StreamDescription) -> dict:
    encap: dict = {}
    if s.encap.vlan:
        encap["vlan"] = _vlan_to_dict(s.encap.vlan)
    if s.encap.qinq:
        encap["qinq"] = {
            "outer": _vlan_to_dict(s.encap.qinq.outer),
            "inner": _vlan_to_dict(s.encap.qinq.inner),
        }
    if s.encap.mpls:
        encap["mpls"] = [
            {"label": l.label, "tc": l.tc, "ttl": l.ttl} for l in s.encap.mpls
        ]
    if s.encap.srv6:
        encap["srv6"] = {
            "src": s.encap.srv6.src,
            "dst": s.encap.srv6.dst,
            "segments": list(s.encap.srv6.segments),
        }
    if s.encap.vxlan:
        vx = s.encap.vxlan
        encap["vxlan"] = {
            "outer_eth": {"src_mac": vx.outer_eth.src_mac, "dst_mac": vx.outer_eth.dst_mac},
            "outer_src": vx.outer_src,
            "outer_dst": vx.outer_dst,
            "vni": vx.vni,
            "udp_src_port": vx.udp_src_port,
            "outer_tos": vx.outer_tos,
        }
    return {
        "stream_id": s.stream_id,
        "mode": s.mode.value,
        "target_rate_l1": s.target_rate_l1,
        "frame_size": s.frame_size,
        "eth": {"src_mac": s.eth.src_mac, "dst_mac": s.eth.dst_mac},
        "l3": _l3_to_dict(s.l3),
        "encap": encap,
        "tx_ports": sorted(s.tx_ports),
        "udp_src_port": s.udp_src_port,
        "udp_dst_port": s.udp_dst_port,
    }


def config_to_dict(cfg: GenerationConfig | ValidatedConfig) -> dict:
    if isinstance(cfg, ValidatedConfig):
        cfg = cfg.config
    return {
        "streams": [stream_to_dict(s) for s in cfg.streams],
        "port_configs": [
            {
                "port_id": p.port_id,
                "arp_reply_enabled": p.arp_reply_enabled,
                "arp_reply_mac": p.arp_reply_mac,
            }
            for p in cfg.port_configs
        ],
    }


def with_rate(stream: StreamDescription, rate_l1: float) -> StreamDescription:
    return replace(stream, target_rate_l1=rate_l1)

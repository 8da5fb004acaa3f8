"""Codec conformance: golden vectors, header math, round trips, ARP."""

import json
from pathlib import Path
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen_random import random_stream
from swtg import packet_codec as pc
from swtg import pcap
from swtg import traffic_model as tm
from swtg.packet_codec import (
    FrameFactory,
    NotAnArpRequest,
    TruncatedFrame,
    decode_frame,
    encode_arp_reply,
    encode_arp_request,
    encode_frame,
    header_overhead,
    parse_arp,
)

GOLDEN = json.loads((Path(__file__).parent / "golden" / "frames.json").read_text())

ETH = tm.EthernetSpec(src_mac="02:00:00:00:00:01", dst_mac="02:00:00:00:00:02")
V4 = tm.IPv4Spec(src="10.0.0.1", dst="10.0.0.2")
V6 = tm.IPv6Spec(src="2001:db8::1", dst="2001:db8::2")


def make_stream(frame_size=512, l3=V4, encap=None, **kw):
    return tm.StreamDescription(
        stream_id=kw.pop("stream_id", 1),
        mode=tm.TrafficMode.CBR,
        target_rate_l1=1e8,
        frame_size=frame_size,
        eth=ETH,
        l3=l3,
        encap=encap or tm.EncapsulationStack(),
        **kw,
    )


class TestHeaderOverhead:
    def test_plain_ipv4(self):
        assert header_overhead(make_stream()) == 14 + 20 + 8 + 24  # 66

    def test_plain_ipv6(self):
        assert header_overhead(make_stream(l3=V6)) == 14 + 40 + 8 + 24

    def test_srv6_three_segments_replaces_l3(self):
        encap = tm.EncapsulationStack(
            srv6=tm.Srv6Spec(src="2001:db8::a", dst="2001:db8::b", segments=("fc00::1",) * 3)
        )
        assert header_overhead(make_stream(encap=encap)) == 14 + (48 + 16 * 3) + 8 + 24

    @pytest.mark.parametrize("nseg", [1, 2, 3])
    def test_srv6_per_segment(self, nseg):
        encap = tm.EncapsulationStack(
            srv6=tm.Srv6Spec(src="2001:db8::a", dst="2001:db8::b", segments=("fc00::1",) * nseg)
        )
        assert header_overhead(make_stream(encap=encap)) == 14 + 48 + 16 * nseg + 8 + 24

    def test_vxlan_adds_50(self):
        vx = tm.VxlanSpec(
            outer_eth=tm.EthernetSpec("02:00:00:00:00:10", "02:00:00:00:00:11"),
            outer_src="192.168.0.1",
            outer_dst="192.168.0.2",
            vni=1,
        )
        base = make_stream()
        wrapped = make_stream(encap=tm.EncapsulationStack(vxlan=vx))
        assert header_overhead(wrapped) == header_overhead(base) + 50

    def test_vlan_qinq_mpls_increments(self):
        base = header_overhead(make_stream())
        assert header_overhead(make_stream(encap=tm.EncapsulationStack(vlan=tm.VlanTag(1)))) == base + 4
        assert (
            header_overhead(
                make_stream(encap=tm.EncapsulationStack(qinq=tm.QinQTag(tm.VlanTag(1), tm.VlanTag(2))))
            )
            == base + 8
        )
        for n in (1, 5, 15):
            assert (
                header_overhead(
                    make_stream(encap=tm.EncapsulationStack(mpls=tuple(tm.MplsLse(label=i) for i in range(n))))
                )
                == base + 4 * n
            )

    def test_additive_across_layers(self):
        vx = tm.VxlanSpec(
            outer_eth=tm.EthernetSpec("02:00:00:00:00:10", "02:00:00:00:00:11"),
            outer_src="1.1.1.1",
            outer_dst="2.2.2.2",
            vni=1,
        )
        encap = tm.EncapsulationStack(
            vlan=tm.VlanTag(5), mpls=(tm.MplsLse(1), tm.MplsLse(2)), vxlan=vx
        )
        assert header_overhead(make_stream(encap=encap)) == 66 + 4 + 8 + 50


class TestGoldenVectors:
    @pytest.mark.parametrize(
        "name",
        ["plain_min", "plain", "ipv6", "vlan", "qinq", "mpls15", "srv6x3", "vxlan", "vxlan_vlan"],
    )
    def test_encode_matches_frozen_bytes(self, name):
        vec = GOLDEN[name]
        desc = tm.parse_stream(vec["desc"])
        tm.validate_config(tm.GenerationConfig(streams=(desc,)))
        encoded = encode_frame(desc, vec["seq"], vec["tx_ts"], Random(vec["pad_seed"]))
        assert encoded.hex() == vec["hex"], f"golden mismatch for {name}"

    @pytest.mark.parametrize(
        "name",
        ["plain_min", "plain", "ipv6", "vlan", "qinq", "mpls15", "srv6x3", "vxlan", "vxlan_vlan"],
    )
    def test_decode_frozen_bytes(self, name):
        vec = GOLDEN[name]
        frame = bytes.fromhex(vec["hex"])
        parsed = decode_frame(frame)
        assert parsed.is_p4tg
        assert parsed.stream_id == vec["desc"]["stream_id"]
        assert parsed.seq == vec["seq"]
        assert parsed.tx_ts == vec["tx_ts"]
        assert parsed.frame_size == len(frame) == vec["desc"]["frame_size"] - 4

    def test_wire_length_is_frame_size_minus_fcs(self):
        for name in ("plain", "vlan", "srv6x3", "vxlan_vlan"):
            vec = GOLDEN[name]
            assert len(bytes.fromhex(vec["hex"])) == vec["desc"]["frame_size"] - 4

    def test_truncated_mid_srh(self):
        frame = bytes.fromhex(GOLDEN["srv6x3"]["hex"])
        with pytest.raises(TruncatedFrame):
            decode_frame(frame[:60])

    def test_non_p4tg_udp_frame(self):
        vec = GOLDEN["plain"]
        frame = bytearray(bytes.fromhex(vec["hex"]))
        frame[42] ^= 0xFF  # corrupt the magic
        parsed = decode_frame(bytes(frame))
        assert not parsed.is_p4tg
        assert parsed.stream_id is None
        names = [n for n, _ in parsed.layers]
        assert names[:3] == ["eth", "ipv4", "udp"]


class TestEncodeProperties:
    def test_deterministic_under_seed(self):
        desc = make_stream(frame_size=256)
        a = encode_frame(desc, 3, 999, Random(42))
        b = encode_frame(desc, 3, 999, Random(42))
        assert a == b

    def test_factory_matches_one_shot(self):
        desc = make_stream(frame_size=300, l3=tm.IPv4Spec("10.0.0.1", "10.0.0.2", src_random_mask=0xFF))
        factory = FrameFactory(desc)
        assert factory.build(7, 11, Random(5)) == encode_frame(desc, 7, 11, Random(5))

    def test_round_trip_seeded_sample(self):
        rng = Random(2024)
        for i in range(200):
            desc = random_stream(rng, stream_id=rng.randrange(1, 256))
            frame = encode_frame(desc, i, i * 1000, rng)
            assert len(frame) == desc.frame_size - 4
            parsed = decode_frame(frame)
            assert parsed.is_p4tg
            assert (parsed.stream_id, parsed.seq, parsed.tx_ts) == (desc.stream_id, i, i * 1000)

    def test_layer_structure_round_trip(self):
        rng = Random(7)
        desc = random_stream(rng)
        frame = encode_frame(desc, 0, 0, rng)
        names = [n for n, _ in decode_frame(frame).layers]
        expected = ["eth"]
        if desc.encap.vxlan:
            expected += ["ipv4", "udp", "vxlan", "eth"]
        if desc.encap.vlan:
            expected += ["vlan"]
        if desc.encap.qinq:
            expected += ["vlan", "vlan"]
        if desc.encap.mpls:
            expected += ["mpls"]
        if desc.encap.srv6:
            expected += ["ipv6", "srh"]
        else:
            expected += ["ipv6" if isinstance(desc.l3, tm.IPv6Spec) else "ipv4"]
        expected += ["udp", "p4tg"]
        assert names[: len(expected)] == expected

    def test_randomized_bits_stay_inside_mask(self):
        mask_src, mask_dst = 0x0000FF00, 0x000000FF
        desc = make_stream(
            frame_size=128,
            l3=tm.IPv4Spec("10.1.2.3", "10.4.5.6", src_random_mask=mask_src, dst_random_mask=mask_dst),
        )
        factory = FrameFactory(desc)
        rng = Random(1)
        tmpl_src = int.from_bytes(pc.ipv4_bytes("10.1.2.3"), "big")
        tmpl_dst = int.from_bytes(pc.ipv4_bytes("10.4.5.6"), "big")
        for seq in range(2000):
            frame = factory.build(seq, 0, rng)
            layers = dict(decode_frame(frame).layers)
            src = int.from_bytes(pc.ipv4_bytes(layers["ipv4"]["src"]), "big")
            dst = int.from_bytes(pc.ipv4_bytes(layers["ipv4"]["dst"]), "big")
            assert (src ^ tmpl_src) & ~mask_src == 0
            assert (dst ^ tmpl_dst) & ~mask_dst == 0

    def test_ipv6_randomized_bits_stay_inside_mask(self):
        mask = (1 << 48) - 1
        desc = make_stream(
            frame_size=256,
            l3=tm.IPv6Spec(src=V6.src, dst=V6.dst, dst_random_mask=mask),
        )
        factory = FrameFactory(desc)
        rng = Random(9)
        tmpl = int.from_bytes(pc.ipv6_bytes(V6.dst), "big")
        seen_random = set()
        for seq in range(500):
            layers = dict(decode_frame(factory.build(seq, 0, rng)).layers)
            dst = int.from_bytes(pc.ipv6_bytes(layers["ipv6"]["dst"]), "big")
            assert (dst ^ tmpl) & ~mask == 0
            seen_random.add(dst & mask)
        assert len(seen_random) > 400  # actually randomizing

    @pytest.mark.parametrize("depth", range(1, 16))
    def test_mpls_bottom_of_stack(self, depth):
        encap = tm.EncapsulationStack(mpls=tuple(tm.MplsLse(label=i + 1) for i in range(depth)))
        desc = make_stream(frame_size=512, encap=encap)
        lses = dict(decode_frame(encode_frame(desc, 0, 0, Random(0))).layers)["mpls"]["lses"]
        assert len(lses) == depth
        assert [l["bottom"] for l in lses] == [0] * (depth - 1) + [1]

    def test_udp_checksum_valid_for_ipv6(self):
        # Verify the incremental checksum against a direct computation.
        desc = make_stream(
            frame_size=200,
            l3=tm.IPv6Spec(src=V6.src, dst=V6.dst, dst_random_mask=(1 << 40) - 1),
        )
        factory = FrameFactory(desc)
        rng = Random(3)
        for seq in range(50):
            frame = factory.build(seq, seq * 7, rng)
            udp_off = 14 + 40
            pseudo = frame[22:38] + frame[38:54] + (len(frame) - udp_off).to_bytes(4, "big") + b"\x00\x00\x00\x11"
            total = pc._ones_sum(pseudo + frame[udp_off:])
            assert pc._fold(total) == 0xFFFF  # sum over data incl checksum is all-ones

    def test_rng_required_for_padding(self):
        with pytest.raises(ValueError):
            encode_frame(make_stream(frame_size=128), 0, 0, None)

    def test_no_rng_needed_at_exact_fit(self):
        frame = encode_frame(make_stream(frame_size=70), 0, 0, None)
        assert len(frame) == 66

    def test_last_packet_flag(self):
        desc = make_stream(frame_size=70)
        parsed = decode_frame(encode_frame(desc, 1, 2, None, flags=pc.FLAG_LAST_PACKET))
        assert parsed.flags & pc.FLAG_LAST_PACKET


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10**9))
def test_property_round_trip_and_fast_classify(seed):
    rng = Random(seed)
    desc = random_stream(rng, stream_id=rng.randrange(1, 256))
    seq, ts = rng.getrandbits(63), rng.getrandbits(63)
    frame = encode_frame(desc, seq, ts, rng)
    parsed = decode_frame(frame)
    assert parsed.is_p4tg
    assert (parsed.stream_id, parsed.seq, parsed.tx_ts) == (desc.stream_id, seq, ts)
    kind, sid, fseq, fts, _flags = pc.classify_fast(frame)
    assert (kind, sid, fseq, fts) == (pc.KIND_P4TG, desc.stream_id, seq, ts)


@settings(max_examples=80, deadline=None)
@given(data=st.binary(min_size=14, max_size=200))
def test_property_decode_never_crashes_on_junk(data):
    try:
        parsed = decode_frame(data)
        assert parsed.frame_size == len(data)
    except TruncatedFrame:
        pass
    kind, *_ = pc.classify_fast(data)
    assert kind in (pc.KIND_P4TG, pc.KIND_ARP, pc.KIND_OTHER)


class TestArp:
    def test_golden_request(self):
        vec = GOLDEN["arp_request"]
        req = encode_arp_request(vec["target_ip"], vec["requester_mac"], vec["requester_ip"])
        assert req.hex() == vec["hex"]

    def test_golden_reply(self):
        req = bytes.fromhex(GOLDEN["arp_request"]["hex"])
        reply = encode_arp_reply(parse_arp(req), GOLDEN["arp_reply"]["reply_mac"])
        assert reply.hex() == GOLDEN["arp_reply"]["hex"]

    def test_reply_fields(self):
        req = encode_arp_request("10.0.0.1", "aa:bb:cc:dd:ee:01", "10.0.0.99")
        reply = parse_arp(encode_arp_reply(parse_arp(req), "02:f0:0d:00:00:01"))
        assert reply.opcode == 2
        assert reply.sender_mac == "02:f0:0d:00:00:01"
        assert reply.sender_ip == "10.0.0.1"  # the requested IP
        assert reply.target_mac == "aa:bb:cc:dd:ee:01"
        assert reply.target_ip == "10.0.0.99"

    def test_reply_addressed_to_requester(self):
        req = encode_arp_request("10.0.0.1", "aa:bb:cc:dd:ee:01", "10.0.0.99")
        reply = encode_arp_reply(parse_arp(req), "02:f0:0d:00:00:01")
        assert reply[0:6] == pc.mac_bytes("aa:bb:cc:dd:ee:01")

    def test_reply_to_reply_rejected(self):
        req = encode_arp_request("10.0.0.1", "aa:bb:cc:dd:ee:01", "10.0.0.99")
        reply = encode_arp_reply(parse_arp(req), "02:f0:0d:00:00:01")
        with pytest.raises(NotAnArpRequest):
            encode_arp_reply(parse_arp(reply), "02:f0:0d:00:00:02")

    def test_gratuitous_request_answered(self):
        req = encode_arp_request("10.0.0.99", "aa:bb:cc:dd:ee:01", "10.0.0.99")
        reply = parse_arp(encode_arp_reply(parse_arp(req), "02:f0:0d:00:00:01"))
        assert reply.opcode == 2
        assert reply.sender_ip == "10.0.0.99"

    def test_parse_arp_on_non_arp(self):
        assert parse_arp(bytes.fromhex(GOLDEN["plain"]["hex"])) is None


class TestPcapExport:
    def test_round_trip(self, tmp_path):
        frames = [
            (1_000, bytes.fromhex(GOLDEN["plain"]["hex"])),
            (2_000_000_123, bytes.fromhex(GOLDEN["vlan"]["hex"])),
        ]
        path = tmp_path / "frames.pcap"
        assert pcap.write_pcap(path, frames) == 2
        back = pcap.read_pcap(path)
        assert back == frames

    def test_bare_frames(self, tmp_path):
        path = tmp_path / "bare.pcap"
        pcap.write_pcap(path, [b"\x00" * 60])
        assert pcap.read_pcap(path) == [(0, b"\x00" * 60)]

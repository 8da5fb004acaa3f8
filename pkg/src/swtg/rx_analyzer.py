"""Receive-side measurement state: rates, sizes, loss, reordering, RTT, IAT.

One analyzer instance covers one generation run. Frames arrive with
their RX timestamp and port; measurement-carrying frames additionally
update per-stream sequence tracking. Loss is finalized at stop time
(or from transmit counts supplied by the control plane), out-of-order
is counted in one pass as arrivals below the running maximum sequence
number, and RTT/IAT keep exact running summaries plus bounded
reservoirs for distribution queries.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from random import Random

from . import packet_codec
from .packet_codec import KIND_ARP, KIND_P4TG, ParsedFrame

HISTOGRAM_BINS = (
    (64, 64),
    (65, 127),
    (128, 255),
    (256, 511),
    (512, 1023),
    (1024, 1518),
    (1519, 9000),
)
HISTOGRAM_LABELS = tuple(
    f"{lo}" if lo == hi else f"{lo}-{hi}" for lo, hi in HISTOGRAM_BINS
)

RESERVOIR_CAPACITY = 65536
DUPLICATE_WINDOW = 1024
RATE_BUCKET_NS = 100_000_000  # 100 ms
RATE_WINDOW_BUCKETS = 10  # 1 s sliding window

_L2_EXTRA = packet_codec.FCS_LEN
_L1_EXTRA = packet_codec.FCS_LEN + packet_codec.L1_FRAME_OVERHEAD


def _bin_index(size_l2: int) -> int:
    # Undersized frames (possible in software, a wire would pad them)
    # count in the 64-byte bin; oversized in the top bin.
    for i, (_lo, hi) in enumerate(HISTOGRAM_BINS):
        if size_l2 <= hi:
            return i
    return len(HISTOGRAM_BINS) - 1


class SummaryAcc:
    """Exact running count/mean/min/max."""

    __slots__ = ("count", "total", "mn", "mx")

    def __init__(self) -> None:
        self.count = 0
        self.total = 0
        self.mn = None
        self.mx = None

    def add(self, v: int) -> None:
        self.count += 1
        self.total += v
        if self.mn is None or v < self.mn:
            self.mn = v
        if self.mx is None or v > self.mx:
            self.mx = v

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": (self.total / self.count) if self.count else None,
            "min": self.mn,
            "max": self.mx,
        }


class Reservoir:
    """Uniform reservoir sample of a value stream."""

    __slots__ = ("capacity", "items", "seen", "_rng")

    def __init__(self, capacity: int, rng: Random) -> None:
        self.capacity = capacity
        self.items: list[int] = []
        self.seen = 0
        self._rng = rng

    def add(self, v: int) -> None:
        self.seen += 1
        if len(self.items) < self.capacity:
            self.items.append(v)
        else:
            j = int(self._rng.random() * self.seen)
            if j < self.capacity:
                self.items[j] = v


class RateWindow:
    """Sliding-window byte/frame rates over fixed 100 ms buckets."""

    __slots__ = ("_buckets",)

    def __init__(self) -> None:
        self._buckets: deque[list[int]] = deque()  # [bucket_idx, l1, l2, frames]

    def add(self, ts_ns: int, l1_bytes: int, l2_bytes: int) -> None:
        idx = ts_ns // RATE_BUCKET_NS
        buckets = self._buckets
        if buckets and buckets[-1][0] == idx:
            b = buckets[-1]
            b[1] += l1_bytes
            b[2] += l2_bytes
            b[3] += 1
        else:
            buckets.append([idx, l1_bytes, l2_bytes, 1])
            while buckets and buckets[0][0] <= idx - 2 * RATE_WINDOW_BUCKETS:
                buckets.popleft()

    def rates(self, now_ns: int) -> tuple[float, float]:
        """(l1_bits_per_s, l2_bits_per_s) over the last full window."""
        hi = now_ns // RATE_BUCKET_NS
        lo = hi - RATE_WINDOW_BUCKETS
        l1 = l2 = 0
        for idx, b1, b2, _n in self._buckets:
            if lo <= idx < hi:
                l1 += b1
                l2 += b2
        span_s = RATE_WINDOW_BUCKETS * RATE_BUCKET_NS / 1e9
        return (l1 * 8 / span_s, l2 * 8 / span_s)


class _StreamState:
    __slots__ = (
        "highest_seq",
        "received",
        "duplicates",
        "out_of_order",
        "lost",
        "lost_is_final",
        "no_rx",
        "last_packet_seen",
        "rx_bytes_l2",
        "rtt",
        "rtt_reservoir",
        "iat",
        "last_rx_ts",
        "recent_seqs",
        "recent_set",
        "rate",
        "tx_frames",
        "tx_bytes_l2",
        "tx_rate",
    )

    def __init__(self, rng: Random) -> None:
        self.highest_seq: int | None = None
        self.received = 0
        self.duplicates = 0
        self.out_of_order = 0
        self.lost = 0
        self.lost_is_final = False
        self.no_rx = False
        self.last_packet_seen = False
        self.rx_bytes_l2 = 0
        self.rtt = SummaryAcc()
        self.rtt_reservoir = Reservoir(RESERVOIR_CAPACITY, rng)
        self.iat = SummaryAcc()
        self.last_rx_ts: int | None = None
        self.recent_seqs: deque[int] = deque(maxlen=DUPLICATE_WINDOW)
        self.recent_set: set[int] = set()
        self.rate = RateWindow()
        self.tx_frames = 0
        self.tx_bytes_l2 = 0
        self.tx_rate = RateWindow()


class _PortState:
    __slots__ = (
        "rx_frames",
        "rx_bytes_l2",
        "histogram",
        "frame_types",
        "iat",
        "iat_reservoir",
        "max_gap_ns",
        "last_rx_ts",
        "rate",
        "tx_frames",
        "tx_bytes_l2",
        "tx_rate",
    )

    def __init__(self, rng: Random) -> None:
        self.rx_frames = 0
        self.rx_bytes_l2 = 0
        self.histogram = [0] * len(HISTOGRAM_BINS)
        self.frame_types = {"p4tg": 0, "arp": 0, "other": 0}
        self.iat = SummaryAcc()
        self.iat_reservoir = Reservoir(RESERVOIR_CAPACITY, rng)
        self.max_gap_ns = 0
        self.last_rx_ts: int | None = None
        self.rate = RateWindow()
        self.tx_frames = 0
        self.tx_bytes_l2 = 0
        self.tx_rate = RateWindow()


@dataclass
class StatisticsSnapshot:
    ts_ns: int
    streams: dict = field(default_factory=dict)
    ports: dict = field(default_factory=dict)


class StreamUnknown(Exception):
    pass


class RxAnalyzer:
    def __init__(self, seed: int = 0) -> None:
        self._rng = Random(seed)
        self._lock = threading.Lock()
        self._streams: dict[int, _StreamState] = {}
        self._ports: dict[int, _PortState] = {}
        self._registered: set[int] = set()

    def register_streams(self, stream_ids) -> None:
        with self._lock:
            for sid in stream_ids:
                self._registered.add(sid)
                if sid not in self._streams:
                    self._streams[sid] = _StreamState(self._rng)

    # -- ingress ---------------------------------------------------------

    def ingest_raw(self, data: bytes, rx_ts: int, port: int) -> None:
        """Hot receive path: classify without building layer objects."""
        kind, sid, seq, tx_ts, flags = packet_codec.classify_fast(data)
        self._update(kind, sid, seq, tx_ts, flags, len(data), rx_ts, port)

    def ingest(self, frame: ParsedFrame, rx_ts: int, port: int) -> None:
        if frame.is_p4tg:
            self._update(
                KIND_P4TG,
                frame.stream_id,
                frame.seq,
                frame.tx_ts,
                frame.flags,
                frame.frame_size,
                rx_ts,
                port,
            )
        else:
            kind = KIND_ARP if any(name == "arp" for name, _ in frame.layers) else packet_codec.KIND_OTHER
            self._update(kind, 0, 0, 0, 0, frame.frame_size, rx_ts, port)

    def _update(
        self,
        kind: int,
        sid: int,
        seq: int,
        tx_ts: int,
        flags: int,
        wire_len: int,
        rx_ts: int,
        port: int,
    ) -> None:
        l2 = wire_len + _L2_EXTRA
        with self._lock:
            pstate = self._ports.get(port)
            if pstate is None:
                pstate = self._ports[port] = _PortState(self._rng)
            pstate.rx_frames += 1
            pstate.rx_bytes_l2 += l2
            pstate.histogram[_bin_index(l2)] += 1
            if kind == KIND_P4TG:
                pstate.frame_types["p4tg"] += 1
            elif kind == KIND_ARP:
                pstate.frame_types["arp"] += 1
            else:
                pstate.frame_types["other"] += 1
            if pstate.last_rx_ts is not None:
                gap = rx_ts - pstate.last_rx_ts
                pstate.iat.add(gap)
                pstate.iat_reservoir.add(gap)
                if gap > pstate.max_gap_ns:
                    pstate.max_gap_ns = gap
            pstate.last_rx_ts = rx_ts
            pstate.rate.add(rx_ts, wire_len + _L1_EXTRA, l2)

            if kind != KIND_P4TG:
                return

            state = self._streams.get(sid)
            if state is None:
                state = self._streams[sid] = _StreamState(self._rng)
            state.received += 1
            state.rx_bytes_l2 += l2

            if state.highest_seq is None or seq >= state.highest_seq:
                state.highest_seq = seq
            else:
                state.out_of_order += 1

            if seq in state.recent_set:
                state.duplicates += 1
            else:
                if len(state.recent_seqs) == DUPLICATE_WINDOW:
                    state.recent_set.discard(state.recent_seqs[0])
                state.recent_seqs.append(seq)
                state.recent_set.add(seq)

            rtt = rx_ts - tx_ts
            state.rtt.add(rtt)
            state.rtt_reservoir.add(rtt)
            if state.last_rx_ts is not None:
                state.iat.add(rx_ts - state.last_rx_ts)
            state.last_rx_ts = rx_ts
            if flags & packet_codec.FLAG_LAST_PACKET:
                state.last_packet_seen = True
            state.rate.add(rx_ts, wire_len + _L1_EXTRA, l2)

    def ingest_tx(self, stream_id: int, frame_size: int, ts: int, port: int) -> None:
        """Transmit-side tap from the generator: frame_size includes FCS."""
        l2 = frame_size
        l1 = frame_size + packet_codec.L1_FRAME_OVERHEAD
        with self._lock:
            pstate = self._ports.get(port)
            if pstate is None:
                pstate = self._ports[port] = _PortState(self._rng)
            pstate.tx_frames += 1
            pstate.tx_bytes_l2 += l2
            pstate.tx_rate.add(ts, l1, l2)
            state = self._streams.get(stream_id)
            if state is None:
                state = self._streams[stream_id] = _StreamState(self._rng)
            state.tx_frames += 1
            state.tx_bytes_l2 += l2
            state.tx_rate.add(ts, l1, l2)

    # -- finalize ----------------------------------------------------------

    def _unique(self, state: _StreamState) -> int:
        return state.received - state.duplicates

    def finalize_stream(self, stream_id: int, expected_count: int | None = None) -> None:
        """Freeze the loss count for a stream.

        With expected_count (from transmit counters) loss is exact; from
        the wire alone it is highest_seq + 1 minus unique receptions, and
        a stream that saw nothing reports zero with no_rx set.
        """
        with self._lock:
            state = self._streams.get(stream_id)
            if state is None:
                if stream_id in self._registered:
                    state = self._streams[stream_id] = _StreamState(self._rng)
                else:
                    raise StreamUnknown(f"stream {stream_id} never configured or seen")
            if expected_count is not None:
                state.lost = expected_count - self._unique(state)
            elif state.received == 0:
                state.lost = 0
                state.no_rx = True
            else:
                state.lost = (state.highest_seq + 1) - self._unique(state)
            state.lost_is_final = True

    def finalize_all(self, expected_counts: dict[int, int] | None = None) -> None:
        with self._lock:
            sids = set(self._streams) | self._registered
        for sid in sids:
            expected = expected_counts.get(sid) if expected_counts else None
            self.finalize_stream(sid, expected)

    # -- snapshot ----------------------------------------------------------

    def snapshot(self, now_ns: int) -> StatisticsSnapshot:
        with self._lock:
            streams = {}
            for sid, s in self._streams.items():
                if s.lost_is_final:
                    lost = s.lost
                elif s.highest_seq is not None:
                    lost = max(0, (s.highest_seq + 1) - self._unique(s))
                else:
                    lost = 0
                tx_l1, tx_l2 = s.tx_rate.rates(now_ns)
                rx_l1, rx_l2 = s.rate.rates(now_ns)
                streams[sid] = {
                    "stream_id": sid,
                    "tx_frames": s.tx_frames,
                    "tx_bytes_l2": s.tx_bytes_l2,
                    "tx_rate_l1": tx_l1,
                    "tx_rate_l2": tx_l2,
                    "rx_frames": s.received,
                    "rx_bytes_l2": s.rx_bytes_l2,
                    "rx_rate_l1": rx_l1,
                    "rx_rate_l2": rx_l2,
                    "lost": lost,
                    "lost_is_final": s.lost_is_final,
                    "no_rx": s.no_rx,
                    "out_of_order": s.out_of_order,
                    "duplicates": s.duplicates,
                    "highest_seq": s.highest_seq,
                    "last_packet_seen": s.last_packet_seen,
                    "rtt": s.rtt.to_dict(),
                    "iat": s.iat.to_dict(),
                }
            ports = {}
            for pid, p in self._ports.items():
                tx_l1, tx_l2 = p.tx_rate.rates(now_ns)
                rx_l1, rx_l2 = p.rate.rates(now_ns)
                ports[pid] = {
                    "port_id": pid,
                    "tx_frames": p.tx_frames,
                    "tx_bytes_l2": p.tx_bytes_l2,
                    "tx_rate_l1": tx_l1,
                    "tx_rate_l2": tx_l2,
                    "rx_frames": p.rx_frames,
                    "rx_bytes_l2": p.rx_bytes_l2,
                    "rx_rate_l1": rx_l1,
                    "rx_rate_l2": rx_l2,
                    "histogram": dict(zip(HISTOGRAM_LABELS, p.histogram)),
                    "frame_types": dict(p.frame_types),
                    "iat": p.iat.to_dict(),
                    "max_gap_ns": p.max_gap_ns,
                }
            return StatisticsSnapshot(ts_ns=now_ns, streams=streams, ports=ports)

    def rtt_samples(self, stream_id: int) -> list[int]:
        with self._lock:
            state = self._streams.get(stream_id)
            return list(state.rtt_reservoir.items) if state else []

    def max_gap(self, port: int) -> int:
        with self._lock:
            p = self._ports.get(port)
            return p.max_gap_ns if p else 0

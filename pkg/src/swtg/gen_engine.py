"""Frame scheduling and transmission.

CBR streams get fixed inter-departure spacing derived from the L1 rate
(frame bytes plus the 20-byte preamble/inter-frame-gap overhead);
Poisson streams draw exponential gaps with the same mean. Pacing uses
absolute deadlines (next += period), so timing error never accumulates:
a deadline missed by the OS is sent immediately and the long-run rate
still converges to the target. One transmit worker runs per port;
streams sharing a port interleave by earliest deadline.
"""

from __future__ import annotations

import heapq
import itertools
import threading
from dataclasses import dataclass, field
from random import Random

from . import packet_codec
from .clock import Clock
from .packet_codec import FrameFactory
from .traffic_model import StreamDescription, TrafficMode, ValidatedConfig


class ZeroRate(Exception):
    pass


class AlreadyRunning(Exception):
    pass


class NotRunning(Exception):
    pass


def cbr_period(frame_size: int, target_rate_l1: float) -> float:
    """Inter-departure time in ns for a CBR stream at the given L1 rate."""
    if target_rate_l1 <= 0:
        raise ZeroRate(f"target_rate_l1 must be positive, got {target_rate_l1}")
    return (frame_size + packet_codec.L1_FRAME_OVERHEAD) * 8 * 1e9 / target_rate_l1


def poisson_next_gap(mean_period_ns: float, rng: Random) -> float:
    """Exponential inter-departure gap with the given mean, in ns."""
    if mean_period_ns <= 0:
        raise ZeroRate(f"mean period must be positive, got {mean_period_ns}")
    return rng.expovariate(1.0 / mean_period_ns)


@dataclass(frozen=True)
class DeparturePlan:
    stream_id: int
    departure_time: int
    seq: int


def plan_departures(
    desc: StreamDescription, count: int, seed: int = 0, start_ns: int = 0
) -> list[DeparturePlan]:
    """First `count` scheduled departures for one stream (pure math,
    the same arithmetic the transmit worker follows)."""
    period = cbr_period(desc.frame_size, desc.target_rate_l1)
    rng = Random((seed << 8) ^ desc.stream_id)
    t = float(start_ns)
    plans = []
    for seq in range(count):
        plans.append(DeparturePlan(desc.stream_id, round(t), seq))
        if desc.mode is TrafficMode.POISSON:
            t += poisson_next_gap(period, rng)
        else:
            t += period
    return plans


@dataclass(frozen=True)
class TxRecord:
    stream_id: int
    seq: int
    tx_ts: int
    frame_size: int  # configured size, FCS included


@dataclass
class TxStreamSummary:
    frames: int = 0
    bytes_l2: int = 0
    bytes_l1: int = 0
    backpressure: bool = False


@dataclass
class TxSummary:
    per_stream: dict[int, TxStreamSummary] = field(default_factory=dict)
    started_ns: int = 0
    stopped_ns: int = 0

    @property
    def total_frames(self) -> int:
        return sum(s.frames for s in self.per_stream.values())

    def expected_counts(self) -> dict[int, int]:
        return {sid: s.frames for sid, s in self.per_stream.items()}


_port_registry: set[tuple[int, int]] = set()
_port_registry_lock = threading.Lock()


class _StreamTx:
    __slots__ = ("desc", "factory", "seq", "frame_rng", "pace_rng", "period", "poisson")

    def __init__(self, desc: StreamDescription, seed: int) -> None:
        self.desc = desc
        self.factory = FrameFactory(desc)
        self.seq = itertools.count()
        self.frame_rng = Random((seed << 16) ^ (desc.stream_id << 1))
        self.pace_rng = Random((seed << 8) ^ desc.stream_id)
        self.period = cbr_period(desc.frame_size, desc.target_rate_l1)
        self.poisson = desc.mode is TrafficMode.POISSON


class GenHandle:
    """A live generation run; stop() halts it and returns the summary."""

    def __init__(
        self,
        cfg: ValidatedConfig,
        channel,
        clock: Clock,
        seed: int,
        tx_tap,
        record_log: bool,
    ) -> None:
        self._cfg = cfg
        self._channel = channel
        self._clock = clock
        self._tap = tx_tap
        self._record_log = record_log
        self._stop = threading.Event()
        self._records: list[list[TxRecord]] = []
        self._behind: dict[int, int] = {}
        self._counts: dict[int, list[int]] = {}  # sid -> [frames, bytes_l2]
        self._counts_lock = threading.Lock()
        self._streams: dict[int, _StreamTx] = {
            s.stream_id: _StreamTx(s, seed) for s in cfg.streams
        }
        self._ports = sorted({p for s in cfg.streams for p in s.tx_ports})
        self._claimed = [(id(channel), p) for p in self._ports]
        with _port_registry_lock:
            for key in self._claimed:
                if key in _port_registry:
                    raise AlreadyRunning(f"port {key[1]} already transmitting")
            _port_registry.update(self._claimed)
        self._running = True
        self.started_ns = clock.now()
        self._workers = [
            threading.Thread(target=self._run_port, args=(p,), name=f"tx-port{p}", daemon=True)
            for p in self._ports
        ]
        for w in self._workers:
            w.start()

    @property
    def worker_count(self) -> int:
        return len(self._workers)

    @property
    def is_running(self) -> bool:
        return self._running

    def _emit(
        self,
        records: list[TxRecord],
        tx: _StreamTx,
        port: int,
        ts: int,
        flags: int = 0,
    ) -> None:
        seq = next(tx.seq)
        frame = tx.factory.build(seq, ts, tx.frame_rng, flags)
        self._channel.offer(
            frame, port=port, stream_id=tx.desc.stream_id, seq=seq, enqueue_ts=ts
        )
        with self._counts_lock:
            c = self._counts.setdefault(tx.desc.stream_id, [0, 0])
            c[0] += 1
            c[1] += tx.desc.frame_size
        if self._record_log:
            records.append(TxRecord(tx.desc.stream_id, seq, ts, tx.desc.frame_size))
        if self._tap is not None:
            self._tap(tx.desc.stream_id, tx.desc.frame_size, ts, port)

    def _run_port(self, port: int) -> None:
        clock = self._clock
        stop = self._stop
        records: list[TxRecord] = []
        self._records.append(records)
        streams = [tx for tx in self._streams.values() if port in tx.desc.tx_ports]
        t0 = clock.now()
        # (deadline, arbitration order, stream) heap; deadlines are floats
        # so fractional-ns periods do not drift.
        pending: list[tuple[float, int, _StreamTx]] = [
            (float(t0), i, tx) for i, tx in enumerate(streams)
        ]
        heapq.heapify(pending)
        while not stop.is_set():
            deadline, order, tx = heapq.heappop(pending)
            clock.sleep_until(round(deadline))
            if stop.is_set():
                heapq.heappush(pending, (deadline, order, tx))
                break
            self._emit(records, tx, port, clock.now())
            if tx.poisson:
                deadline += poisson_next_gap(tx.period, tx.pace_rng)
            else:
                deadline += tx.period
            heapq.heappush(pending, (deadline, order, tx))
        now = clock.now()
        for deadline, _order, tx in pending:
            behind = max(0, now - round(deadline))
            prev = self._behind.get(tx.desc.stream_id, 0)
            if behind > prev:
                self._behind[tx.desc.stream_id] = behind

    def stop(self) -> TxSummary:
        """Halt transmission, emit one last-packet-flagged frame per stream
        and port, and return per-stream totals."""
        if not self._running:
            raise NotRunning("generation already stopped")
        self._stop.set()
        release = getattr(self._clock, "release", None)
        if release is not None:
            release()
        for w in self._workers:
            w.join()
        now = self._clock.now()
        final_records: list[TxRecord] = []
        self._records.append(final_records)
        for tx in self._streams.values():
            for port in sorted(tx.desc.tx_ports):
                self._emit(final_records, tx, port, now, flags=packet_codec.FLAG_LAST_PACKET)
        self._running = False
        with _port_registry_lock:
            _port_registry.difference_update(self._claimed)

        elapsed = max(1, now - self.started_ns)
        summary = TxSummary(started_ns=self.started_ns, stopped_ns=now)
        for sid, tx in self._streams.items():
            frames, bytes_l2 = self._counts.get(sid, [0, 0])
            summary.per_stream[sid] = TxStreamSummary(
                frames=frames,
                bytes_l2=bytes_l2,
                bytes_l1=bytes_l2 + frames * packet_codec.L1_FRAME_OVERHEAD,
                backpressure=self._behind.get(sid, 0) > 0.01 * elapsed,
            )
        return summary

    def records(self) -> list[TxRecord]:
        """Snapshot of the transmit log (empty when record_log is off)."""
        merged: list[TxRecord] = []
        for chunk in list(self._records):
            merged.extend(chunk)
        return merged


def start(
    cfg: ValidatedConfig,
    channel,
    clock: Clock,
    *,
    seed: int = 0,
    tx_tap=None,
    record_log: bool = True,
) -> GenHandle:
    """Begin transmitting the validated configuration into the channel.

    tx_tap, when given, is called (stream_id, frame_size, tx_ts, port)
    for every transmitted frame — the statistics hook. Raises
    AlreadyRunning if any requested port is already transmitting on the
    same channel.
    """
    if not isinstance(cfg, ValidatedConfig):
        raise TypeError("start() requires a ValidatedConfig (run validate_config first)")
    return GenHandle(cfg, channel, clock, seed, tx_tap, record_log)


def stop(handle: GenHandle) -> TxSummary:
    return handle.stop()


def run_virtual(
    handle: GenHandle, clock, duration_ns: int, timeout_s: float = 600.0
) -> TxSummary:
    """Drive a run for an exact simulated duration on a VirtualClock.

    timeout_s bounds wall-clock compute time (a stall guard, not a rate
    limit: high simulated rates legitimately take real CPU seconds).
    """
    clock.set_limit(handle.started_ns + duration_ns)
    if not clock.wait_quiescent(handle.worker_count, timeout_s=timeout_s):
        handle.stop()
        raise RuntimeError("virtual run did not quiesce")
    return handle.stop()

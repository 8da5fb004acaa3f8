"""Transport layer: in-process impairment channel and datagram sockets.

The loopback channel is the verification oracle: every offered frame
gets a logged verdict (delivered / dropped / reordered) computed
deterministically from the impairment spec and seed, so tests can treat
the channel log as ground truth for loss, reordering, capacity and
delay measurements. Frames offered on the TX side emerge on the RX
handler of the same port, the way a cabled loop to an ingress port
would behave.

The socket channel carries encoded frames between two generator
instances (or to an external device) as UDP datagrams, each payload
being a 4-byte big-endian length prefix plus the frame bytes.
"""

from __future__ import annotations

import heapq
import socket
import struct
import threading
from collections import deque
from dataclasses import dataclass
from random import Random
from typing import Callable

from . import packet_codec
from .clock import Clock, SystemClock

VERDICT_DELIVERED = "delivered"
VERDICT_DROPPED = "dropped"
VERDICT_REORDERED = "reordered"

RxHandler = Callable[[bytes, int, int], None]  # (frame, rx_ts_ns, port)

DEFAULT_SOCKET_PORT = 50000
_LEN_PREFIX = struct.Struct(">I")


class InvalidSpec(Exception):
    pass


class BindFailure(Exception):
    pass


class Unreachable(Exception):
    pass


@dataclass(frozen=True)
class ImpairmentSpec:
    """Virtual-DUT behavior knobs.

    delay is constant, jitter adds a uniform [0, jitter] component,
    reordering gives selected frames an extra delay so later frames
    overtake them. capacity_l1 models a bottleneck link at L1 byte
    accounting (frame + FCS + preamble/IFG) with a bounded FIFO queue;
    frames that would wait longer than capacity_queue are tail-dropped.
    blackout is a (start_ns, duration_ns) window, in the channel clock
    domain, during which every offered frame is dropped.
    """

    drop_probability: float = 0.0
    delay_ns: int = 0
    jitter_ns: int = 0
    reorder_probability: float = 0.0
    reorder_extra_delay_ns: int = 0
    capacity_l1: float | None = None
    capacity_queue_ns: int = 20_000_000
    blackout: tuple[int, int] | None = None

    def validate(self) -> "ImpairmentSpec":
        for name in ("drop_probability", "reorder_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidSpec(f"{name} must be in [0, 1], got {p}")
        if self.capacity_l1 is not None and self.capacity_l1 <= 0:
            raise InvalidSpec("capacity_l1 must be positive when set")
        if self.delay_ns < 0 or self.jitter_ns < 0 or self.reorder_extra_delay_ns < 0:
            raise InvalidSpec("delays must be non-negative")
        if self.capacity_queue_ns <= 0:
            raise InvalidSpec("capacity_queue_ns must be positive")
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "ImpairmentSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InvalidSpec(f"unknown impairment fields: {sorted(unknown)}")
        blackout = d.get("blackout")
        if blackout is not None:
            blackout = (int(blackout[0]), int(blackout[1]))
        return cls(**{**d, "blackout": blackout}).validate()


@dataclass
class ChannelLogEntry:
    stream_id: int
    seq: int
    verdict: str
    enqueue_ns: int
    deliver_ns: int | None


class LoopbackChannel:
    """Deterministic in-process channel with impairments.

    Delivery order is the computed deliver_ts order; frames become
    deliverable once no future offer could precede them, which makes the
    channel exact in both real-time and virtual-clock runs. flush()
    forces out everything still pending (used at stop time).
    """

    def __init__(
        self,
        spec: ImpairmentSpec,
        seed: int = 0,
        clock: Clock | None = None,
        log_enabled: bool = True,
    ) -> None:
        self.spec = spec.validate()
        self.clock = clock if clock is not None else SystemClock()
        self.log_enabled = log_enabled
        self.log: list[ChannelLogEntry] = []
        self._rng = Random(seed)
        self._lock = threading.Lock()
        self._drained = threading.Condition(self._lock)
        self._heap: list[tuple[int, int, int, bytes]] = []
        self._next_idx = 0
        self._last_enqueue = 0
        self._busy_until = 0
        self._blackout = self.spec.blackout
        self._rx_handler: RxHandler | None = None
        self._taps: list[RxHandler] = []
        # Due frames move from the heap to this FIFO under the lock and are
        # dispatched outside it by whichever thread holds the baton, so
        # handlers may re-enter offer() (the ARP responder does) and
        # delivery order still follows the computed schedule.
        self._outbox: deque[tuple[bytes, int, int]] = deque()
        self._delivering = False
        self.offered = 0
        self.delivered = 0
        self.dropped = 0
        self.reordered = 0
        self.dropped_by_stream: dict[int, int] = {}
        self._pump: threading.Thread | None = None
        self._pump_stop = threading.Event()

    def set_rx_handler(self, handler: RxHandler | None) -> None:
        self._rx_handler = handler

    def add_tap(self, tap: RxHandler) -> None:
        self._taps.append(tap)

    def trigger_blackout(self, duration_ns: int, delay_ns: int = 0) -> tuple[int, int]:
        """Arm a blackout window starting delay_ns from now."""
        start = self.clock.now() + delay_ns
        with self._lock:
            self._blackout = (start, duration_ns)
        return (start, duration_ns)

    def offer(
        self,
        frame: bytes,
        port: int = 0,
        stream_id: int = 0,
        seq: int = 0,
        enqueue_ts: int | None = None,
    ) -> None:
        spec = self.spec
        with self._lock:
            ts = enqueue_ts if enqueue_ts is not None else self.clock.now()
            # Enqueue times must be monotone for exact delivery ordering;
            # cross-thread clock reads can race by a hair.
            if ts < self._last_enqueue:
                ts = self._last_enqueue
            self._last_enqueue = ts
            self.offered += 1

            verdict = VERDICT_DELIVERED
            deliver: int | None = None

            blk = self._blackout
            if blk is not None and blk[0] <= ts < blk[0] + blk[1]:
                verdict = VERDICT_DROPPED
            elif spec.drop_probability > 0.0 and self._rng.random() < spec.drop_probability:
                verdict = VERDICT_DROPPED

            if verdict is not VERDICT_DROPPED and spec.capacity_l1 is not None:
                l1_bits = (len(frame) + packet_codec.FCS_LEN + packet_codec.L1_FRAME_OVERHEAD) * 8
                service = l1_bits * 1e9 / spec.capacity_l1
                start = ts if ts > self._busy_until else self._busy_until
                if start - ts > spec.capacity_queue_ns:
                    verdict = VERDICT_DROPPED
                else:
                    self._busy_until = start + service
                    deliver = round(self._busy_until)
            elif verdict is not VERDICT_DROPPED:
                deliver = ts

            if verdict is not VERDICT_DROPPED:
                deliver += spec.delay_ns
                if spec.jitter_ns > 0:
                    deliver += int(self._rng.random() * spec.jitter_ns)
                if (
                    spec.reorder_probability > 0.0
                    and self._rng.random() < spec.reorder_probability
                ):
                    deliver += spec.reorder_extra_delay_ns
                    verdict = VERDICT_REORDERED
                heapq.heappush(self._heap, (deliver, self._next_idx, port, frame))
                self._next_idx += 1
            else:
                self.dropped += 1
                self.dropped_by_stream[stream_id] = (
                    self.dropped_by_stream.get(stream_id, 0) + 1
                )

            if self.log_enabled:
                self.log.append(ChannelLogEntry(stream_id, seq, verdict, ts, deliver))
            if verdict is VERDICT_REORDERED:
                self.reordered += 1

            # Anything scheduled at or before this enqueue instant can no
            # longer be overtaken by a future offer.
            self._collect_due(ts)
        self._drain_outbox()

    def _collect_due(self, up_to: int) -> None:
        # Lock held. Heap pops are globally ordered by deliver time, so the
        # outbox FIFO preserves the delivery schedule across threads.
        heap = self._heap
        outbox = self._outbox
        while heap and heap[0][0] <= up_to:
            deliver, _idx, port, frame = heapq.heappop(heap)
            self.delivered += 1
            outbox.append((frame, deliver, port))

    def _drain_outbox(self) -> None:
        while True:
            with self._lock:
                if self._delivering or not self._outbox:
                    return
                self._delivering = True
                batch = list(self._outbox)
                self._outbox.clear()
            try:
                handler = self._rx_handler
                for frame, deliver, port in batch:
                    if handler is not None:
                        handler(frame, deliver, port)
                    for tap in self._taps:
                        tap(frame, deliver, port)
            finally:
                with self._lock:
                    self._delivering = False
                    self._drained.notify_all()

    def flush(self, up_to: int | None = None) -> None:
        """Deliver everything due (everything pending, by default) and only
        return once those deliveries have been dispatched, even if another
        thread currently holds the dispatch baton."""
        with self._lock:
            self._collect_due(up_to if up_to is not None else (1 << 62))
        self._drain_outbox()
        with self._lock:
            while self._delivering or self._outbox:
                self._drained.wait(timeout=1.0)

    def pending(self) -> int:
        with self._lock:
            return len(self._heap) + len(self._outbox)

    def start_pump(self, interval_s: float = 0.01) -> None:
        """Background delivery for real-time runs: frames emerge close to
        their computed deliver time instead of waiting for the next offer."""
        if self._pump is not None:
            return
        self._pump_stop.clear()

        def run() -> None:
            while not self._pump_stop.wait(interval_s):
                self.flush(self.clock.now())

        self._pump = threading.Thread(target=run, name="channel-pump", daemon=True)
        self._pump.start()

    def stop_pump(self) -> None:
        if self._pump is not None:
            self._pump_stop.set()
            self._pump.join()
            self._pump = None

    def export_log_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["stream_id", "seq", "verdict", "enqueue_ns", "deliver_ns"])
            for e in self.log:
                w.writerow([e.stream_id, e.seq, e.verdict, e.enqueue_ns, e.deliver_ns])


def open_loopback(
    spec: ImpairmentSpec,
    seed: int = 0,
    clock: Clock | None = None,
    log_enabled: bool = True,
) -> LoopbackChannel:
    return LoopbackChannel(spec, seed=seed, clock=clock, log_enabled=log_enabled)


def inject_arp_request(
    channel: "LoopbackChannel",
    target_ip: str,
    requester_mac: str,
    requester_ip: str,
    port: int = 0,
) -> None:
    """Push a who-has request into the channel, as a DUT-side host would."""
    frame = packet_codec.encode_arp_request(target_ip, requester_mac, requester_ip)
    channel.offer(frame, port=port, stream_id=0, seq=0)


class SocketChannel:
    """Datagram transport between two generator instances.

    Whole Ethernet frames ride as UDP payloads with a 4-byte length
    prefix; no privileged raw-link access is needed.
    """

    def __init__(
        self,
        local: tuple[str, int],
        remote: tuple[str, int] | None,
        port_id: int = 0,
        clock: Clock | None = None,
    ) -> None:
        self.remote = remote
        self.port_id = port_id
        self.clock = clock if clock is not None else SystemClock()
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        try:
            self._sock.bind(local)
        except OSError as exc:
            self._sock.close()
            raise BindFailure(f"cannot bind {local}: {exc}") from None
        self._rx_handler: RxHandler | None = None
        self._rx_thread: threading.Thread | None = None
        self._closed = threading.Event()
        self.tx_frames = 0
        self.rx_frames = 0

    def set_rx_handler(self, handler: RxHandler | None) -> None:
        self._rx_handler = handler

    def start(self) -> None:
        if self._rx_thread is not None:
            return
        self._sock.settimeout(0.1)

        def run() -> None:
            while not self._closed.is_set():
                try:
                    payload, _addr = self._sock.recvfrom(65535)
                except socket.timeout:
                    continue
                except OSError:
                    break
                if len(payload) < _LEN_PREFIX.size:
                    continue
                (length,) = _LEN_PREFIX.unpack_from(payload)
                frame = payload[_LEN_PREFIX.size : _LEN_PREFIX.size + length]
                if len(frame) != length:
                    continue
                self.rx_frames += 1
                handler = self._rx_handler
                if handler is not None:
                    handler(frame, self.clock.now(), self.port_id)

        self._rx_thread = threading.Thread(target=run, name="socket-rx", daemon=True)
        self._rx_thread.start()

    def offer(
        self,
        frame: bytes,
        port: int = 0,
        stream_id: int = 0,
        seq: int = 0,
        enqueue_ts: int | None = None,
    ) -> None:
        if self.remote is None:
            raise Unreachable("no remote endpoint configured")
        self._sock.sendto(_LEN_PREFIX.pack(len(frame)) + frame, self.remote)
        self.tx_frames += 1

    def flush(self, up_to: int | None = None) -> None:
        pass  # datagrams leave immediately

    def close(self) -> None:
        self._closed.set()
        if self._rx_thread is not None:
            self._rx_thread.join()
            self._rx_thread = None
        self._sock.close()


def open_socket(
    local: tuple[str, int],
    remote: tuple[str, int] | None,
    port_id: int = 0,
    clock: Clock | None = None,
) -> SocketChannel:
    return SocketChannel(local, remote, port_id=port_id, clock=clock)

"""REST control plane: configuration, run lifecycle, test orchestration.

A single Orchestrator owns the lifecycle state machine (idle, running,
plan-running); HTTP handlers are thin wrappers that translate its
outcomes to status codes. Multi-test plans execute sequentially on a
worker thread with a quiesce gap between tests so statistics never
bleed across; profile runs (IMIX, RFC 2544) land their results in the
same store. All bodies and responses are JSON under /api/v1.
"""

from __future__ import annotations

import argparse
import copy
import io
import json
import os
import threading
import time
import uuid
from collections import deque
from dataclasses import asdict, dataclass, field

from . import gen_engine, packet_codec, profiles, traffic_model
from .channel import ImpairmentSpec, LoopbackChannel
from .clock import SystemClock
from .rx_analyzer import RxAnalyzer
from .traffic_model import DeviceProfile, ValidationError

QUIESCE_GAP_S = 0.5
TIMESERIES_BUCKET_S = 0.1
TIMESERIES_RETENTION = 36000  # 1 h of 100 ms buckets

STATE_IDLE = "idle"
STATE_RUNNING = "running"
STATE_PLAN = "plan_running"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, path: str = "") -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.path = path

    def body(self) -> dict:
        return {"code": self.code, "message": self.message, "path": self.path}


@dataclass
class PlanJob:
    plan_id: str
    kind: str  # "plan" | "profile"
    status: str = "pending"  # pending | running | done | failed
    current_index: int = 0
    test_names: list[str] = field(default_factory=list)
    results: list[dict] = field(default_factory=list)
    profile_result: dict | None = None
    error: str | None = None

    def status_dict(self) -> dict:
        return {
            "plan_id": self.plan_id,
            "kind": self.kind,
            "status": self.status,
            "current_index": self.current_index,
            "tests": list(self.test_names),
            "completed": len(self.results),
            "error": self.error,
        }


class TimeSeriesStore:
    """Ring of per-bucket aggregate deltas sampled from the live analyzer."""

    def __init__(self) -> None:
        self._ring: deque[dict] = deque(maxlen=TIMESERIES_RETENTION)
        self._lock = threading.Lock()
        self._prev: dict | None = None
        self._appended = 0

    def reset_baseline(self) -> None:
        with self._lock:
            self._prev = None

    def sample(self, snapshot, wall_time: float) -> None:
        totals = {
            "tx_frames": 0,
            "tx_bytes_l2": 0,
            "rx_frames": 0,
            "rx_bytes_l2": 0,
            "lost": 0,
            "out_of_order": 0,
        }
        for s in snapshot.streams.values():
            totals["tx_frames"] += s["tx_frames"]
            totals["tx_bytes_l2"] += s["tx_bytes_l2"]
            totals["rx_frames"] += s["rx_frames"]
            totals["rx_bytes_l2"] += s["rx_bytes_l2"]
            totals["lost"] += s["lost"]
            totals["out_of_order"] += s["out_of_order"]
        with self._lock:
            prev = self._prev
            self._prev = totals
            if prev is None:
                return
            d = {k: totals[k] - prev[k] for k in totals}
            span = TIMESERIES_BUCKET_S
            self._ring.append(
                {
                    "t": wall_time,
                    "tx_rate_l1": (d["tx_bytes_l2"] + d["tx_frames"] * 20) * 8 / span,
                    "tx_rate_l2": d["tx_bytes_l2"] * 8 / span,
                    "rx_rate_l1": (d["rx_bytes_l2"] + d["rx_frames"] * 20) * 8 / span,
                    "rx_rate_l2": d["rx_bytes_l2"] * 8 / span,
                    "tx_frames": d["tx_frames"],
                    "rx_frames": d["rx_frames"],
                    "lost": d["lost"],
                    "out_of_order": d["out_of_order"],
                }
            )
            self._appended += 1

    def entries(self) -> list[dict]:
        with self._lock:
            return list(self._ring)

    def mark(self) -> int:
        with self._lock:
            return self._appended

    def since(self, mark: int) -> list[dict]:
        with self._lock:
            new = self._appended - mark
            if new <= 0:
                return []
            return list(self._ring)[-new:]


class Orchestrator:
    """Owns the channel, the lifecycle state machine and all results."""

    def __init__(
        self,
        impairment: ImpairmentSpec | None = None,
        device_profile: DeviceProfile = DeviceProfile.GEN2,
        seed: int = 0,
        channel=None,
        pump: bool = True,
    ) -> None:
        self.device_profile = device_profile
        self.seed = seed
        self.clock = SystemClock()
        self.impairment = impairment if impairment is not None else ImpairmentSpec()
        if channel is None:
            channel = LoopbackChannel(self.impairment, seed=seed, clock=self.clock)
        self.channel = channel
        if pump and hasattr(channel, "start_pump"):
            channel.start_pump()
        self.channel.set_rx_handler(self._on_rx)

        self._lock = threading.RLock()
        self._state = STATE_IDLE
        self._config: traffic_model.ValidatedConfig | None = None
        self._config_json: dict | None = None
        self._arp_map: dict[int, str] = {}
        self._known_ports: set[int] = set()
        self._analyzer: RxAnalyzer | None = None
        self._handle: gen_engine.GenHandle | None = None
        self._run_started: float = 0.0
        self._last_summary: gen_engine.TxSummary | None = None
        self._plans: dict[str, PlanJob] = {}
        self.timeseries = TimeSeriesStore()
        self._sampler_stop = threading.Event()
        self._sampler = threading.Thread(
            target=self._sample_loop, name="stats-sampler", daemon=True
        )
        self._sampler.start()

    # -- receive path ------------------------------------------------------

    def _on_rx(self, frame: bytes, rx_ts: int, port: int) -> None:
        analyzer = self._analyzer
        if analyzer is not None:
            analyzer.ingest_raw(frame, rx_ts, port)
        reply_mac = self._arp_map.get(port)
        if reply_mac is not None and len(frame) >= packet_codec.ARP_FRAME_LEN:
            arp = packet_codec.parse_arp(frame)
            if arp is not None and arp.opcode == packet_codec.ARP_OP_REQUEST:
                reply = packet_codec.encode_arp_reply(arp, reply_mac)
                self.channel.offer(reply, port=port, stream_id=0, seq=0)

    def _sample_loop(self) -> None:
        while not self._sampler_stop.wait(TIMESERIES_BUCKET_S):
            analyzer = self._analyzer
            if analyzer is not None and self._state != STATE_IDLE:
                self.timeseries.sample(analyzer.snapshot(self.clock.now()), time.time())

    def close(self) -> None:
        self._sampler_stop.set()
        if hasattr(self.channel, "stop_pump"):
            self.channel.stop_pump()

    # -- configuration -----------------------------------------------------

    def configure(self, body: dict) -> dict:
        try:
            cfg = traffic_model.parse_config(body)
            validated = traffic_model.validate_config(cfg, self.device_profile)
        except ValidationError as exc:
            raise ApiError(400, exc.code, exc.message, exc.path) from None
        with self._lock:
            self._config = validated
            self._config_json = traffic_model.config_to_dict(validated)
            self._known_ports = {p for s in validated.streams for p in s.tx_ports} | {
                p.port_id for p in validated.port_configs
            }
            self._arp_map = {
                p.port_id: traffic_model.normalize_mac(p.arp_reply_mac)
                for p in validated.port_configs
                if p.arp_reply_enabled and p.arp_reply_mac
            }
            return copy.deepcopy(self._config_json)

    def current_config(self) -> dict:
        with self._lock:
            if self._config_json is None:
                raise ApiError(404, "NotConfigured", "no configuration stored")
            return copy.deepcopy(self._config_json)

    def arp_config(self, port: int, enabled: bool, mac: str | None) -> dict:
        with self._lock:
            if port not in self._known_ports:
                raise ApiError(404, "UnknownPort", f"port {port} not configured")
            if enabled:
                if not mac:
                    raise ApiError(
                        400, "MissingArpMac", "arp_reply_mac required when enabling"
                    )
                try:
                    self._arp_map[port] = traffic_model.normalize_mac(mac)
                except ValidationError as exc:
                    raise ApiError(400, exc.code, exc.message, exc.path) from None
            else:
                self._arp_map.pop(port, None)
            return {"port_id": port, "arp_reply_enabled": enabled, "arp_reply_mac": mac}

    # -- run lifecycle -----------------------------------------------------

    def _start_locked(self, validated: traffic_model.ValidatedConfig) -> None:
        analyzer = RxAnalyzer(seed=self.seed)
        analyzer.register_streams([s.stream_id for s in validated.streams])
        self._analyzer = analyzer
        self.timeseries.reset_baseline()
        self._handle = gen_engine.start(
            validated,
            self.channel,
            self.clock,
            seed=self.seed,
            tx_tap=analyzer.ingest_tx,
            record_log=False,
        )
        self._run_started = time.monotonic()

    def _stop_locked(self) -> tuple[gen_engine.TxSummary, float]:
        summary = self._handle.stop()
        self._handle = None
        self.channel.flush()
        duration = time.monotonic() - self._run_started
        self._analyzer.finalize_all(summary.expected_counts())
        self._last_summary = summary
        return summary, duration

    def start(self) -> dict:
        with self._lock:
            if self._state != STATE_IDLE:
                raise ApiError(409, "AlreadyRunning", f"state is {self._state}")
            if self._config is None:
                raise ApiError(409, "NotConfigured", "configure before starting")
            self._start_locked(self._config)
            self._state = STATE_RUNNING
            return {"state": self._state}

    def stop(self) -> dict:
        with self._lock:
            if self._state != STATE_RUNNING:
                raise ApiError(409, "NotRunning", f"state is {self._state}")
            summary, duration = self._stop_locked()
            self._state = STATE_IDLE
            return {
                "state": self._state,
                "duration_s": duration,
                "tx": {
                    str(sid): asdict(s) for sid, s in summary.per_stream.items()
                },
            }

    # -- statistics ----------------------------------------------------------

    def statistics(self, name: str = "live") -> dict:
        if name == "live":
            analyzer = self._analyzer
            if analyzer is None:
                return {"ts_ns": self.clock.now(), "streams": {}, "ports": {}}
            return asdict(analyzer.snapshot(self.clock.now()))
        with self._lock:
            for job in self._plans.values():
                for result in job.results:
                    if result["name"] == name:
                        return copy.deepcopy(result["statistics"])
        raise ApiError(404, "UnknownTest", f"no completed test named {name!r}")

    # -- plans ---------------------------------------------------------------

    def _parse_plan(self, body: dict) -> list[dict]:
        if not isinstance(body, dict) or not isinstance(body.get("tests"), list):
            raise ApiError(400, "InvalidPlan", "body must contain a tests list")
        tests = []
        names = set()
        for i, entry in enumerate(body["tests"]):
            name = entry.get("name") or f"test-{i + 1}"
            if name in names:
                raise ApiError(400, "InvalidPlan", f"duplicate test name {name!r}", f"tests[{i}].name")
            names.add(name)
            duration = entry.get("duration_s", entry.get("duration"))
            if not isinstance(duration, (int, float)) or duration <= 0:
                raise ApiError(
                    400, "InvalidPlan", "duration_s must be positive", f"tests[{i}].duration_s"
                )
            try:
                cfg = traffic_model.parse_config(entry.get("config") or {})
                validated = traffic_model.validate_config(cfg, self.device_profile)
            except ValidationError as exc:
                raise ApiError(
                    400, exc.code, exc.message, f"tests[{i}].config.{exc.path}"
                ) from None
            tests.append({"name": name, "duration_s": float(duration), "config": validated})
        if not tests:
            raise ApiError(400, "InvalidPlan", "plan contains no tests")
        return tests

    def run_plan(self, body: dict) -> dict:
        tests = self._parse_plan(body)
        with self._lock:
            if self._state != STATE_IDLE:
                raise ApiError(409, "PlanRunning", f"state is {self._state}")
            job = PlanJob(
                plan_id=f"plan-{uuid.uuid4().hex[:8]}",
                kind="plan",
                test_names=[t["name"] for t in tests],
            )
            self._plans[job.plan_id] = job
            self._state = STATE_PLAN
        thread = threading.Thread(
            target=self._execute_plan, args=(job, tests), name=job.plan_id, daemon=True
        )
        job.status = "running"
        thread.start()
        return {"plan_id": job.plan_id, "status": job.status}

    def _execute_plan(self, job: PlanJob, tests: list[dict]) -> None:
        try:
            for i, test in enumerate(tests):
                job.current_index = i
                mark = self.timeseries.mark()
                started_wall = time.time()
                with self._lock:
                    self._start_locked(test["config"])
                time.sleep(test["duration_s"])
                with self._lock:
                    summary, duration = self._stop_locked()
                    snapshot = asdict(self._analyzer.snapshot(self.clock.now()))
                job.results.append(
                    {
                        "name": test["name"],
                        "started_at": started_wall,
                        "duration_s": test["duration_s"],
                        "duration_actual_s": duration,
                        "config": traffic_model.config_to_dict(test["config"]),
                        "statistics": snapshot,
                        "tx": {str(sid): asdict(s) for sid, s in summary.per_stream.items()},
                        "time_series": self.timeseries.since(mark),
                    }
                )
                if i < len(tests) - 1:
                    time.sleep(QUIESCE_GAP_S)
            job.status = "done"
        except Exception as exc:  # surfaced via status endpoint
            job.status = "failed"
            job.error = f"{type(exc).__name__}: {exc}"
        finally:
            with self._lock:
                self._state = STATE_IDLE

    def plan_status(self, plan_id: str) -> dict:
        job = self._plans.get(plan_id)
        if job is None:
            raise ApiError(404, "UnknownPlan", f"no plan {plan_id!r}")
        return job.status_dict()

    # -- profiles --------------------------------------------------------------

    def run_profile(self, name: str, params: dict) -> dict:
        params = params or {}
        if name == "imix":
            entries = params.get("entries")
            profile = (
                profiles.ImixProfile(entries=tuple((int(s), int(w)) for s, w in entries))
                if entries
                else profiles.ImixProfile()
            )
            try:
                cfg = profiles.imix_streams(profile, float(params.get("total_rate_l1", 1e7)))
            except (profiles.TooManyEntries, ValueError) as exc:
                raise ApiError(400, type(exc).__name__, str(exc)) from None
            plan = {
                "tests": [
                    {
                        "name": params.get("test_name", "imix"),
                        "config": traffic_model.config_to_dict(cfg),
                        "duration_s": float(params.get("duration_s", 10.0)),
                    }
                ]
            }
            out = self.run_plan(plan)
            self._plans[out["plan_id"]].kind = "profile"
            return out
        if name == "rfc2544":
            try:
                cfg = profiles.Rfc2544Config(
                    max_rate=float(params.get("max_rate", 1e9)),
                    frame_sizes=tuple(params.get("frame_sizes", profiles.RFC2544_FRAME_SIZES)),
                    trial_duration_s=float(params.get("trial_duration_s", 10.0)),
                    resolution=float(params.get("resolution", 0.01)),
                    loss_tolerance=float(params.get("loss_tolerance", 0.0)),
                ).validate()
            except ValueError as exc:
                raise ApiError(400, "InvalidProfileParams", str(exc)) from None
            with self._lock:
                if self._state != STATE_IDLE:
                    raise ApiError(409, "PlanRunning", f"state is {self._state}")
                job = PlanJob(plan_id=f"plan-{uuid.uuid4().hex[:8]}", kind="profile")
                self._plans[job.plan_id] = job
                self._state = STATE_PLAN

            def run() -> None:
                try:
                    runner = profiles.LoopbackTrialRunner(
                        impairment=self.impairment, seed=self.seed
                    )
                    result = profiles.run_rfc2544(
                        cfg,
                        runner,
                        include_loss_curve=bool(params.get("include_loss_curve", False)),
                        include_reset=bool(params.get("include_reset", False)),
                    )
                    job.profile_result = result.to_dict()
                    job.status = "done"
                except Exception as exc:
                    job.status = "failed"
                    job.error = f"{type(exc).__name__}: {exc}"
                finally:
                    with self._lock:
                        self._state = STATE_IDLE

            job.status = "running"
            threading.Thread(target=run, name=job.plan_id, daemon=True).start()
            return {"plan_id": job.plan_id, "status": job.status}
        raise ApiError(404, "UnknownProfile", f"no profile {name!r}")

    # -- reports -----------------------------------------------------------------

    def report(self, plan_id: str, fmt: str = "json") -> tuple[str, str]:
        """Returns (content, media_type)."""
        job = self._plans.get(plan_id)
        if job is None:
            raise ApiError(404, "UnknownPlan", f"no plan {plan_id!r}")
        if job.status in ("pending", "running"):
            raise ApiError(409, "PlanRunning", f"plan {plan_id} still {job.status}")
        if fmt == "json":
            report = {
                "metadata": {
                    "version": _version(),
                    "plan_id": plan_id,
                    "kind": job.kind,
                    "status": job.status,
                },
                "tests": job.results,
                "profile_result": job.profile_result,
            }
            return json.dumps(report, sort_keys=True), "application/json"
        if fmt == "csv":
            import csv

            buf = io.StringIO()
            w = csv.writer(buf)
            if job.profile_result is not None and not job.results:
                w.writerow(["frame_size", "metric", "value"])
                for size, tp in job.profile_result.get("throughput", {}).items():
                    w.writerow([size, "throughput_l1_bps", tp["rate_l1"]])
                for size, lat in job.profile_result.get("latency", {}).items():
                    w.writerow([size, "rtt_mean_ns", lat["rtt_mean_ns"]])
            else:
                w.writerow(
                    [
                        "test",
                        "stream_id",
                        "frames_tx",
                        "frames_rx",
                        "lost",
                        "out_of_order",
                        "rate_l1_tx",
                        "rate_l1_rx",
                        "rtt_mean_ns",
                        "rtt_min_ns",
                        "rtt_max_ns",
                        "iat_mean_ns",
                    ]
                )
                for result in job.results:
                    duration = result["duration_actual_s"] or 1.0
                    for sid, s in sorted(result["statistics"]["streams"].items()):
                        rtt = s["rtt"]
                        iat = s["iat"]
                        w.writerow(
                            [
                                result["name"],
                                sid,
                                s["tx_frames"],
                                s["rx_frames"],
                                s["lost"],
                                s["out_of_order"],
                                (s["tx_bytes_l2"] + 20 * s["tx_frames"]) * 8 / duration,
                                (s["rx_bytes_l2"] + 20 * s["rx_frames"]) * 8 / duration,
                                rtt["mean"],
                                rtt["min"],
                                rtt["max"],
                                iat["mean"],
                            ]
                        )
            return buf.getvalue(), "text/csv"
        raise ApiError(400, "UnknownFormat", f"format must be json or csv, got {fmt!r}")


def _version() -> str:
    from . import __version__

    return __version__


# --- JSON schemas (published at /api/v1/schema) --------------------------------

_VLAN_SCHEMA = {
    "type": "object",
    "required": ["vlan_id"],
    "properties": {
        "vlan_id": {"type": "integer", "minimum": 0, "maximum": 4095},
        "pcp": {"type": "integer", "minimum": 0, "maximum": 7},
        "dei": {"type": "integer", "minimum": 0, "maximum": 1},
    },
}

CONFIG_SCHEMA = {
    "$id": "swtg/generation-config",
    "type": "object",
    "required": ["streams"],
    "properties": {
        "streams": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["stream_id", "mode", "target_rate_l1", "frame_size", "eth", "l3"],
                "properties": {
                    "stream_id": {"type": "integer", "minimum": 1, "maximum": 255},
                    "mode": {"enum": ["CBR", "POISSON"]},
                    "target_rate_l1": {"type": "number", "exclusiveMinimum": 0},
                    "frame_size": {"type": "integer", "minimum": 64, "maximum": 9000},
                    "eth": {
                        "type": "object",
                        "required": ["src_mac", "dst_mac"],
                        "properties": {
                            "src_mac": {"type": "string"},
                            "dst_mac": {"type": "string"},
                        },
                    },
                    "l3": {
                        "type": "object",
                        "required": ["version", "src", "dst"],
                        "properties": {
                            "version": {"enum": [4, 6]},
                            "src": {"type": "string"},
                            "dst": {"type": "string"},
                            "src_random_mask": {"type": ["integer", "string"]},
                            "dst_random_mask": {"type": ["integer", "string"]},
                            "tos": {"type": "integer"},
                            "traffic_class": {"type": "integer"},
                            "flow_label": {"type": "integer"},
                        },
                    },
                    "encap": {
                        "type": "object",
                        "properties": {
                            "vlan": _VLAN_SCHEMA,
                            "qinq": {
                                "type": "object",
                                "required": ["outer", "inner"],
                                "properties": {"outer": _VLAN_SCHEMA, "inner": _VLAN_SCHEMA},
                            },
                            "mpls": {
                                "type": "array",
                                "maxItems": 15,
                                "items": {
                                    "type": "object",
                                    "required": ["label"],
                                    "properties": {
                                        "label": {"type": "integer", "minimum": 0, "maximum": 1048575},
                                        "tc": {"type": "integer", "minimum": 0, "maximum": 7},
                                        "ttl": {"type": "integer", "minimum": 0, "maximum": 255},
                                    },
                                },
                            },
                            "srv6": {
                                "type": "object",
                                "required": ["src", "dst", "segments"],
                                "properties": {
                                    "src": {"type": "string"},
                                    "dst": {"type": "string"},
                                    "segments": {
                                        "type": "array",
                                        "minItems": 1,
                                        "maxItems": 3,
                                        "items": {"type": "string"},
                                    },
                                },
                            },
                            "vxlan": {
                                "type": "object",
                                "required": ["outer_eth", "outer_src", "outer_dst", "vni"],
                                "properties": {
                                    "outer_eth": {"type": "object"},
                                    "outer_src": {"type": "string"},
                                    "outer_dst": {"type": "string"},
                                    "vni": {"type": "integer", "minimum": 0, "maximum": 16777215},
                                    "udp_src_port": {"type": "integer"},
                                },
                            },
                        },
                    },
                    "tx_ports": {"type": "array", "items": {"type": "integer"}},
                    "udp_src_port": {"type": "integer"},
                    "udp_dst_port": {"type": "integer"},
                },
            },
        },
        "port_configs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["port_id"],
                "properties": {
                    "port_id": {"type": "integer"},
                    "arp_reply_enabled": {"type": "boolean"},
                    "arp_reply_mac": {"type": ["string", "null"]},
                },
            },
        },
    },
}

PLAN_SCHEMA = {
    "$id": "swtg/test-plan",
    "type": "object",
    "required": ["tests"],
    "properties": {
        "tests": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["config", "duration_s"],
                "properties": {
                    "name": {"type": "string"},
                    "config": {"$ref": "swtg/generation-config"},
                    "duration_s": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        }
    },
}


def create_app(orch: Orchestrator):
    """Build the FastAPI application around an orchestrator."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse, Response

    app = FastAPI(title="swtg", version=_version())
    app.state.orchestrator = orch

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    prefix = "/api/v1"

    @app.post(f"{prefix}/configure")
    def configure(body: dict):
        return orch.configure(body)

    @app.get(f"{prefix}/configure")
    def get_configure():
        return orch.current_config()

    @app.post(f"{prefix}/start")
    def start():
        return orch.start()

    @app.post(f"{prefix}/stop")
    def stop():
        return orch.stop()

    @app.post(f"{prefix}/tests", status_code=202)
    def run_tests(body: dict):
        return orch.run_plan(body)

    @app.get(f"{prefix}/tests/{{plan_id}}")
    def tests_status(plan_id: str):
        return orch.plan_status(plan_id)

    @app.get(f"{prefix}/statistics")
    def statistics(test: str = "live"):
        return orch.statistics(test)

    @app.get(f"{prefix}/timeseries")
    def timeseries():
        return orch.timeseries.entries()

    @app.put(f"{prefix}/ports/{{port_id}}/arp")
    def arp_config(port_id: int, body: dict):
        return orch.arp_config(port_id, bool(body.get("enabled")), body.get("mac"))

    @app.get(f"{prefix}/report/{{plan_id}}")
    def report(plan_id: str, format: str = "json"):
        content, media_type = orch.report(plan_id, format)
        return Response(content=content, media_type=media_type)

    @app.post(f"{prefix}/profiles/{{name}}", status_code=202)
    def profiles_run(name: str, body: dict | None = None):
        return orch.run_profile(name, body or {})

    @app.get(f"{prefix}/schema")
    def schema():
        return {"generation_config": CONFIG_SCHEMA, "test_plan": PLAN_SCHEMA}

    frontend_dist = os.path.join(os.path.dirname(__file__), "..", "..", "frontend", "dist")
    if os.path.isdir(frontend_dist):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dist, html=True), name="ui")

    return app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="swtg", description="software traffic generator")
    parser.add_argument("--listen", default="0.0.0.0:8000")
    parser.add_argument("--mode", choices=["loopback", "socket"], default="loopback")
    parser.add_argument("--impair", help="impairment spec JSON file", default=None)
    parser.add_argument("--profile-caps", choices=["gen1", "gen2"], default="gen2")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--socket-local", help="host:port to bind (socket mode)")
    parser.add_argument("--socket-remote", help="host:port peer (socket mode)")
    args = parser.parse_args(argv)

    impairment = ImpairmentSpec()
    if args.impair:
        with open(args.impair) as fh:
            impairment = ImpairmentSpec.from_dict(json.load(fh))

    channel = None
    if args.mode == "socket":
        from .channel import open_socket

        def addr(s: str) -> tuple[str, int]:
            host, _, port = s.rpartition(":")
            return (host or "0.0.0.0", int(port))

        local = addr(args.socket_local or "0.0.0.0:50000")
        remote = addr(args.socket_remote) if args.socket_remote else None
        channel = open_socket(local, remote)
        channel.start()

    orch = Orchestrator(
        impairment=impairment,
        device_profile=DeviceProfile(args.profile_caps),
        seed=args.seed,
        channel=channel,
    )
    app = create_app(orch)

    import uvicorn

    listen = os.environ.get("SWTG_LISTEN") or args.listen
    host, _, port = listen.rpartition(":")
    uvicorn.run(app, host=host or "0.0.0.0", port=int(port))


if __name__ == "__main__":
    main()

"""REST control plane: lifecycle, plans, reports, ARP, statistics."""

import csv
import io
import json
import time
from random import Random

import pytest
from fastapi.testclient import TestClient

from swtg import packet_codec as pc
from swtg.channel import ImpairmentSpec, inject_arp_request
from swtg.control_api import Orchestrator, create_app
from swtg.traffic_model import DeviceProfile

BASE = "/api/v1"


def stream_dict(stream_id=1, rate=5e6, size=512, **kw):
    d = {
        "stream_id": stream_id,
        "mode": "CBR",
        "target_rate_l1": rate,
        "frame_size": size,
        "eth": {"src_mac": "02:00:00:00:00:01", "dst_mac": "02:00:00:00:00:02"},
        "l3": {"version": 4, "src": "10.0.0.1", "dst": "10.0.0.2"},
        "tx_ports": [0],
    }
    d.update(kw)
    return d


def config_dict(*streams, ports=None):
    return {
        "streams": list(streams) or [stream_dict()],
        "port_configs": ports or [{"port_id": 0}],
    }


@pytest.fixture()
def api():
    orch = Orchestrator(impairment=ImpairmentSpec(), seed=7)
    client = TestClient(create_app(orch))
    yield client, orch
    orch.close()


def wait_plan_done(client, plan_id, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        status = client.get(f"{BASE}/tests/{plan_id}").json()
        if status["status"] in ("done", "failed"):
            return status
        time.sleep(0.05)
    raise TimeoutError(f"plan {plan_id} did not finish")


class TestConfigure:
    def test_valid_config_accepted_and_echoed(self, api):
        client, _ = api
        r = client.post(f"{BASE}/configure", json=config_dict())
        assert r.status_code == 200
        echo = client.get(f"{BASE}/configure")
        assert echo.status_code == 200
        assert echo.content == r.content

    def test_get_without_configure_404(self, api):
        client, _ = api
        assert client.get(f"{BASE}/configure").status_code == 404

    def test_eight_cbr_streams_400(self, api):
        client, _ = api
        cfg = config_dict(*[stream_dict(stream_id=i + 1) for i in range(8)])
        r = client.post(f"{BASE}/configure", json=cfg)
        assert r.status_code == 400
        assert r.json()["code"] == "TooManyStreams"

    def test_srv6_with_vxlan_400(self, api):
        client, _ = api
        s = stream_dict(
            encap={
                "srv6": {"src": "2001:db8::a", "dst": "2001:db8::b", "segments": ["fc00::1"]},
                "vxlan": {
                    "outer_eth": {"src_mac": "02:00:00:00:00:10", "dst_mac": "02:00:00:00:00:11"},
                    "outer_src": "1.1.1.1",
                    "outer_dst": "2.2.2.2",
                    "vni": 5,
                },
            }
        )
        r = client.post(f"{BASE}/configure", json=config_dict(s))
        assert r.status_code == 400
        assert r.json()["code"] == "Srv6WithVxlan"
        assert "streams[0]" in r.json()["path"]

    def test_gen1_profile_rejects_srv6(self):
        orch = Orchestrator(device_profile=DeviceProfile.GEN1)
        client = TestClient(create_app(orch))
        try:
            s = stream_dict(
                encap={"srv6": {"src": "2001:db8::a", "dst": "2001:db8::b", "segments": ["fc00::1"]}}
            )
            r = client.post(f"{BASE}/configure", json=config_dict(s))
            assert r.status_code == 400
            assert r.json()["code"] == "Srv6NotSupportedByProfile"
        finally:
            orch.close()


class TestLifecycle:
    def test_start_stop_cycle(self, api):
        client, _ = api
        client.post(f"{BASE}/configure", json=config_dict())
        assert client.post(f"{BASE}/start").status_code == 200
        time.sleep(0.3)
        r = client.post(f"{BASE}/stop")
        assert r.status_code == 200
        stats = client.get(f"{BASE}/statistics").json()
        s = stats["streams"]["1"]
        assert s["lost_is_final"]
        assert s["lost"] == 0
        assert s["rx_frames"] > 0

    def test_start_without_config_409(self, api):
        client, _ = api
        assert client.post(f"{BASE}/start").status_code == 409

    def test_double_start_409(self, api):
        client, _ = api
        client.post(f"{BASE}/configure", json=config_dict())
        client.post(f"{BASE}/start")
        r = client.post(f"{BASE}/start")
        assert r.status_code == 409
        assert r.json()["code"] == "AlreadyRunning"
        client.post(f"{BASE}/stop")

    def test_stop_without_start_409(self, api):
        client, _ = api
        r = client.post(f"{BASE}/stop")
        assert r.status_code == 409
        assert r.json()["code"] == "NotRunning"

    def test_live_statistics_idle_zeroed(self, api):
        client, _ = api
        stats = client.get(f"{BASE}/statistics").json()
        assert stats["streams"] == {}
        assert stats["ports"] == {}

    def test_unknown_test_404(self, api):
        client, _ = api
        assert client.get(f"{BASE}/statistics", params={"test": "nope"}).status_code == 404


class TestPlans:
    def test_three_tests_in_order(self, api):
        client, _ = api
        plan = {
            "tests": [
                {"name": f"t{i}", "config": config_dict(stream_dict(rate=5e6)), "duration_s": 0.4}
                for i in range(3)
            ]
        }
        r = client.post(f"{BASE}/tests", json=plan)
        assert r.status_code == 202
        plan_id = r.json()["plan_id"]
        status = wait_plan_done(client, plan_id)
        assert status["status"] == "done"
        assert status["completed"] == 3
        report = json.loads(client.get(f"{BASE}/report/{plan_id}").content)
        names = [t["name"] for t in report["tests"]]
        assert names == ["t0", "t1", "t2"]
        for t in report["tests"]:
            assert abs(t["duration_actual_s"] - 0.4) <= 0.1

    def test_invalid_plan_fails_fast(self, api):
        client, _ = api
        plan = {
            "tests": [
                {"name": "ok", "config": config_dict(), "duration_s": 1},
                {"name": "bad", "config": config_dict(stream_dict(frame_size=10)), "duration_s": 1},
            ]
        }
        r = client.post(f"{BASE}/tests", json=plan)
        assert r.status_code == 400
        assert r.json()["code"] == "FrameSizeOutOfRange"
        # Nothing was executed: the orchestrator is still idle and accepts
        # a valid plan immediately.
        ok = client.post(
            f"{BASE}/tests",
            json={"tests": [{"name": "after", "config": config_dict(), "duration_s": 0.2}]},
        )
        assert ok.status_code == 202
        wait_plan_done(client, ok.json()["plan_id"])

    def test_status_mid_run(self, api):
        client, _ = api
        plan = {
            "tests": [
                {"name": "a", "config": config_dict(), "duration_s": 0.5},
                {"name": "b", "config": config_dict(), "duration_s": 0.5},
            ]
        }
        plan_id = client.post(f"{BASE}/tests", json=plan).json()["plan_id"]
        time.sleep(0.2)
        status = client.get(f"{BASE}/tests/{plan_id}").json()
        assert status["status"] == "running"
        assert status["current_index"] == 0
        wait_plan_done(client, plan_id)

    def test_plan_while_running_409(self, api):
        client, _ = api
        client.post(f"{BASE}/configure", json=config_dict())
        client.post(f"{BASE}/start")
        r = client.post(
            f"{BASE}/tests",
            json={"tests": [{"name": "x", "config": config_dict(), "duration_s": 0.2}]},
        )
        assert r.status_code == 409
        client.post(f"{BASE}/stop")

    def test_named_statistics_stable(self, api):
        client, _ = api
        plan = {"tests": [{"name": "solo", "config": config_dict(), "duration_s": 0.3}]}
        plan_id = client.post(f"{BASE}/tests", json=plan).json()["plan_id"]
        wait_plan_done(client, plan_id)
        a = client.get(f"{BASE}/statistics", params={"test": "solo"}).content
        b = client.get(f"{BASE}/statistics", params={"test": "solo"}).content
        assert a == b

    def test_unknown_plan_404(self, api):
        client, _ = api
        assert client.get(f"{BASE}/tests/plan-zzz").status_code == 404


class TestReports:
    def _finished_plan(self, client):
        plan = {
            "tests": [
                {"name": "r1", "config": config_dict(), "duration_s": 0.3},
                {"name": "r2", "config": config_dict(), "duration_s": 0.3},
            ]
        }
        plan_id = client.post(f"{BASE}/tests", json=plan).json()["plan_id"]
        wait_plan_done(client, plan_id)
        return plan_id

    def test_csv_shape(self, api):
        client, _ = api
        plan_id = self._finished_plan(client)
        r = client.get(f"{BASE}/report/{plan_id}", params={"format": "csv"})
        assert r.status_code == 200
        rows = list(csv.reader(io.StringIO(r.text)))
        assert rows[0] == [
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
        assert len(rows) == 3  # header + one stream row per test
        assert {row[0] for row in rows[1:]} == {"r1", "r2"}

    def test_json_round_trip(self, api):
        client, _ = api
        plan_id = self._finished_plan(client)
        body = client.get(f"{BASE}/report/{plan_id}").content
        parsed = json.loads(body)
        assert json.dumps(parsed, sort_keys=True).encode() == body

    def test_report_while_running_409(self, api):
        client, _ = api
        plan = {"tests": [{"name": "slow", "config": config_dict(), "duration_s": 1.0}]}
        plan_id = client.post(f"{BASE}/tests", json=plan).json()["plan_id"]
        r = client.get(f"{BASE}/report/{plan_id}")
        assert r.status_code == 409
        assert r.json()["code"] == "PlanRunning"
        wait_plan_done(client, plan_id)

    def test_report_unknown_404(self, api):
        client, _ = api
        assert client.get(f"{BASE}/report/plan-zzz").status_code == 404


class TestArpEndpoint:
    def test_enable_then_reply(self, api):
        client, orch = api
        client.post(f"{BASE}/configure", json=config_dict())
        r = client.put(
            f"{BASE}/ports/0/arp", json={"enabled": True, "mac": "02:f0:0d:00:00:01"}
        )
        assert r.status_code == 200
        replies = []

        def tap(frame, ts, port):
            arp = pc.parse_arp(frame)
            if arp is not None and arp.opcode == pc.ARP_OP_REPLY:
                replies.append(arp)

        orch.channel.add_tap(tap)
        inject_arp_request(orch.channel, "10.0.0.1", "aa:bb:cc:dd:ee:01", "10.0.0.50", port=0)
        deadline = time.time() + 2.0
        while not replies and time.time() < deadline:
            time.sleep(0.01)
        assert len(replies) == 1
        assert replies[0].sender_mac == "02:f0:0d:00:00:01"
        assert replies[0].sender_ip == "10.0.0.1"

    def test_disable_no_reply(self, api):
        client, orch = api
        client.post(f"{BASE}/configure", json=config_dict())
        client.put(f"{BASE}/ports/0/arp", json={"enabled": False})
        replies = []
        orch.channel.add_tap(
            lambda f, ts, p: replies.append(1)
            if (a := pc.parse_arp(f)) and a.opcode == 2
            else None
        )
        inject_arp_request(orch.channel, "10.0.0.1", "aa:bb:cc:dd:ee:01", "10.0.0.50", port=0)
        time.sleep(0.3)
        orch.channel.flush()
        assert replies == []

    def test_enable_without_mac_400(self, api):
        client, _ = api
        client.post(f"{BASE}/configure", json=config_dict())
        r = client.put(f"{BASE}/ports/0/arp", json={"enabled": True})
        assert r.status_code == 400
        assert r.json()["code"] == "MissingArpMac"

    def test_unknown_port_404(self, api):
        client, _ = api
        client.post(f"{BASE}/configure", json=config_dict())
        r = client.put(f"{BASE}/ports/9/arp", json={"enabled": True, "mac": "02:00:00:00:00:01"})
        assert r.status_code == 404

    def test_config_port_configs_arm_responder(self, api):
        client, orch = api
        cfg = config_dict(
            stream_dict(),
            ports=[{"port_id": 0, "arp_reply_enabled": True, "arp_reply_mac": "02:f0:0d:00:00:02"}],
        )
        client.post(f"{BASE}/configure", json=cfg)
        replies = []
        orch.channel.add_tap(
            lambda f, ts, p: replies.append(1)
            if (a := pc.parse_arp(f)) and a.opcode == 2
            else None
        )
        inject_arp_request(orch.channel, "10.0.0.9", "aa:bb:cc:dd:ee:02", "10.0.0.50", port=0)
        deadline = time.time() + 2.0
        while not replies and time.time() < deadline:
            time.sleep(0.01)
        assert len(replies) == 1


class TestProfilesEndpoint:
    def test_imix_runs_as_plan(self, api):
        client, _ = api
        r = client.post(
            f"{BASE}/profiles/imix",
            json={"total_rate_l1": 3e6, "duration_s": 0.5},
        )
        assert r.status_code == 202
        plan_id = r.json()["plan_id"]
        status = wait_plan_done(client, plan_id)
        assert status["status"] == "done"
        report = json.loads(client.get(f"{BASE}/report/{plan_id}").content)
        stats = report["tests"][0]["statistics"]
        assert len(stats["streams"]) == 3

    def test_rfc2544_minimal(self, api):
        client, _ = api
        r = client.post(
            f"{BASE}/profiles/rfc2544",
            json={
                "max_rate": 5e7,
                "frame_sizes": [512],
                "trial_duration_s": 0.2,
                "resolution": 0.05,
            },
        )
        assert r.status_code == 202
        plan_id = r.json()["plan_id"]
        status = wait_plan_done(client, plan_id, timeout=60)
        assert status["status"] == "done"
        report = json.loads(client.get(f"{BASE}/report/{plan_id}").content)
        tp = report["profile_result"]["throughput"]["512"]
        assert tp["rate_l1"] == 5e7  # lossless channel passes at max rate

    def test_unknown_profile_404(self, api):
        client, _ = api
        assert client.post(f"{BASE}/profiles/bogus", json={}).status_code == 404

    def test_profile_while_running_409(self, api):
        client, _ = api
        client.post(f"{BASE}/configure", json=config_dict())
        client.post(f"{BASE}/start")
        r = client.post(f"{BASE}/profiles/imix", json={"total_rate_l1": 1e6})
        assert r.status_code == 409
        client.post(f"{BASE}/stop")


class TestTimeseries:
    def test_empty_initially(self, api):
        client, _ = api
        assert client.get(f"{BASE}/timeseries").json() == []

    def test_buckets_cover_run(self, api):
        client, _ = api
        client.post(f"{BASE}/configure", json=config_dict(stream_dict(rate=5e6)))
        client.post(f"{BASE}/start")
        time.sleep(1.0)
        client.post(f"{BASE}/stop")
        entries = client.get(f"{BASE}/timeseries").json()
        assert 5 <= len(entries) <= 15
        mid = entries[len(entries) // 2]
        assert mid["tx_rate_l1"] == pytest.approx(5e6, rel=0.5)


class TestSchema:
    def test_schemas_published(self, api):
        client, _ = api
        r = client.get(f"{BASE}/schema")
        assert r.status_code == 200
        body = r.json()
        assert body["generation_config"]["$id"] == "swtg/generation-config"
        assert body["test_plan"]["required"] == ["tests"]


class TestStateMachine:
    def test_random_walk_never_accepts_invalid_transition(self, api):
        client, _ = api
        rng = Random(99)
        state = "idle"
        configured = False
        for _ in range(60):
            action = rng.choice(["configure", "start", "stop", "stats"])
            if action == "configure":
                r = client.post(f"{BASE}/configure", json=config_dict(stream_dict(rate=2e6)))
                assert r.status_code == 200
                configured = True
            elif action == "start":
                r = client.post(f"{BASE}/start")
                if state == "idle" and configured:
                    assert r.status_code == 200
                    state = "running"
                else:
                    assert r.status_code == 409
            elif action == "stop":
                r = client.post(f"{BASE}/stop")
                if state == "running":
                    assert r.status_code == 200
                    state = "idle"
                else:
                    assert r.status_code == 409
            else:
                assert client.get(f"{BASE}/statistics").status_code == 200
        if state == "running":
            client.post(f"{BASE}/stop")

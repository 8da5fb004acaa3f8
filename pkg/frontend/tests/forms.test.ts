// Editor model rules (DOM-free): toggle exclusions and inline errors.

import { describe, expect, it } from "vitest";

import { EditorModel, defaultStream } from "../src/forms.js";

describe("editor model", () => {
  it("disables VxLAN while SRv6 is active and vice versa", () => {
    const model = new EditorModel();
    model.streams[0].encap = { srv6: { src: "2001:db8::1", dst: "2001:db8::2", segments: ["fc00::1"] } };
    expect(model.vxlanDisabled(0)).toBe(true);
    expect(model.srv6Disabled(0)).toBe(false);

    model.streams[0].encap = {
      vxlan: {
        outer_eth: { src_mac: "02:00:00:00:00:10", dst_mac: "02:00:00:00:00:11" },
        outer_src: "1.1.1.1",
        outer_dst: "2.2.2.2",
        vni: 1,
      },
    };
    expect(model.srv6Disabled(0)).toBe(true);
    expect(model.vxlanDisabled(0)).toBe(false);
  });

  it("reports the 16th LSE inline before submission", () => {
    const model = new EditorModel();
    model.streams[0].encap = { mpls: Array.from({ length: 16 }, (_v, i) => ({ label: i + 1 })) };
    const errors = model.revalidate();
    expect(errors.some((e) => e.code === "TooManyLses")).toBe(true);
    expect(model.errorAt("streams[0].encap.mpls")).toBeDefined();
  });

  it("assigns fresh stream ids and keeps port configs in sync", () => {
    const model = new EditorModel();
    model.addStream();
    model.addStream();
    expect(model.streams.map((s) => s.stream_id)).toEqual([1, 2, 3]);
    model.streams[1].tx_ports = [2];
    model.revalidate();
    const cfg = model.config();
    expect(cfg.port_configs?.map((p) => p.port_id)).toEqual([0, 2]);
  });

  it("default stream validates clean", () => {
    const model = new EditorModel();
    expect(model.revalidate()).toEqual([]);
    expect(defaultStream(5).stream_id).toBe(5);
  });

  it("removing a stream clears its errors", () => {
    const model = new EditorModel();
    model.addStream();
    model.streams[1].frame_size = 10;
    expect(model.revalidate().length).toBeGreaterThan(0);
    model.removeStream(1);
    expect(model.errors).toEqual([]);
  });
});

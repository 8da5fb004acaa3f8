// Stream editor: form model plus thin DOM rendering. The model mirrors
// every stream field (headers, encapsulations, randomization) and runs
// the client-side rule mirror on each change; the server's 400 answers
// land on the same field paths.

import { ApiClient, ApiError } from "./api.js";
import type { EncapCfg, GenerationCfg, StreamCfg } from "./types.js";
import { validateConfig, type FieldError } from "./validation.js";

export function defaultStream(streamId: number): StreamCfg {
  return {
    stream_id: streamId,
    mode: "CBR",
    target_rate_l1: 1e7,
    frame_size: 512,
    eth: { src_mac: "02:00:00:00:00:01", dst_mac: "02:00:00:00:00:02" },
    l3: { version: 4, src: "10.0.0.1", dst: "10.0.0.2" },
    encap: {},
    tx_ports: [0],
  };
}

export class EditorModel {
  streams: StreamCfg[] = [defaultStream(1)];
  errors: FieldError[] = [];

  addStream(): void {
    const used = new Set(this.streams.map((s) => s.stream_id));
    let id = 1;
    while (used.has(id)) id++;
    this.streams.push(defaultStream(id));
    this.revalidate();
  }

  removeStream(index: number): void {
    this.streams.splice(index, 1);
    this.revalidate();
  }

  config(): GenerationCfg {
    const ports = [...new Set(this.streams.flatMap((s) => s.tx_ports ?? [0]))].sort();
    return {
      streams: this.streams,
      port_configs: ports.map((p) => ({ port_id: p })),
    };
  }

  revalidate(): FieldError[] {
    this.errors = validateConfig(this.config());
    return this.errors;
  }

  errorAt(path: string): FieldError | undefined {
    return this.errors.find((e) => e.path === path || e.path.startsWith(path));
  }

  /** SRv6 and VxLAN are mutually exclusive: whichever is active disables
   * the other control. */
  vxlanDisabled(i: number): boolean {
    return Boolean(this.streams[i].encap?.srv6);
  }

  srv6Disabled(i: number): boolean {
    return Boolean(this.streams[i].encap?.vxlan);
  }
}

type Update = (s: StreamCfg) => void;

export class StreamEditor {
  readonly model = new EditorModel();
  private status: HTMLElement;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private onConfigured: () => void = () => {},
  ) {
    this.status = document.createElement("div");
    this.status.className = "editor-status";
    this.render();
  }

  private field(
    label: string,
    value: string | number,
    path: string,
    apply: (raw: string) => void,
    options?: { type?: string; disabled?: boolean; title?: string },
  ): HTMLElement {
    const wrap = document.createElement("label");
    wrap.className = "field";
    const err = this.model.errorAt(path);
    wrap.innerHTML = `<span>${label}</span>`;
    const input = document.createElement("input");
    input.type = options?.type ?? "text";
    input.value = String(value);
    input.disabled = options?.disabled ?? false;
    if (options?.title) input.title = options.title;
    input.addEventListener("change", () => {
      apply(input.value);
      this.model.revalidate();
      this.render();
    });
    wrap.appendChild(input);
    if (err) {
      const note = document.createElement("em");
      note.className = "field-error";
      note.textContent = `${err.code}: ${err.message}`;
      wrap.appendChild(note);
      wrap.classList.add("invalid");
    }
    return wrap;
  }

  private update(i: number, fn: Update): void {
    fn(this.model.streams[i]);
    this.model.revalidate();
    this.render();
  }

  private encap(i: number): EncapCfg {
    const s = this.model.streams[i];
    if (!s.encap) s.encap = {};
    return s.encap;
  }

  private encapSection(i: number): HTMLElement {
    const s = this.model.streams[i];
    const encap = s.encap ?? {};
    const box = document.createElement("fieldset");
    box.innerHTML = "<legend>Encapsulation</legend>";
    const row = document.createElement("div");
    row.className = "encap-toggles";

    const toggle = (
      name: string,
      active: boolean,
      disabled: boolean,
      flip: () => void,
    ): HTMLElement => {
      const btn = document.createElement("button");
      btn.type = "button";
      btn.textContent = `${active ? "− " : "+ "}${name}`;
      btn.disabled = disabled;
      btn.className = active ? "toggle active" : "toggle";
      if (disabled) btn.title = "not available with the current stack";
      btn.addEventListener("click", () => this.update(i, flip));
      return btn;
    };

    row.appendChild(
      toggle("VLAN", Boolean(encap.vlan), Boolean(encap.qinq), () => {
        const e = this.encap(i);
        e.vlan = e.vlan ? null : { vlan_id: 100, pcp: 0, dei: 0 };
      }),
    );
    row.appendChild(
      toggle("QinQ", Boolean(encap.qinq), Boolean(encap.vlan), () => {
        const e = this.encap(i);
        e.qinq = e.qinq
          ? null
          : { outer: { vlan_id: 100, pcp: 0, dei: 0 }, inner: { vlan_id: 200, pcp: 0, dei: 0 } };
      }),
    );
    row.appendChild(
      toggle("MPLS LSE", false, (encap.mpls?.length ?? 0) >= 15, () => {
        const e = this.encap(i);
        e.mpls = [...(e.mpls ?? []), { label: 100, tc: 0, ttl: 64 }];
      }),
    );
    row.appendChild(
      toggle("SRv6", Boolean(encap.srv6), this.model.srv6Disabled(i), () => {
        const e = this.encap(i);
        e.srv6 = e.srv6 ? null : { src: "2001:db8::1", dst: "2001:db8::2", segments: ["fc00::1"] };
      }),
    );
    row.appendChild(
      toggle("VxLAN", Boolean(encap.vxlan), this.model.vxlanDisabled(i), () => {
        const e = this.encap(i);
        e.vxlan = e.vxlan
          ? null
          : {
              outer_eth: { src_mac: "02:00:00:00:00:10", dst_mac: "02:00:00:00:00:11" },
              outer_src: "192.168.0.1",
              outer_dst: "192.168.0.2",
              vni: 1,
            };
      }),
    );
    box.appendChild(row);

    if (encap.vlan) {
      box.appendChild(
        this.field("VLAN id", encap.vlan.vlan_id, `streams[${i}].encap.vlan`, (v) => {
          this.encap(i).vlan!.vlan_id = Number(v);
        }),
      );
    }
    if (encap.qinq) {
      box.appendChild(
        this.field("outer VLAN id", encap.qinq.outer.vlan_id, `streams[${i}].encap.qinq.outer`, (v) => {
          this.encap(i).qinq!.outer.vlan_id = Number(v);
        }),
      );
      box.appendChild(
        this.field("inner VLAN id", encap.qinq.inner.vlan_id, `streams[${i}].encap.qinq.inner`, (v) => {
          this.encap(i).qinq!.inner.vlan_id = Number(v);
        }),
      );
    }
    (encap.mpls ?? []).forEach((lse, j) => {
      const lseRow = document.createElement("div");
      lseRow.className = "lse-row";
      lseRow.appendChild(
        this.field(`LSE ${j + 1} label`, lse.label, `streams[${i}].encap.mpls[${j}]`, (v) => {
          this.encap(i).mpls![j].label = Number(v);
        }),
      );
      const del = document.createElement("button");
      del.type = "button";
      del.textContent = "remove";
      del.addEventListener("click", () =>
        this.update(i, () => {
          this.encap(i).mpls!.splice(j, 1);
        }),
      );
      lseRow.appendChild(del);
      box.appendChild(lseRow);
    });
    if (encap.srv6) {
      box.appendChild(
        this.field("SRv6 source", encap.srv6.src, `streams[${i}].encap.srv6.src`, (v) => {
          this.encap(i).srv6!.src = v;
        }),
      );
      box.appendChild(
        this.field("SRv6 destination", encap.srv6.dst, `streams[${i}].encap.srv6.dst`, (v) => {
          this.encap(i).srv6!.dst = v;
        }),
      );
      box.appendChild(
        this.field(
          "segments (comma separated, 1-3)",
          encap.srv6.segments.join(", "),
          `streams[${i}].encap.srv6.segments`,
          (v) => {
            this.encap(i).srv6!.segments = v.split(",").map((x) => x.trim()).filter(Boolean);
          },
        ),
      );
    }
    if (encap.vxlan) {
      box.appendChild(
        this.field("VNI", encap.vxlan.vni, `streams[${i}].encap.vxlan.vni`, (v) => {
          this.encap(i).vxlan!.vni = Number(v);
        }),
      );
      box.appendChild(
        this.field("outer src IP", encap.vxlan.outer_src, `streams[${i}].encap.vxlan.outer_src`, (v) => {
          this.encap(i).vxlan!.outer_src = v;
        }),
      );
      box.appendChild(
        this.field("outer dst IP", encap.vxlan.outer_dst, `streams[${i}].encap.vxlan.outer_dst`, (v) => {
          this.encap(i).vxlan!.outer_dst = v;
        }),
      );
    }
    return box;
  }

  private streamCard(i: number): HTMLElement {
    const s = this.model.streams[i];
    const card = document.createElement("section");
    card.className = "stream-card";
    const head = document.createElement("header");
    head.innerHTML = `<h3>Stream ${s.stream_id}</h3>`;
    const remove = document.createElement("button");
    remove.type = "button";
    remove.textContent = "delete";
    remove.addEventListener("click", () => {
      this.model.removeStream(i);
      this.render();
    });
    head.appendChild(remove);
    card.appendChild(head);

    card.appendChild(
      this.field("stream id", s.stream_id, `streams[${i}].stream_id`, (v) => {
        s.stream_id = Number(v);
      }),
    );
    const mode = document.createElement("label");
    mode.className = "field";
    mode.innerHTML = "<span>mode</span>";
    const select = document.createElement("select");
    for (const m of ["CBR", "POISSON"]) {
      const opt = document.createElement("option");
      opt.value = m;
      opt.textContent = m;
      opt.selected = s.mode === m;
      select.appendChild(opt);
    }
    select.addEventListener("change", () => this.update(i, (st) => (st.mode = select.value as "CBR" | "POISSON")));
    mode.appendChild(select);
    card.appendChild(mode);

    card.appendChild(
      this.field("L1 rate (bit/s)", s.target_rate_l1, `streams[${i}].target_rate_l1`, (v) => {
        s.target_rate_l1 = Number(v);
      }),
    );
    card.appendChild(
      this.field("frame size (bytes, incl. FCS)", s.frame_size, `streams[${i}].frame_size`, (v) => {
        s.frame_size = Number(v);
      }),
    );
    card.appendChild(
      this.field("src MAC", s.eth.src_mac, `streams[${i}].eth.src_mac`, (v) => {
        s.eth.src_mac = v;
      }),
    );
    card.appendChild(
      this.field("dst MAC", s.eth.dst_mac, `streams[${i}].eth.dst_mac`, (v) => {
        s.eth.dst_mac = v;
      }),
    );
    const ver = document.createElement("label");
    ver.className = "field";
    ver.innerHTML = "<span>IP version</span>";
    const verSel = document.createElement("select");
    for (const v of [4, 6]) {
      const opt = document.createElement("option");
      opt.value = String(v);
      opt.textContent = `IPv${v}`;
      opt.selected = s.l3.version === v;
      verSel.appendChild(opt);
    }
    verSel.addEventListener("change", () =>
      this.update(i, (st) => {
        st.l3 =
          verSel.value === "6"
            ? { version: 6, src: "2001:db8::1", dst: "2001:db8::2" }
            : { version: 4, src: "10.0.0.1", dst: "10.0.0.2" };
      }),
    );
    ver.appendChild(verSel);
    card.appendChild(ver);
    card.appendChild(
      this.field("src IP", s.l3.src, `streams[${i}].l3.src`, (v) => {
        s.l3.src = v;
      }),
    );
    card.appendChild(
      this.field("dst IP", s.l3.dst, `streams[${i}].l3.dst`, (v) => {
        s.l3.dst = v;
      }),
    );
    card.appendChild(
      this.field(
        "src random mask",
        String(s.l3.src_random_mask ?? ""),
        `streams[${i}].l3.src_random_mask`,
        (v) => {
          s.l3.src_random_mask = v || undefined;
        },
        { title: "address bits to randomize per packet (mask form)" },
      ),
    );
    card.appendChild(
      this.field(
        "dst random mask",
        String(s.l3.dst_random_mask ?? ""),
        `streams[${i}].l3.dst_random_mask`,
        (v) => {
          s.l3.dst_random_mask = v || undefined;
        },
      ),
    );
    card.appendChild(
      this.field("TX ports (comma separated)", (s.tx_ports ?? [0]).join(", "), `streams[${i}].tx_ports`, (v) => {
        s.tx_ports = v.split(",").map((x) => Number(x.trim())).filter((x) => !Number.isNaN(x));
      }),
    );
    card.appendChild(this.encapSection(i));
    return card;
  }

  render(): void {
    this.root.textContent = "";
    this.model.streams.forEach((_s, i) => this.root.appendChild(this.streamCard(i)));
    const controls = document.createElement("div");
    controls.className = "editor-controls";
    const add = document.createElement("button");
    add.type = "button";
    add.textContent = "+ add stream";
    add.addEventListener("click", () => {
      this.model.addStream();
      this.render();
    });
    controls.appendChild(add);
    const submit = document.createElement("button");
    submit.type = "button";
    submit.textContent = "apply configuration";
    submit.className = "primary";
    submit.disabled = this.model.revalidate().length > 0;
    submit.addEventListener("click", () => void this.submit());
    controls.appendChild(submit);
    this.root.appendChild(controls);
    this.root.appendChild(this.status);
  }

  async submit(): Promise<void> {
    const errors = this.model.revalidate();
    if (errors.length > 0) {
      this.render();
      return;
    }
    try {
      await this.api.configure(this.model.config());
      this.status.textContent = "Configured";
      this.status.className = "editor-status ok";
      this.onConfigured();
    } catch (err) {
      if (err instanceof ApiError) {
        // Server-side rejection: surface it inline on the same field.
        this.model.errors = [{ code: err.body.code, path: err.body.path, message: err.body.message }];
        this.status.textContent = `rejected: ${err.body.code} at ${err.body.path}`;
      } else {
        this.status.textContent = "connection error";
      }
      this.status.className = "editor-status error";
      this.render();
    }
  }
}

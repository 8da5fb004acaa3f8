"""Minimal pcap file writer/reader for exporting encoded frames.

Classic pcap format (magic 0xa1b2c3d4, microsecond timestamps is the
common variant; we write the nanosecond-resolution magic 0xa1b23c4d so
timestamps survive round trips exactly). Test utility: lets encoded
frames be inspected with external dissectors.
"""

from __future__ import annotations

import struct
from collections.abc import Iterable
from pathlib import Path

PCAP_MAGIC_NS = 0xA1B23C4D
LINKTYPE_ETHERNET = 1

_GLOBAL_HDR = struct.Struct("<IHHiIII")
_REC_HDR = struct.Struct("<IIII")


def write_pcap(
    path: str | Path,
    frames: Iterable[bytes | tuple[int, bytes]],
    link_type: int = LINKTYPE_ETHERNET,
) -> int:
    """Write frames (optionally (ts_ns, bytes) pairs) to a pcap file.

    Returns the number of records written.
    """
    count = 0
    with open(path, "wb") as fh:
        fh.write(_GLOBAL_HDR.pack(PCAP_MAGIC_NS, 2, 4, 0, 0, 65535, link_type))
        for item in frames:
            if isinstance(item, tuple):
                ts_ns, data = item
            else:
                ts_ns, data = 0, item
            fh.write(_REC_HDR.pack(ts_ns // 1_000_000_000, ts_ns % 1_000_000_000, len(data), len(data)))
            fh.write(data)
            count += 1
    return count


def read_pcap(path: str | Path) -> list[tuple[int, bytes]]:
    """Read (ts_ns, frame) records back from a pcap file written above."""
    records = []
    with open(path, "rb") as fh:
        header = fh.read(_GLOBAL_HDR.size)
        magic = struct.unpack_from("<I", header)[0]
        if magic != PCAP_MAGIC_NS:
            raise ValueError(f"unsupported pcap magic {magic:#x}")
        while True:
            rec = fh.read(_REC_HDR.size)
            if not rec:
                break
            sec, frac, incl, _orig = _REC_HDR.unpack(rec)
            records.append((sec * 1_000_000_000 + frac, fh.read(incl)))
    return records

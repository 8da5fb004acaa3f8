"""swtg: software traffic generator and analyzer.

Generates CBR/Poisson traffic streams with customizable VLAN, QinQ,
MPLS, SRv6 and VxLAN encapsulation, measures rates, loss, reordering,
RTT and IAT in-band, and exposes a REST control plane with automated
multi-test orchestration plus IMIX and RFC 2544 profiles. A built-in
impairment channel acts as a deterministic virtual device under test.
"""

__version__ = "0.1.0"

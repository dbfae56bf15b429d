"""Run copy, swap and random unitary attacks on single butterfly edges.

Security is the trace distance between Eve's joint state with the inputs and
the product of its marginals, reported per public outcome.
"""
from __future__ import annotations

from qnetcode import catalog, protocol

net, protected = catalog.butterfly(3)
suite = protocol.build_suite(net.ctx, 1, ["copy", "pauli", "swap", "random:2"], seed=0)
for e in (6, 9, 11):
    for att in suite:
        o = protocol.run(net, protected, att.at((e,)))
        print(f"e{e} {att.name:<11} gap={o.security_gap:.2e} I(A;E)={o.mutual_info:.3f} bits")
# e6 and e9 are classically secure and recoverable, so every attack leaves no trace.
# e11 is secure but not recoverable, and the swap and random attacks leak there.

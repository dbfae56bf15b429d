"""Classical secrecy and recoverability of the butterfly code, edge by edge.

Each channel is attacked in turn. Secrecy asks whether the wiretapped values
are independent of the messages once the shared randomness is averaged out.
Recoverability asks whether the receivers can undo whatever Eve injected.
"""
from __future__ import annotations

from qnetcode import catalog, codec

net, protected = catalog.butterfly(3)
print("M0 (rows: edges, cols: messages then randomness)")
print(codec.compute_m0(net))

for e in net.physical_edges:
    v = codec.analyze(net, (e,), protected)
    line = f"e{e}: secure={v.secure} recoverable={v.recoverable}"
    if v.recovery is not None:
        line += f"  decoder m1={v.recovery.m1.tolist()} m2={v.recovery.m2.tolist()}"
    print(line)

# e11 feeds both protected outputs, so any injection there is not correctable
# from the public outcomes alone.
